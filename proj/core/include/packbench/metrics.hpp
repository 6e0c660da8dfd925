// Copyright 2026 The packbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "packbench/method.hpp"
#include "packbench/packing.hpp"
#include "packbench/types.hpp"

namespace packbench {

// Per-epoch accounting of a plan.
//
// rows counts consumed examples for minibatch methods and emitted tensor
// rows for offline methods. total_cells sums rows x cols over the collated
// tensors; useful_tokens + pad_tokens == total_cells.
struct MetricsReport {
  Method method = Method::kRandomSamplingPadding;
  std::size_t rows = 0;
  std::size_t steps = 0;
  std::size_t useful_tokens = 0;
  std::size_t pad_tokens = 0;
  std::size_t total_cells = 0;
  double utilization = 0.0;
  std::vector<std::size_t> per_rank_tokens;
  double imbalance = 0.0;  // (max - min) / mean of per_rank_tokens
  std::size_t broken_examples = 0;
  bool position_ids = false;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class SimulationMode {
  kAuto,         // materialize up to materialize_limit dataset tokens, else shapes
  kShapes,       // shape bookkeeping only
  kMaterialize,  // collate every microbatch and count cells
};

struct SimulateOptions {
  SimulationMode mode = SimulationMode::kAuto;
  std::size_t materialize_limit = 100'000;
};

// Truncates `dataset` to the plan's msl, checks the plan against it, then
// tallies the report. Throws ValidationError on a plan/dataset mismatch.
MetricsReport simulate(const PackingPlan& plan, const Dataset& dataset,
                       const SimulateOptions& options = {});

enum class CostModel { kCells, kTokens };

// Work units: total cells (padding included) or useful tokens.
double throughput_proxy(const MetricsReport& report, CostModel model);

// Result of feeding every collated row to attention with only the boundary
// information the row itself carries, compared with attending to each
// example on its own.
struct AttentionAudit {
  double max_diff = 0.0;
  std::size_t rows_checked = 0;

  static constexpr double kTolerance = 1e-6;
  bool correct() const { return max_diff < kTolerance; }
};

AttentionAudit audit_cross_attention(const PackingPlan& plan, const Dataset& dataset,
                                     std::size_t d, std::uint64_t seed);

nlohmann::ordered_json report_to_json(const MetricsReport& report);
// Single report with every field; per_rank_tokens is ';'-joined.
void write_report_csv(std::ostream& out, const MetricsReport& report);

// Columns: method,rows,steps,useful_tokens,pad_tokens,utilization,imbalance,broken_examples
void write_comparison_csv(std::ostream& out, std::span<const MetricsReport> reports);
// Same columns, padded for reading in a terminal.
void write_comparison_text(std::ostream& out, std::span<const MetricsReport> reports);

}  // namespace packbench
