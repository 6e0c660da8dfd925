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

#include "packbench/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>

#include <fmt/format.h>

#include "packbench/attention.hpp"
#include "packbench/collate.hpp"
#include "packbench/error.hpp"
#include "packbench/parallel.hpp"

namespace packbench {

namespace {

struct Tally {
  std::size_t rows = 0;
  std::size_t useful = 0;
  std::size_t cells = 0;
  std::vector<std::size_t> per_rank;
  bool position_ids = false;

  explicit Tally(std::size_t world) : per_rank(world, 0) {}

  void merge(const Tally& other) {
    rows += other.rows;
    useful += other.useful;
    cells += other.cells;
    for (std::size_t r = 0; r < per_rank.size(); ++r) per_rank[r] += other.per_rank[r];
    position_ids = position_ids || other.position_ids;
  }
};

void tally_shapes(const Unit& unit, UnitKind kind, const Dataset& prepared, std::size_t rank,
                  Tally& t) {
  if (const auto* mb = std::get_if<Minibatch>(&unit)) {
    std::size_t sum = 0;
    std::size_t longest = 0;
    for (auto id : mb->examples) {
      const auto len = prepared.by_id(id).length();
      sum += len;
      longest = std::max(longest, len);
    }
    t.rows += mb->examples.size();
    t.useful += sum;
    t.cells += kind == UnitKind::kPaddedMinibatch ? mb->examples.size() * longest : sum;
    t.per_rank[rank] += sum;
    t.position_ids = t.position_ids || kind == UnitKind::kFlatMinibatch;
    return;
  }
  for (const auto& pack : std::get<PackGroup>(unit).packs) {
    t.rows += 1;
    t.useful += pack.used();
    t.cells += pack.capacity();
    t.per_rank[rank] += pack.used();
  }
  t.position_ids = t.position_ids || kind == UnitKind::kFlatPack;
}

constexpr TokenId kPadSentinel = -1;

void tally_materialized(const Unit& unit, Method method, const Dataset& prepared,
                        std::size_t rank, Tally& t) {
  const auto batch = collate_unit(unit, method, prepared, kPadSentinel);
  const auto cells = batch.input_ids().cells();
  const auto useful = static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](TokenId v) { return v != kPadSentinel; }));

  if (unit_kind(method) == UnitKind::kFlatMinibatch) {
    t.rows += derive_cu_seqlens(batch.position_ids()->row(0), batch.cols()).size() - 1;
  } else {
    t.rows += batch.rows();
  }
  t.useful += useful;
  t.cells += cells.size();
  t.per_rank[rank] += useful;
  t.position_ids = t.position_ids || batch.position_ids().has_value();
}

// Boundaries each collated row should have if every example attended only to itself.
std::vector<std::vector<std::size_t>> true_boundaries(const Unit& unit, UnitKind kind,
                                                      const Dataset& prepared) {
  std::vector<std::vector<std::size_t>> rows;
  if (const auto* mb = std::get_if<Minibatch>(&unit)) {
    if (kind == UnitKind::kPaddedMinibatch) {
      for (auto id : mb->examples) rows.push_back({0, prepared.by_id(id).length()});
    } else {
      std::vector<std::size_t> cu{0};
      for (auto id : mb->examples) cu.push_back(cu.back() + prepared.by_id(id).length());
      rows.push_back(std::move(cu));
    }
    return rows;
  }
  for (const auto& pack : std::get<PackGroup>(unit).packs) {
    std::vector<std::size_t> cu{0};
    for (const auto& seg : pack.segments()) cu.push_back(cu.back() + seg.length());
    rows.push_back(std::move(cu));
  }
  return rows;
}

struct UnitRef {
  const Unit* unit;
  std::size_t rank;
};

std::vector<std::vector<UnitRef>> units_by_step(const PackingPlan& plan) {
  std::vector<std::vector<UnitRef>> out(plan.steps.size());
  for (std::size_t s = 0; s < plan.steps.size(); ++s) {
    for (std::size_t r = 0; r < plan.steps[s].size(); ++r) {
      for (const auto& unit : plan.steps[s][r]) out[s].push_back({&unit, r});
    }
  }
  return out;
}

std::size_t count_broken(const PackingPlan& plan) {
  std::unordered_map<ExampleId, std::size_t> pieces;
  for (const auto& step : plan.steps) {
    for (const auto& slot : step) {
      for (const auto& unit : slot) {
        if (const auto* group = std::get_if<PackGroup>(&unit)) {
          for (const auto& pack : group->packs) {
            for (const auto& seg : pack.segments()) ++pieces[seg.example_id];
          }
        }
      }
    }
  }
  return static_cast<std::size_t>(
      std::count_if(pieces.begin(), pieces.end(), [](const auto& kv) { return kv.second > 1; }));
}

}  // namespace

MetricsReport simulate(const PackingPlan& plan, const Dataset& dataset,
                       const SimulateOptions& options) {
  const auto prepared = prepare_dataset(dataset, plan.config);
  validate_plan(plan, prepared);

  const auto method = plan.config.method;
  const auto kind = unit_kind(method);
  const bool materialize =
      options.mode == SimulationMode::kMaterialize ||
      (options.mode == SimulationMode::kAuto &&
       dataset_total_tokens(prepared) <= options.materialize_limit);

  const auto by_step = units_by_step(plan);
  std::vector<Tally> per_step(by_step.size(), Tally(plan.config.world));
  parallel_for(by_step.size(), [&](std::size_t s) {
    for (const auto& ref : by_step[s]) {
      if (materialize) {
        tally_materialized(*ref.unit, method, prepared, ref.rank, per_step[s]);
      } else {
        tally_shapes(*ref.unit, kind, prepared, ref.rank, per_step[s]);
      }
    }
  });
  Tally total(plan.config.world);
  for (const auto& t : per_step) total.merge(t);

  MetricsReport report;
  report.method = method;
  report.rows = total.rows;
  report.steps = plan.steps.size();
  report.useful_tokens = total.useful;
  report.total_cells = total.cells;
  report.pad_tokens = total.cells - total.useful;
  report.utilization =
      total.cells ? static_cast<double>(total.useful) / static_cast<double>(total.cells) : 0.0;
  report.per_rank_tokens = total.per_rank;
  const auto [lo, hi] = std::minmax_element(total.per_rank.begin(), total.per_rank.end());
  const double mean = static_cast<double>(std::accumulate(total.per_rank.begin(),
                                                          total.per_rank.end(), std::size_t{0})) /
                      static_cast<double>(total.per_rank.size());
  report.imbalance = mean > 0.0 ? static_cast<double>(*hi - *lo) / mean : 0.0;
  report.broken_examples = count_broken(plan);
  report.position_ids = total.position_ids;
  return report;
}

double throughput_proxy(const MetricsReport& report, CostModel model) {
  return model == CostModel::kCells ? static_cast<double>(report.total_cells)
                                    : static_cast<double>(report.useful_tokens);
}

AttentionAudit audit_cross_attention(const PackingPlan& plan, const Dataset& dataset,
                                     std::size_t d, std::uint64_t seed) {
  if (d == 0) throw ValidationError("embedding width must be >= 1");
  const auto prepared = prepare_dataset(dataset, plan.config);
  validate_plan(plan, prepared);
  const auto method = plan.config.method;
  const auto kind = unit_kind(method);

  std::vector<const Unit*> units;
  for (const auto& step : plan.steps) {
    for (const auto& slot : step) {
      for (const auto& unit : slot) units.push_back(&unit);
    }
  }

  std::vector<double> worst(units.size(), 0.0);
  std::vector<std::size_t> rows(units.size(), 0);
  parallel_for(units.size(), [&](std::size_t u) {
    const auto batch = collate_unit(*units[u], method, prepared);
    const auto truth = true_boundaries(*units[u], kind, prepared);
    rows[u] = truth.size();
    for (std::size_t r = 0; r < truth.size(); ++r) {
      const auto occupied = truth[r].back();
      const auto e = embed(batch.input_ids().row(r).first(occupied), d, seed);
      const auto reference = independent_attention(e, truth[r]);

      const auto seen = row_boundaries(batch, r);
      double diff = std::numeric_limits<double>::infinity();
      if (seen.empty()) {
        diff = max_abs_diff(causal_attention(e, FullCausal{}), reference);
      } else if (seen.back() == occupied) {
        diff = max_abs_diff(causal_attention(e, BlockDiagonal{seen}), reference);
      }
      worst[u] = std::max(worst[u], diff);
    }
  });

  AttentionAudit audit;
  for (std::size_t u = 0; u < units.size(); ++u) {
    audit.max_diff = std::max(audit.max_diff, worst[u]);
    audit.rows_checked += rows[u];
  }
  return audit;
}

nlohmann::ordered_json report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["method"] = std::string(method_name(r.method));
  doc["rows"] = r.rows;
  doc["steps"] = r.steps;
  doc["useful_tokens"] = r.useful_tokens;
  doc["pad_tokens"] = r.pad_tokens;
  doc["total_cells"] = r.total_cells;
  doc["utilization"] = r.utilization;
  doc["per_rank_tokens"] = r.per_rank_tokens;
  doc["imbalance"] = r.imbalance;
  doc["broken_examples"] = r.broken_examples;
  doc["position_ids"] = r.position_ids;
  return doc;
}

void write_report_csv(std::ostream& out, const MetricsReport& r) {
  out << "method,rows,steps,useful_tokens,pad_tokens,total_cells,utilization,per_rank_tokens,"
         "imbalance,broken_examples,position_ids\n";
  out << fmt::format("{},{},{},{},{},{},{:.6f},{},{:.6f},{},{}\n", method_name(r.method), r.rows,
                     r.steps, r.useful_tokens, r.pad_tokens, r.total_cells, r.utilization,
                     fmt::join(r.per_rank_tokens, ";"), r.imbalance, r.broken_examples,
                     r.position_ids ? "yes" : "no");
}

void write_comparison_csv(std::ostream& out, std::span<const MetricsReport> reports) {
  out << "method,rows,steps,useful_tokens,pad_tokens,utilization,imbalance,broken_examples\n";
  for (const auto& r : reports) {
    out << fmt::format("{},{},{},{},{},{:.6f},{:.6f},{}\n", method_name(r.method), r.rows,
                       r.steps, r.useful_tokens, r.pad_tokens, r.utilization, r.imbalance,
                       r.broken_examples);
  }
}

void write_comparison_text(std::ostream& out, std::span<const MetricsReport> reports) {
  out << fmt::format("{:<26} {:>9} {:>7} {:>13} {:>13} {:>11} {:>10} {:>7}\n", "method", "rows",
                     "steps", "useful_tokens", "pad_tokens", "utilization", "imbalance",
                     "broken");
  for (const auto& r : reports) {
    out << fmt::format("{:<26} {:>9} {:>7} {:>13} {:>13} {:>11.4f} {:>10.4f} {:>7}\n",
                       method_name(r.method), r.rows, r.steps, r.useful_tokens, r.pad_tokens,
                       r.utilization, r.imbalance, r.broken_examples);
  }
}

}  // namespace packbench
