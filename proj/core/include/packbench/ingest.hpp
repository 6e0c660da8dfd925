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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "packbench/types.hpp"

namespace packbench {

// JSON-lines record layouts: {"input_ids": [...]} or {"length": n}.
enum class DatasetFormat { kAuto, kTokens, kLengths };

DatasetFormat parse_dataset_format(std::string_view name);

// Tokens for a lengths-only record: id * 1000 + position.
TokenSequence synthesize_sequence(ExampleId id, std::size_t length);

// Examples get ids 0..n-1 in file order. Blank lines are skipped.
// Throws ParseError (with line number) or ValidationError.
Dataset read_dataset(std::istream& in, DatasetFormat format = DatasetFormat::kAuto);
// As read_dataset; throws IoError if the file cannot be opened.
Dataset load_dataset(const std::filesystem::path& path,
                     DatasetFormat format = DatasetFormat::kAuto);

void write_dataset(std::ostream& out, const Dataset& dataset,
                   DatasetFormat format = DatasetFormat::kTokens);
void save_dataset(const std::filesystem::path& path, const Dataset& dataset,
                  DatasetFormat format = DatasetFormat::kTokens);

// Length distributions for synthetic corpora. Lognormal parameters live in
// log-token space; bimodal is a two-component normal mixture in token space
// where `weight` is the probability of the first component.
struct Lognormal {
  double mu;
  double sigma;
};
struct UniformLength {
  std::size_t lo;
  std::size_t hi;
};
struct Bimodal {
  double mu1;
  double sigma1;
  double mu2;
  double sigma2;
  double weight;
};
using LengthDistribution = std::variant<Lognormal, UniformLength, Bimodal>;

struct SynthSpec {
  std::size_t n = 0;
  LengthDistribution distribution = Lognormal{5.0, 1.0};
  std::size_t min_len = 1;
  std::size_t max_len = 4096;
  std::uint64_t seed = 42;

  void validate() const;
};

// Instruction-tuning shaped corpora: short with a long tail (mode ~100),
// math word problems (mode ~400, narrow), and source code (long, wide).
SynthSpec flan_like(std::size_t n, std::uint64_t seed = 42);
SynthSpec orcamath_like(std::size_t n, std::uint64_t seed = 42);
SynthSpec stack_like(std::size_t n, std::uint64_t seed = 42);
std::optional<SynthSpec> synth_preset(std::string_view name, std::size_t n, std::uint64_t seed);

// Deterministic for a fixed seed; lengths are clamped to [min_len, max_len].
Dataset generate_synthetic(const SynthSpec& spec);

struct LengthHistogram {
  std::vector<std::size_t> bin_edges;  // ascending, counts.size() + 1 entries
  std::vector<std::size_t> counts;     // bin i covers (edges[i], edges[i+1]]
  double mean = 0.0;
  double variance = 0.0;  // population variance
  std::size_t min = 0;
  std::size_t max = 0;
  std::size_t mode_bin = 0;  // first bin with the highest count
};

// Right-closed bins (lo, lo + bin_width] from 0 up to max rounded up to a
// multiple of bin_width; lengths are >= 1 so every example lands in a bin.
// Throws ValidationError on an empty dataset or zero bin width.
LengthHistogram length_stats(const Dataset& dataset, std::size_t bin_width);

// Header bin_lo,bin_hi,count; one line per bin; a trailing "# n=..." summary.
void write_histogram_csv(std::ostream& out, const LengthHistogram& histogram);

}  // namespace packbench
