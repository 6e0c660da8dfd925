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

#include "packbench/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "packbench/error.hpp"

namespace packbench {

namespace {

using nlohmann::json;

std::size_t read_count(const json& value, std::size_t line, const char* what) {
  if (!value.is_number_integer()) throw ParseError(line, std::string(what) + " must be an integer");
  if (value.get<std::int64_t>() < 0) throw ParseError(line, std::string(what) + " must be >= 0");
  return value.get<std::size_t>();
}

TokenSequence parse_record(const json& record, ExampleId id, std::size_t line,
                           DatasetFormat format) {
  if (!record.is_object()) throw ParseError(line, "record must be a JSON object");
  const bool has_tokens = record.contains("input_ids");
  const bool has_length = record.contains("length");

  bool use_tokens = false;
  switch (format) {
    case DatasetFormat::kTokens:
      if (!has_tokens) throw ParseError(line, "missing \"input_ids\"");
      use_tokens = true;
      break;
    case DatasetFormat::kLengths:
      if (!has_length) throw ParseError(line, "missing \"length\"");
      break;
    case DatasetFormat::kAuto:
      if (!has_tokens && !has_length) throw ParseError(line, "expected \"input_ids\" or \"length\"");
      use_tokens = has_tokens;
      break;
  }

  if (use_tokens) {
    const auto& ids = record["input_ids"];
    if (!ids.is_array()) throw ParseError(line, "\"input_ids\" must be an array");
    if (ids.empty()) throw ValidationError(fmt::format("line {}: zero-length example", line));
    std::vector<TokenId> tokens;
    tokens.reserve(ids.size());
    for (const auto& t : ids) tokens.push_back(static_cast<TokenId>(read_count(t, line, "token id")));
    return TokenSequence(id, std::move(tokens));
  }
  const auto length = read_count(record["length"], line, "\"length\"");
  if (length == 0) throw ValidationError(fmt::format("line {}: zero-length example", line));
  return synthesize_sequence(id, length);
}

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "auto") return DatasetFormat::kAuto;
  if (name == "tokens") return DatasetFormat::kTokens;
  if (name == "lengths") return DatasetFormat::kLengths;
  throw ValidationError("unknown dataset format '" + std::string(name) + "'");
}

TokenSequence synthesize_sequence(ExampleId id, std::size_t length) {
  std::vector<TokenId> tokens(length);
  for (std::size_t k = 0; k < length; ++k) {
    tokens[k] = static_cast<TokenId>(id * 1000 + k);
  }
  return TokenSequence(id, std::move(tokens));
}

Dataset read_dataset(std::istream& in, DatasetFormat format) {
  std::vector<TokenSequence> sequences;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    sequences.push_back(parse_record(record, sequences.size(), line_no, format));
  }
  return Dataset(std::move(sequences));
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, format);
}

void write_dataset(std::ostream& out, const Dataset& dataset, DatasetFormat format) {
  for (const auto& seq : dataset) {
    json record = json::object();
    if (format == DatasetFormat::kLengths) {
      record["length"] = seq.length();
    } else {
      record["input_ids"] = std::vector<TokenId>(seq.tokens().begin(), seq.tokens().end());
    }
    out << record.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset,
                  DatasetFormat format) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset '" + path.string() + "'");
  write_dataset(out, dataset, format);
}

void SynthSpec::validate() const {
  if (min_len < 1 || min_len > max_len) throw ValidationError("need 1 <= min_len <= max_len");
  if (const auto* u = std::get_if<UniformLength>(&distribution); u && u->lo > u->hi) {
    throw ValidationError("uniform distribution needs lo <= hi");
  }
  if (const auto* b = std::get_if<Bimodal>(&distribution);
      b && (b->weight < 0.0 || b->weight > 1.0)) {
    throw ValidationError("bimodal weight must be in [0, 1]");
  }
}

SynthSpec flan_like(std::size_t n, std::uint64_t seed) {
  // mode = exp(mu - sigma^2) = 100 tokens
  return {n, Lognormal{std::log(100.0) + 1.0, 1.0}, 1, 4096, seed};
}

SynthSpec orcamath_like(std::size_t n, std::uint64_t seed) {
  // mode 400
  return {n, Lognormal{std::log(400.0) + 0.45 * 0.45, 0.45}, 1, 4096, seed};
}

SynthSpec stack_like(std::size_t n, std::uint64_t seed) {
  // mode 600, heavy tail past a 4096 msl
  return {n, Lognormal{std::log(600.0) + 1.1 * 1.1, 1.1}, 1, 16384, seed};
}

std::optional<SynthSpec> synth_preset(std::string_view name, std::size_t n, std::uint64_t seed) {
  if (name == "flan") return flan_like(n, seed);
  if (name == "orcamath") return orcamath_like(n, seed);
  if (name == "stack") return stack_like(n, seed);
  return std::nullopt;
}

Dataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  auto clamp = [&](double x) {
    const double lo = static_cast<double>(spec.min_len);
    const double hi = static_cast<double>(spec.max_len);
    return static_cast<std::size_t>(std::clamp(std::round(x), lo, hi));
  };
  auto draw = [&]() -> std::size_t {
    return std::visit(
        [&](const auto& d) -> std::size_t {
          using D = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<D, Lognormal>) {
            std::lognormal_distribution<double> dist(d.mu, d.sigma);
            return clamp(dist(rng));
          } else if constexpr (std::is_same_v<D, UniformLength>) {
            std::uniform_int_distribution<std::size_t> dist(d.lo, d.hi);
            return clamp(static_cast<double>(dist(rng)));
          } else {
            std::bernoulli_distribution first(d.weight);
            const bool pick_first = first(rng);
            std::normal_distribution<double> dist(pick_first ? d.mu1 : d.mu2,
                                                  pick_first ? d.sigma1 : d.sigma2);
            return clamp(dist(rng));
          }
        },
        spec.distribution);
  };

  std::vector<TokenSequence> sequences;
  sequences.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) sequences.push_back(synthesize_sequence(i, draw()));
  return Dataset(std::move(sequences));
}

LengthHistogram length_stats(const Dataset& dataset, std::size_t bin_width) {
  if (dataset.empty()) throw ValidationError("length statistics need a non-empty dataset");
  if (bin_width == 0) throw ValidationError("bin width must be >= 1");

  LengthHistogram h;
  h.min = dataset[0].length();
  h.max = h.min;
  double sum = 0.0;
  for (const auto& seq : dataset) {
    h.min = std::min(h.min, seq.length());
    h.max = std::max(h.max, seq.length());
    sum += static_cast<double>(seq.length());
  }
  const double n = static_cast<double>(dataset.size());
  h.mean = sum / n;
  double sq = 0.0;
  for (const auto& seq : dataset) {
    const double dev = static_cast<double>(seq.length()) - h.mean;
    sq += dev * dev;
  }
  h.variance = sq / n;

  const std::size_t bins = (h.max + bin_width - 1) / bin_width;
  h.counts.assign(bins, 0);
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = i * bin_width;
  for (const auto& seq : dataset) ++h.counts[(seq.length() - 1) / bin_width];
  h.mode_bin = static_cast<std::size_t>(
      std::distance(h.counts.begin(), std::max_element(h.counts.begin(), h.counts.end())));
  return h;
}

void write_histogram_csv(std::ostream& out, const LengthHistogram& h) {
  out << "bin_lo,bin_hi,count\n";
  std::size_t n = 0;
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << fmt::format("{},{},{}\n", h.bin_edges[i], h.bin_edges[i + 1], h.counts[i]);
    n += h.counts[i];
  }
  out << fmt::format("# n={},mean={:.6f},variance={:.6f},min={},max={},mode_bin={}\n", n, h.mean,
                     h.variance, h.min, h.max, h.mode_bin);
}

}  // namespace packbench
