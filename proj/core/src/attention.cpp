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

#include "packbench/attention.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "packbench/collate.hpp"
#include "packbench/error.hpp"
#include "packbench/parallel.hpp"

namespace packbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Start of the segment containing each position.
std::vector<std::size_t> segment_starts(const MaskMode& mask, std::size_t seq_len) {
  std::vector<std::size_t> starts(seq_len, 0);
  const auto* block = std::get_if<BlockDiagonal>(&mask);
  if (!block) return starts;

  const auto& cu = block->cu_seqlens;
  if (cu.size() < 2 || cu.front() != 0 || cu.back() != seq_len) {
    throw ValidationError(
        fmt::format("cu_seqlens do not describe a sequence of length {}", seq_len));
  }
  for (std::size_t s = 0; s + 1 < cu.size(); ++s) {
    if (cu[s + 1] <= cu[s]) throw ValidationError("cu_seqlens must be strictly increasing");
    std::fill(starts.begin() + static_cast<std::ptrdiff_t>(cu[s]),
              starts.begin() + static_cast<std::ptrdiff_t>(cu[s + 1]), cu[s]);
  }
  return starts;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// Weights over keys [lo, query], normalized.
std::vector<double> softmax_weights(const Embeddings& e, std::size_t lo, std::size_t query) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(e.cols()));
  std::vector<double> w(query - lo + 1);
  const auto q = e.row(query);
  for (std::size_t j = lo; j <= query; ++j) w[j - lo] = dot(q, e.row(j)) * scale;
  const double peak = *std::max_element(w.begin(), w.end());
  double total = 0.0;
  for (auto& x : w) {
    x = std::exp(x - peak);
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

void require_input(const Embeddings& e) {
  if (e.rows() == 0 || e.cols() == 0) throw ValidationError("attention input must be non-empty");
}

}  // namespace

double embed_value(TokenId token, std::size_t dim, std::uint64_t seed) {
  auto h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(token));
  h = splitmix64(h ^ (static_cast<std::uint64_t>(dim) * 0x2545f4914f6cdd1dULL));
  const double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * unit - 1.0;
}

Embeddings embed(std::span<const TokenId> input_ids, std::size_t d, std::uint64_t seed) {
  Embeddings e(input_ids.size(), d);
  for (std::size_t i = 0; i < input_ids.size(); ++i) {
    for (std::size_t k = 0; k < d; ++k) e.at(i, k) = embed_value(input_ids[i], k, seed);
  }
  return e;
}

Embeddings causal_attention(const Embeddings& embeddings, const MaskMode& mask) {
  require_input(embeddings);
  const auto n = embeddings.rows();
  const auto d = embeddings.cols();
  const auto starts = segment_starts(mask, n);

  Embeddings out(n, d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = softmax_weights(embeddings, starts[i], i);
    auto dst = out.row(i);
    for (std::size_t j = starts[i]; j <= i; ++j) {
      const auto v = embeddings.row(j);
      const double wj = w[j - starts[i]];
      for (std::size_t k = 0; k < d; ++k) dst[k] += wj * v[k];
    }
  }
  return out;
}

std::vector<double> attention_weights(const Embeddings& embeddings, const MaskMode& mask,
                                      std::size_t query) {
  require_input(embeddings);
  if (query >= embeddings.rows()) throw ValidationError("query index out of range");
  const auto starts = segment_starts(mask, embeddings.rows());
  const auto w = softmax_weights(embeddings, starts[query], query);
  std::vector<double> full(query + 1, 0.0);
  std::copy(w.begin(), w.end(), full.begin() + static_cast<std::ptrdiff_t>(starts[query]));
  return full;
}

Embeddings independent_attention(const Embeddings& embeddings,
                                 std::span<const std::size_t> cu_seqlens) {
  require_input(embeddings);
  // Validates the boundaries.
  segment_starts(BlockDiagonal{{cu_seqlens.begin(), cu_seqlens.end()}}, embeddings.rows());

  const auto d = embeddings.cols();
  Embeddings out(embeddings.rows(), d);
  for (std::size_t s = 0; s + 1 < cu_seqlens.size(); ++s) {
    const auto lo = cu_seqlens[s];
    const auto len = cu_seqlens[s + 1] - lo;
    Embeddings piece(len, d);
    for (std::size_t i = 0; i < len; ++i) {
      std::copy_n(embeddings.row(lo + i).begin(), d, piece.row(i).begin());
    }
    const auto att = causal_attention(piece, FullCausal{});
    for (std::size_t i = 0; i < len; ++i) {
      std::copy_n(att.row(i).begin(), d, out.row(lo + i).begin());
    }
  }
  return out;
}

double max_abs_diff(const Embeddings& a, const Embeddings& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("cannot compare attention outputs of different shapes");
  }
  double worst = 0.0;
  const auto ca = a.cells();
  const auto cb = b.cells();
  for (std::size_t i = 0; i < ca.size(); ++i) worst = std::max(worst, std::abs(ca[i] - cb[i]));
  return worst;
}

std::vector<std::size_t> row_boundaries(const CollatedBatch& batch, std::size_t r) {
  if (batch.cu_seqlens()) return *batch.cu_seqlens();

  std::size_t occupied = batch.cols();
  if (batch.attention_mask()) {
    const auto mask = batch.attention_mask()->row(r);
    occupied = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1));
    if (!std::all_of(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(occupied),
                     [](std::uint8_t v) { return v == 1; })) {
      throw ValidationError(fmt::format("attention mask of row {} is not right-padded", r));
    }
    if (occupied == 0) throw ValidationError(fmt::format("row {} has no real tokens", r));
  }
  if (batch.position_ids()) return derive_cu_seqlens(batch.position_ids()->row(r), occupied);
  if (batch.attention_mask()) return {0, occupied};
  return {};
}

ContaminationReport cross_contamination_report(const CollatedBatch& batch, std::size_t d,
                                               std::uint64_t seed) {
  if (d == 0) throw ValidationError("embedding width must be >= 1");
  const auto rows = batch.rows();
  std::vector<std::vector<std::size_t>> bounds(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    bounds[r] = row_boundaries(batch, r);
    if (bounds[r].empty()) {
      throw ValidationError(
          fmt::format("row {} carries no position_ids, cu_seqlens or attention_mask", r));
    }
  }

  std::vector<double> block(rows, 0.0);
  std::vector<double> naive(rows, 0.0);
  parallel_for(rows, [&](std::size_t r) {
    const auto occupied = bounds[r].back();
    const auto e = embed(batch.input_ids().row(r).first(occupied), d, seed);
    const auto reference = independent_attention(e, bounds[r]);
    block[r] = max_abs_diff(causal_attention(e, BlockDiagonal{bounds[r]}), reference);
    naive[r] = max_abs_diff(causal_attention(e, FullCausal{}), reference);
  });

  ContaminationReport report;
  report.rows = rows;
  report.blockdiag_max_diff = *std::max_element(block.begin(), block.end());
  report.naive_max_diff = *std::max_element(naive.begin(), naive.end());
  return report;
}

}  // namespace packbench
