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
#include <span>
#include <variant>
#include <vector>

#include "packbench/types.hpp"

namespace packbench {

// Dense float64 reference attention used to check masking semantics.
// Queries, keys and values are the embeddings themselves.

using Embeddings = Grid<double>;  // seq_len x d

// Deterministic per (token, dimension, seed), in [-1, 1).
double embed_value(TokenId token, std::size_t dim, std::uint64_t seed);
Embeddings embed(std::span<const TokenId> input_ids, std::size_t d, std::uint64_t seed);

// Position i attends to every j <= i in the row.
struct FullCausal {};
// Position i attends to j <= i within its own segment.
struct BlockDiagonal {
  std::vector<std::size_t> cu_seqlens;
};
using MaskMode = std::variant<FullCausal, BlockDiagonal>;

// softmax(Q K^T / sqrt(d)) V over the permitted positions, with
// max-subtraction. Throws ValidationError on an empty input or boundaries
// that do not describe the sequence.
Embeddings causal_attention(const Embeddings& embeddings, const MaskMode& mask);

// Normalized weights of query row `query` over keys 0..query; masked keys get 0.
std::vector<double> attention_weights(const Embeddings& embeddings, const MaskMode& mask,
                                      std::size_t query);

// Full-causal attention run on each segment by itself, concatenated.
Embeddings independent_attention(const Embeddings& embeddings,
                                 std::span<const std::size_t> cu_seqlens);

double max_abs_diff(const Embeddings& a, const Embeddings& b);

struct ContaminationReport {
  double blockdiag_max_diff = 0.0;
  double naive_max_diff = 0.0;
  std::size_t rows = 0;

  static constexpr double kTolerance = 1e-6;
  bool pass() const { return blockdiag_max_diff < kTolerance; }
};

// Segment boundaries of row `r` as the batch itself encodes them: cu_seqlens
// first, then position ids (over the mask-occupied prefix when a mask is
// present), then a right-padded attention mask as a single segment. Returns
// an empty vector when the row carries no boundary information.
std::vector<std::size_t> row_boundaries(const CollatedBatch& batch, std::size_t r);

// Compares block-diagonal and naive full-causal attention over every row
// against per-example independent attention. Throws ValidationError when a
// row has no boundary information.
ContaminationReport cross_contamination_report(const CollatedBatch& batch, std::size_t d,
                                               std::uint64_t seed);

}  // namespace packbench
