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
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace packbench {

using TokenId = std::int64_t;
using ExampleId = std::size_t;

inline constexpr TokenId kIgnoreLabel = -100;

// One tokenized training example. Immutable once built.
class TokenSequence {
 public:
  // Throws ValidationError on an empty or negative token list.
  TokenSequence(ExampleId id, std::vector<TokenId> tokens);

  ExampleId id() const noexcept { return id_; }
  std::span<const TokenId> tokens() const noexcept { return tokens_; }
  std::size_t length() const noexcept { return tokens_.size(); }

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  ExampleId id_;
  std::vector<TokenId> tokens_;
};

// An ordered collection of examples with unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<TokenSequence> sequences);

  std::size_t size() const noexcept { return sequences_.size(); }
  bool empty() const noexcept { return sequences_.empty(); }

  const TokenSequence& operator[](std::size_t index) const { return sequences_[index]; }
  auto begin() const noexcept { return sequences_.begin(); }
  auto end() const noexcept { return sequences_.end(); }

  bool contains(ExampleId id) const { return index_.contains(id); }
  // Throws ValidationError for an unknown id.
  const TokenSequence& by_id(ExampleId id) const;

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.sequences_ == b.sequences_;
  }

 private:
  std::vector<TokenSequence> sequences_;
  std::unordered_map<ExampleId, std::size_t> index_;
};

std::size_t dataset_total_tokens(const Dataset& dataset);

// Truncates every example longer than `max_length` tokens to its prefix.
Dataset truncate_dataset(const Dataset& dataset, std::size_t max_length);

// Token range [start, end) of one example placed in a row.
struct Segment {
  ExampleId example_id = 0;
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const noexcept { return end - start; }
  bool is_whole(std::size_t example_length) const noexcept {
    return start == 0 && end == example_length;
  }

  friend bool operator==(const Segment&, const Segment&) = default;
};

// Segments assigned to one output row, bounded by a token capacity.
class Pack {
 public:
  explicit Pack(std::size_t capacity);
  Pack(std::size_t capacity, std::vector<Segment> segments);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t used() const noexcept { return used_; }
  std::size_t free() const noexcept { return capacity_ - used_; }
  bool fits(std::size_t tokens) const noexcept { return tokens <= free(); }
  std::span<const Segment> segments() const noexcept { return segments_; }

  // Throws ValidationError if the segment is empty or overflows capacity.
  void append(const Segment& segment);

  friend bool operator==(const Pack&, const Pack&) = default;

 private:
  std::size_t capacity_;
  std::size_t used_ = 0;
  std::vector<Segment> segments_;
};

// Dense row-major rows x cols grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& at(std::size_t r, std::size_t c) { return cells_[r * cols_ + c]; }
  const T& at(std::size_t r, std::size_t c) const { return cells_[r * cols_ + c]; }

  std::span<T> row(std::size_t r) { return {cells_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const { return {cells_.data() + r * cols_, cols_}; }
  std::span<const T> cells() const noexcept { return cells_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> cells_;
};

// Materialized tensors for one collated unit.
//
// All present grids share one shape. cu_seqlens is only meaningful for
// single-row batches; its last entry is the occupied (non-pad) length.
class CollatedBatch {
 public:
  CollatedBatch(Grid<TokenId> input_ids, Grid<TokenId> labels,
                std::optional<Grid<TokenId>> position_ids = std::nullopt,
                std::optional<Grid<std::uint8_t>> attention_mask = std::nullopt,
                std::optional<std::vector<std::size_t>> cu_seqlens = std::nullopt);

  std::size_t rows() const noexcept { return input_ids_.rows(); }
  std::size_t cols() const noexcept { return input_ids_.cols(); }

  const Grid<TokenId>& input_ids() const noexcept { return input_ids_; }
  const Grid<TokenId>& labels() const noexcept { return labels_; }
  const std::optional<Grid<TokenId>>& position_ids() const noexcept { return position_ids_; }
  const std::optional<Grid<std::uint8_t>>& attention_mask() const noexcept {
    return attention_mask_;
  }
  const std::optional<std::vector<std::size_t>>& cu_seqlens() const noexcept {
    return cu_seqlens_;
  }

  friend bool operator==(const CollatedBatch&, const CollatedBatch&) = default;

 private:
  Grid<TokenId> input_ids_;
  Grid<TokenId> labels_;
  std::optional<Grid<TokenId>> position_ids_;
  std::optional<Grid<std::uint8_t>> attention_mask_;
  std::optional<std::vector<std::size_t>> cu_seqlens_;
};

}  // namespace packbench
