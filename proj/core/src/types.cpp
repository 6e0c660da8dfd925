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

#include "packbench/types.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "packbench/error.hpp"

namespace packbench {

TokenSequence::TokenSequence(ExampleId id, std::vector<TokenId> tokens)
    : id_(id), tokens_(std::move(tokens)) {
  if (tokens_.empty()) {
    throw ValidationError("example " + std::to_string(id_) + " has zero length");
  }
  if (std::any_of(tokens_.begin(), tokens_.end(), [](TokenId t) { return t < 0; })) {
    throw ValidationError("example " + std::to_string(id_) + " has a negative token id");
  }
}

Dataset::Dataset(std::vector<TokenSequence> sequences) : sequences_(std::move(sequences)) {
  index_.reserve(sequences_.size());
  for (std::size_t i = 0; i < sequences_.size(); ++i) {
    if (!index_.emplace(sequences_[i].id(), i).second) {
      throw ValidationError("duplicate example id " + std::to_string(sequences_[i].id()));
    }
  }
}

const TokenSequence& Dataset::by_id(ExampleId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ValidationError("unknown example id " + std::to_string(id));
  }
  return sequences_[it->second];
}

std::size_t dataset_total_tokens(const Dataset& dataset) {
  return std::accumulate(dataset.begin(), dataset.end(), std::size_t{0},
                         [](std::size_t acc, const TokenSequence& s) { return acc + s.length(); });
}

Dataset truncate_dataset(const Dataset& dataset, std::size_t max_length) {
  if (max_length == 0) throw ValidationError("truncation length must be >= 1");
  std::vector<TokenSequence> out;
  out.reserve(dataset.size());
  for (const auto& seq : dataset) {
    if (seq.length() <= max_length) {
      out.push_back(seq);
    } else {
      auto tokens = seq.tokens().first(max_length);
      out.emplace_back(seq.id(), std::vector<TokenId>(tokens.begin(), tokens.end()));
    }
  }
  return Dataset(std::move(out));
}

Pack::Pack(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("pack capacity must be >= 1");
}

Pack::Pack(std::size_t capacity, std::vector<Segment> segments) : Pack(capacity) {
  segments_.reserve(segments.size());
  for (const auto& s : segments) append(s);
}

void Pack::append(const Segment& segment) {
  if (segment.end <= segment.start) {
    throw ValidationError("empty segment for example " + std::to_string(segment.example_id));
  }
  if (!fits(segment.length())) {
    throw ValidationError("segment of " + std::to_string(segment.length()) +
                          " tokens overflows pack (" + std::to_string(used_) + "/" +
                          std::to_string(capacity_) + ")");
  }
  segments_.push_back(segment);
  used_ += segment.length();
}

namespace {

template <typename T>
void require_shape(const Grid<T>& grid, std::size_t rows, std::size_t cols, const char* name) {
  if (grid.rows() != rows || grid.cols() != cols) {
    throw ValidationError(std::string(name) + " shape (" + std::to_string(grid.rows()) + "," +
                          std::to_string(grid.cols()) + ") does not match input_ids (" +
                          std::to_string(rows) + "," + std::to_string(cols) + ")");
  }
}

}  // namespace

CollatedBatch::CollatedBatch(Grid<TokenId> input_ids, Grid<TokenId> labels,
                             std::optional<Grid<TokenId>> position_ids,
                             std::optional<Grid<std::uint8_t>> attention_mask,
                             std::optional<std::vector<std::size_t>> cu_seqlens)
    : input_ids_(std::move(input_ids)),
      labels_(std::move(labels)),
      position_ids_(std::move(position_ids)),
      attention_mask_(std::move(attention_mask)),
      cu_seqlens_(std::move(cu_seqlens)) {
  const auto rows = input_ids_.rows();
  const auto cols = input_ids_.cols();
  if (rows == 0 || cols == 0) throw ValidationError("collated batch must be non-empty");
  require_shape(labels_, rows, cols, "labels");

  if (position_ids_) {
    require_shape(*position_ids_, rows, cols, "position_ids");
    for (std::size_t r = 0; r < rows; ++r) {
      auto row = position_ids_->row(r);
      for (std::size_t c = 0; c < cols; ++c) {
        if (row[c] < 0) throw ValidationError("negative position id");
        if (c > 0 && row[c] != 0 && row[c] != row[c - 1] + 1) {
          throw ValidationError("position ids in row " + std::to_string(r) +
                                " are not restart-delimited runs at column " + std::to_string(c));
        }
      }
    }
  }
  if (attention_mask_) {
    require_shape(*attention_mask_, rows, cols, "attention_mask");
    for (auto v : attention_mask_->cells()) {
      if (v > 1) throw ValidationError("attention_mask must be 0/1");
    }
  }
  if (cu_seqlens_) {
    const auto& cu = *cu_seqlens_;
    if (rows != 1) throw ValidationError("cu_seqlens requires a single-row batch");
    if (cu.size() < 2 || cu.front() != 0) throw ValidationError("cu_seqlens must start at 0");
    for (std::size_t i = 1; i < cu.size(); ++i) {
      if (cu[i] <= cu[i - 1]) throw ValidationError("cu_seqlens must be strictly increasing");
    }
    if (cu.back() > cols) throw ValidationError("cu_seqlens exceeds row length");
  }
}

}  // namespace packbench
