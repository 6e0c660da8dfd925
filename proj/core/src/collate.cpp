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

#include "packbench/collate.hpp"

#include <algorithm>
#include <string>

#include <fmt/format.h>

#include "packbench/error.hpp"

namespace packbench {

namespace {

using SequenceRefs = std::vector<const TokenSequence*>;

SequenceRefs refs_of(std::span<const TokenSequence> examples) {
  SequenceRefs refs;
  refs.reserve(examples.size());
  for (const auto& e : examples) refs.push_back(&e);
  return refs;
}

SequenceRefs refs_of(std::span<const ExampleId> ids, const Dataset& dataset) {
  SequenceRefs refs;
  refs.reserve(ids.size());
  for (auto id : ids) refs.push_back(&dataset.by_id(id));
  return refs;
}

CollatedBatch pad_refs(const SequenceRefs& examples, TokenId pad_id) {
  if (examples.empty()) throw ValidationError("cannot collate an empty batch");
  std::size_t longest = 0;
  for (const auto* e : examples) longest = std::max(longest, e->length());

  const auto rows = examples.size();
  Grid<TokenId> input_ids(rows, longest, pad_id);
  Grid<TokenId> labels(rows, longest, kIgnoreLabel);
  Grid<std::uint8_t> mask(rows, longest, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto tokens = examples[r]->tokens();
    for (std::size_t c = 0; c < tokens.size(); ++c) {
      input_ids.at(r, c) = tokens[c];
      labels.at(r, c) = c == 0 ? kIgnoreLabel : tokens[c];
      mask.at(r, c) = 1;
    }
  }
  return CollatedBatch(std::move(input_ids), std::move(labels), std::nullopt, std::move(mask));
}

CollatedBatch flatten_refs(const SequenceRefs& examples) {
  if (examples.empty()) throw ValidationError("cannot collate an empty batch");
  std::size_t total = 0;
  for (const auto* e : examples) total += e->length();

  Grid<TokenId> input_ids(1, total);
  Grid<TokenId> labels(1, total);
  Grid<TokenId> positions(1, total);
  std::size_t col = 0;
  for (const auto* e : examples) {
    const auto tokens = e->tokens();
    for (std::size_t k = 0; k < tokens.size(); ++k, ++col) {
      input_ids.at(0, col) = tokens[k];
      labels.at(0, col) = k == 0 ? kIgnoreLabel : tokens[k];
      positions.at(0, col) = static_cast<TokenId>(k);
    }
  }
  return CollatedBatch(std::move(input_ids), std::move(labels), std::move(positions));
}

// Fills row `r` from `pack`; returns the segment boundaries.
std::vector<std::size_t> fill_pack_row(const Pack& pack, const Dataset& dataset, std::size_t r,
                                       Grid<TokenId>& input_ids, Grid<TokenId>& labels,
                                       Grid<TokenId>* positions) {
  std::vector<std::size_t> bounds{0};
  std::size_t col = 0;
  for (const auto& seg : pack.segments()) {
    const auto tokens = dataset.by_id(seg.example_id).tokens();
    if (seg.end > tokens.size()) {
      throw ValidationError(fmt::format("segment [{}, {}) beyond example {} of length {}",
                                        seg.start, seg.end, seg.example_id, tokens.size()));
    }
    for (std::size_t k = seg.start; k < seg.end; ++k, ++col) {
      input_ids.at(r, col) = tokens[k];
      labels.at(r, col) = k == 0 ? kIgnoreLabel : tokens[k];
      if (positions) positions->at(r, col) = static_cast<TokenId>(k);
    }
    bounds.push_back(col);
  }
  return bounds;
}

}  // namespace

CollatedBatch pad_collate(std::span<const TokenSequence> examples, TokenId pad_id) {
  return pad_refs(refs_of(examples), pad_id);
}

CollatedBatch pad_collate(std::span<const ExampleId> ids, const Dataset& dataset, TokenId pad_id) {
  return pad_refs(refs_of(ids, dataset), pad_id);
}

CollatedBatch padding_free_collate(std::span<const TokenSequence> examples) {
  return flatten_refs(refs_of(examples));
}

CollatedBatch padding_free_collate(std::span<const ExampleId> ids, const Dataset& dataset) {
  return flatten_refs(refs_of(ids, dataset));
}

CollatedBatch packed_collate(const Pack& pack, const Dataset& dataset, bool with_position_ids,
                             TokenId pad_id) {
  const auto cols = pack.capacity();
  Grid<TokenId> input_ids(1, cols, pad_id);
  Grid<TokenId> labels(1, cols, kIgnoreLabel);
  if (!with_position_ids) {
    fill_pack_row(pack, dataset, 0, input_ids, labels, nullptr);
    return CollatedBatch(std::move(input_ids), std::move(labels));
  }
  Grid<TokenId> positions(1, cols, 0);
  auto bounds = fill_pack_row(pack, dataset, 0, input_ids, labels, &positions);
  std::optional<std::vector<std::size_t>> cu;
  if (bounds.size() > 1) cu = std::move(bounds);
  return CollatedBatch(std::move(input_ids), std::move(labels), std::move(positions),
                       std::nullopt, std::move(cu));
}

CollatedBatch packed_collate_rows(std::span<const Pack> packs, const Dataset& dataset,
                                  bool with_position_ids, TokenId pad_id) {
  if (packs.empty()) throw ValidationError("cannot collate an empty pack group");
  if (packs.size() == 1) return packed_collate(packs[0], dataset, with_position_ids, pad_id);
  const auto cols = packs[0].capacity();
  for (const auto& p : packs) {
    if (p.capacity() != cols) throw ValidationError("packs in one batch must share a capacity");
  }
  Grid<TokenId> input_ids(packs.size(), cols, pad_id);
  Grid<TokenId> labels(packs.size(), cols, kIgnoreLabel);
  std::optional<Grid<TokenId>> positions;
  if (with_position_ids) positions.emplace(packs.size(), cols, 0);
  for (std::size_t r = 0; r < packs.size(); ++r) {
    fill_pack_row(packs[r], dataset, r, input_ids, labels, positions ? &*positions : nullptr);
  }
  return CollatedBatch(std::move(input_ids), std::move(labels), std::move(positions));
}

std::vector<std::size_t> derive_cu_seqlens(std::span<const TokenId> position_ids,
                                           std::size_t occupied) {
  if (occupied == 0 || occupied > position_ids.size()) {
    throw ValidationError(fmt::format("occupied length {} outside [1, {}]", occupied,
                                      position_ids.size()));
  }
  std::vector<std::size_t> offsets{0};
  for (std::size_t i = 0; i < occupied; ++i) {
    const auto v = position_ids[i];
    if (v < 0) throw ValidationError(fmt::format("negative position id at {}", i));
    if (i == 0) continue;
    const auto prev = position_ids[i - 1];
    if (v == prev + 1) continue;
    if (v > prev + 1) {
      throw ValidationError(
          fmt::format("position ids jump from {} to {} at index {}", prev, v, i));
    }
    offsets.push_back(i);
  }
  offsets.push_back(occupied);
  return offsets;
}

CollatedBatch with_cu_seqlens(const CollatedBatch& batch, std::size_t occupied) {
  if (batch.rows() != 1) throw ValidationError("cu_seqlens requires a single-row batch");
  if (!batch.position_ids()) throw ValidationError("batch has no position ids");
  auto cu = derive_cu_seqlens(batch.position_ids()->row(0), occupied);
  return CollatedBatch(batch.input_ids(), batch.labels(), batch.position_ids(),
                       batch.attention_mask(), std::move(cu));
}

CollatedBatch collate_unit(const Unit& unit, Method method, const Dataset& prepared,
                           TokenId pad_id) {
  const auto kind = unit_kind(method);
  if (const auto* mb = std::get_if<Minibatch>(&unit)) {
    if (kind == UnitKind::kPaddedMinibatch) return pad_collate(mb->examples, prepared, pad_id);
    if (kind == UnitKind::kFlatMinibatch) return padding_free_collate(mb->examples, prepared);
    throw ValidationError("minibatch unit in an offline plan");
  }
  if (!is_offline(method)) throw ValidationError("pack unit in a minibatch plan");
  return packed_collate_rows(std::get<PackGroup>(unit).packs, prepared,
                             method_traits(method).position_ids, pad_id);
}

std::vector<CollatedBatch> collate_plan(const PackingPlan& plan, const Dataset& prepared,
                                        TokenId pad_id) {
  std::vector<CollatedBatch> batches;
  for (const auto& step : plan.steps) {
    for (const auto& slot : step) {
      for (const auto& unit : slot) {
        batches.push_back(collate_unit(unit, plan.config.method, prepared, pad_id));
      }
    }
  }
  return batches;
}

}  // namespace packbench
