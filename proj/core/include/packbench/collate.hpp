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
#include <span>
#include <vector>

#include "packbench/packing.hpp"
#include "packbench/types.hpp"

namespace packbench {

// Labels follow the next-token convention folded into the collator: the
// first token of every example is kIgnoreLabel, as is every pad cell.

// (batch size, longest length) right-padded rows with an attention mask and
// no position ids. Throws ValidationError on an empty batch.
CollatedBatch pad_collate(std::span<const TokenSequence> examples, TokenId pad_id = 0);
CollatedBatch pad_collate(std::span<const ExampleId> ids, const Dataset& dataset,
                          TokenId pad_id = 0);

// One row holding the concatenated examples, position ids restarting at 0
// for each example, no mask and no padding.
CollatedBatch padding_free_collate(std::span<const TokenSequence> examples);
CollatedBatch padding_free_collate(std::span<const ExampleId> ids, const Dataset& dataset);

// One row of `pack.capacity()` cells: segments in order, then pad_id.
// With position ids, segment [s, e) gets positions s..e-1 (a broken tail
// keeps its original positions), pad cells get 0, and cu_seqlens marks the
// segment boundaries up to the occupied length. Without position ids the row
// carries no boundary information at all.
CollatedBatch packed_collate(const Pack& pack, const Dataset& dataset, bool with_position_ids,
                             TokenId pad_id = 0);
// One row per pack; all packs must share a capacity. Multi-row batches never
// carry cu_seqlens.
CollatedBatch packed_collate_rows(std::span<const Pack> packs, const Dataset& dataset,
                                  bool with_position_ids, TokenId pad_id = 0);

// Segment offsets [0, b1, ..., occupied] over the first `occupied` cells of a
// position-id row. A cell starts a new segment when its value is not its
// predecessor + 1 and does not exceed the predecessor. Jumps upward by more
// than one, negative values, or occupied outside [1, row size] throw
// ValidationError.
std::vector<std::size_t> derive_cu_seqlens(std::span<const TokenId> position_ids,
                                           std::size_t occupied);

// Copy of a single-row batch with cu_seqlens derived from its position ids.
CollatedBatch with_cu_seqlens(const CollatedBatch& batch, std::size_t occupied);

// Collates one plan microbatch the way `method` feeds it to the model.
// `prepared` is the truncated dataset the plan was built from.
CollatedBatch collate_unit(const Unit& unit, Method method, const Dataset& prepared,
                           TokenId pad_id = 0);

// Every microbatch of the plan in step, rank, microbatch order.
std::vector<CollatedBatch> collate_plan(const PackingPlan& plan, const Dataset& prepared,
                                        TokenId pad_id = 0);

}  // namespace packbench
