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

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace packbench {

// The eight batching strategies compared by the toolkit.
enum class Method {
  kRandomSamplingPadding,
  kGroupByLengthPadding,
  kMiniBatchPackingPosId,
  kFixedLengthPacking,
  kFixedLengthPackingPosId,
  kMultipackPosId,
  kSortedPackingPosId,
  kRandomPackingPosId,
};

inline constexpr std::array<Method, 8> kAllMethods = {
    Method::kRandomSamplingPadding,   Method::kGroupByLengthPadding,
    Method::kMiniBatchPackingPosId,   Method::kFixedLengthPacking,
    Method::kFixedLengthPackingPosId, Method::kMultipackPosId,
    Method::kSortedPackingPosId,      Method::kRandomPackingPosId,
};

// Expected behaviour of a method: whether it feeds position ids to attention,
// masks example boundaries correctly, keeps examples whole, and leaves the
// dataset unsorted.
struct MethodTraits {
  bool position_ids;
  bool correct_cross_attention;
  bool no_broken_examples;
  bool no_sorting;
};

// How a method turns the dataset into rank-microbatches.
enum class UnitKind {
  kPaddedMinibatch,  // bs whole examples, one padded row each
  kFlatMinibatch,    // bs whole examples flattened into one row
  kPackRows,         // bs packs of msl tokens, one row each
  kFlatPack,         // one pack of bs*msl tokens in one row
};

std::string_view method_name(Method method);
// Accepts the canonical names plus the "PosIDd" spelling. Throws ValidationError.
Method parse_method(std::string_view name);
MethodTraits method_traits(Method method);
UnitKind unit_kind(Method method);
bool is_offline(Method method);

struct RunConfig {
  std::size_t bs = 4;
  std::size_t msl = 4096;
  std::size_t gas = 2;
  std::size_t world = 8;
  std::uint64_t seed = 42;
  Method method = Method::kRandomSamplingPadding;
  // GroupByLength megabatch size; 0 selects 50 * bs * world.
  std::size_t megabatch = 0;

  // Throws ValidationError when any of bs, msl, gas, world is zero.
  void validate() const;
  std::size_t effective_megabatch() const { return megabatch ? megabatch : 50 * bs * world; }

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace packbench
