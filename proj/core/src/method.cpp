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

#include "packbench/method.hpp"

#include <string>

#include "packbench/error.hpp"

namespace packbench {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kRandomSamplingPadding: return "RandomSampling+Padding";
    case Method::kGroupByLengthPadding: return "GroupByLength+Padding";
    case Method::kMiniBatchPackingPosId: return "MiniBatchPacking+PosID";
    case Method::kFixedLengthPacking: return "FixedLengthPacking";
    case Method::kFixedLengthPackingPosId: return "FixedLengthPacking+PosID";
    case Method::kMultipackPosId: return "Multipack+PosID";
    case Method::kSortedPackingPosId: return "SortedPacking+PosID";
    case Method::kRandomPackingPosId: return "RandomPacking+PosID";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (auto m : kAllMethods) {
    if (method_name(m) == name) return m;
  }
  if (name == "MiniBatchPacking+PosIDd") return Method::kMiniBatchPackingPosId;
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

MethodTraits method_traits(Method method) {
  switch (method) {
    case Method::kRandomSamplingPadding: return {false, true, true, true};
    case Method::kGroupByLengthPadding: return {false, true, true, false};
    case Method::kMiniBatchPackingPosId: return {true, true, true, true};
    case Method::kFixedLengthPacking: return {false, false, false, true};
    case Method::kFixedLengthPackingPosId: return {true, true, false, true};
    case Method::kMultipackPosId: return {true, true, true, false};
    case Method::kSortedPackingPosId: return {true, true, true, false};
    case Method::kRandomPackingPosId: return {true, true, true, true};
  }
  return {};
}

UnitKind unit_kind(Method method) {
  switch (method) {
    case Method::kRandomSamplingPadding:
    case Method::kGroupByLengthPadding: return UnitKind::kPaddedMinibatch;
    case Method::kMiniBatchPackingPosId: return UnitKind::kFlatMinibatch;
    case Method::kFixedLengthPacking: return UnitKind::kPackRows;
    default: return UnitKind::kFlatPack;
  }
}

bool is_offline(Method method) {
  auto kind = unit_kind(method);
  return kind == UnitKind::kPackRows || kind == UnitKind::kFlatPack;
}

void RunConfig::validate() const {
  if (bs == 0 || msl == 0 || gas == 0 || world == 0) {
    throw ValidationError("bs, msl, gas and world must all be >= 1");
  }
}

}  // namespace packbench
