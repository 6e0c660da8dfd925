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
#include <vector>

#include "packbench/types.hpp"

namespace packbench {

// Every ordering is a permutation of the dataset's example ids. Ties on
// length are always broken by ascending id.

// Uniform shuffle, deterministic for a fixed seed.
std::vector<ExampleId> random_order(const Dataset& dataset, std::uint64_t seed);

// Longest first.
std::vector<ExampleId> sorted_order(const Dataset& dataset);

// Length-grouped sampling: shuffle, cut into consecutive megabatches, sort
// each megabatch longest first, then move the megabatch holding the longest
// example to the front. With megabatch == 1 no grouping happens and the
// shuffle is returned unchanged.
std::vector<std::vector<ExampleId>> group_by_length_megabatches(const Dataset& dataset,
                                                                std::size_t megabatch,
                                                                std::uint64_t seed);
std::vector<ExampleId> group_by_length_order(const Dataset& dataset, std::size_t megabatch,
                                             std::uint64_t seed);

}  // namespace packbench
