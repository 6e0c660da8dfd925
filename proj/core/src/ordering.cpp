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

#include "packbench/ordering.hpp"

#include <algorithm>
#include <random>

#include "packbench/error.hpp"

namespace packbench {

namespace {

std::vector<ExampleId> dataset_ids(const Dataset& dataset) {
  std::vector<ExampleId> ids;
  ids.reserve(dataset.size());
  for (const auto& seq : dataset) ids.push_back(seq.id());
  return ids;
}

void sort_longest_first(std::vector<ExampleId>& ids, const Dataset& dataset) {
  std::sort(ids.begin(), ids.end(), [&](ExampleId a, ExampleId b) {
    const auto la = dataset.by_id(a).length();
    const auto lb = dataset.by_id(b).length();
    return la != lb ? la > lb : a < b;
  });
}

}  // namespace

std::vector<ExampleId> random_order(const Dataset& dataset, std::uint64_t seed) {
  auto ids = dataset_ids(dataset);
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  return ids;
}

std::vector<ExampleId> sorted_order(const Dataset& dataset) {
  auto ids = dataset_ids(dataset);
  sort_longest_first(ids, dataset);
  return ids;
}

std::vector<std::vector<ExampleId>> group_by_length_megabatches(const Dataset& dataset,
                                                                std::size_t megabatch,
                                                                std::uint64_t seed) {
  if (megabatch == 0) throw ValidationError("megabatch must be >= 1");
  const auto shuffled = random_order(dataset, seed);

  std::vector<std::vector<ExampleId>> groups;
  for (std::size_t i = 0; i < shuffled.size(); i += megabatch) {
    const auto last = std::min(shuffled.size(), i + megabatch);
    groups.emplace_back(shuffled.begin() + static_cast<std::ptrdiff_t>(i),
                        shuffled.begin() + static_cast<std::ptrdiff_t>(last));
  }
  if (megabatch == 1 || groups.empty()) return groups;

  for (auto& g : groups) sort_longest_first(g, dataset);

  // After sorting, each group's head is its longest member; the first group
  // with the global maximum wins.
  std::size_t worst = 0;
  for (std::size_t g = 1; g < groups.size(); ++g) {
    if (dataset.by_id(groups[g].front()).length() >
        dataset.by_id(groups[worst].front()).length()) {
      worst = g;
    }
  }
  std::rotate(groups.begin(), groups.begin() + static_cast<std::ptrdiff_t>(worst),
              groups.begin() + static_cast<std::ptrdiff_t>(worst) + 1);
  return groups;
}

std::vector<ExampleId> group_by_length_order(const Dataset& dataset, std::size_t megabatch,
                                             std::uint64_t seed) {
  std::vector<ExampleId> order;
  order.reserve(dataset.size());
  for (const auto& g : group_by_length_megabatches(dataset, megabatch, seed)) {
    order.insert(order.end(), g.begin(), g.end());
  }
  return order;
}

}  // namespace packbench
