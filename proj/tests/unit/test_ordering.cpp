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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "packbench/ingest.hpp"
#include "packbench/ordering.hpp"
#include "support/oracles.hpp"

namespace packbench {
namespace {

bool is_permutation_of_ids(const std::vector<ExampleId>& order, const Dataset& ds) {
  std::vector<ExampleId> ids;
  for (const auto& s : ds) ids.push_back(s.id());
  return std::is_permutation(order.begin(), order.end(), ids.begin(), ids.end());
}

TEST(RandomOrder, Basics) {
  EXPECT_EQ(random_order(testing::dataset_from_lengths({3}), 1), std::vector<ExampleId>{0});
  const auto ds = testing::dataset_from_lengths(std::vector<std::size_t>(100, 2));
  EXPECT_EQ(random_order(ds, 9), random_order(ds, 9));
  EXPECT_NE(random_order(ds, 9), random_order(ds, 10));
}

TEST(RandomOrder, PermutationProperty) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto ds = generate_synthetic({seed * 3 + 1, UniformLength{1, 20}, 1, 20, seed});
    EXPECT_TRUE(is_permutation_of_ids(random_order(ds, seed), ds));
  }
}

TEST(RandomOrder, SlotFrequenciesAreUniform) {
  // Chi-squared over the n x n (id, slot) table; rows and columns are fixed
  // so there are (n-1)^2 = 16 degrees of freedom, critical value 39.25 at p = 0.001.
  constexpr std::size_t n = 5;
  constexpr std::size_t trials = 20000;
  const auto ds = testing::dataset_from_lengths(std::vector<std::size_t>(n, 1));
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < trials; ++t) {
    const auto order = random_order(ds, t);
    for (std::size_t slot = 0; slot < n; ++slot) counts[order[slot]][slot] += 1.0;
  }
  const double expected = static_cast<double>(trials) / n;
  double chi2 = 0.0;
  for (const auto& row : counts) {
    for (double c : row) chi2 += (c - expected) * (c - expected) / expected;
  }
  EXPECT_LT(chi2, 39.25);
}

TEST(SortedOrder, Examples) {
  EXPECT_EQ(sorted_order(testing::golden_dataset()), (std::vector<ExampleId>{3, 1, 2, 0}));
  EXPECT_EQ(sorted_order(testing::dataset_from_lengths({5, 5, 5})),
            (std::vector<ExampleId>{0, 1, 2}));
  EXPECT_EQ(sorted_order(testing::dataset_from_lengths({9, 6, 6, 1})),
            (std::vector<ExampleId>{0, 1, 2, 3}));
}

TEST(SortedOrder, NonIncreasingProperty) {
  const auto ds = generate_synthetic(flan_like(3000, 3));
  const auto order = sorted_order(ds);
  ASSERT_TRUE(is_permutation_of_ids(order, ds));
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto a = ds.by_id(order[i - 1]).length();
    const auto b = ds.by_id(order[i]).length();
    EXPECT_GE(a, b);
    if (a == b) {
      EXPECT_LT(order[i - 1], order[i]);
    }
  }
}

TEST(GroupByLength, SingleMegabatchSortsTheShuffle) {
  const auto ds = generate_synthetic({40, UniformLength{1, 10}, 1, 10, 2});
  const auto order = group_by_length_order(ds, 40, 11);
  auto expect = random_order(ds, 11);
  std::stable_sort(expect.begin(), expect.end(), [&](ExampleId a, ExampleId b) {
    const auto la = ds.by_id(a).length();
    const auto lb = ds.by_id(b).length();
    return la != lb ? la > lb : a < b;
  });
  EXPECT_EQ(order, expect);
  EXPECT_EQ(group_by_length_order(ds, 1000, 11), expect);
}

TEST(GroupByLength, MegabatchOneIsRandomOrder) {
  const auto ds = generate_synthetic({40, UniformLength{1, 10}, 1, 10, 2});
  EXPECT_EQ(group_by_length_order(ds, 1, 5), random_order(ds, 5));
}

TEST(GroupByLength, HalvesNonIncreasing) {
  const auto ds = testing::dataset_from_lengths({1, 2, 3, 4, 5, 6, 7, 8});
  const auto groups = group_by_length_megabatches(ds, 4, 3);
  ASSERT_EQ(groups.size(), 2u);
  for (const auto& g : groups) {
    ASSERT_EQ(g.size(), 4u);
    for (std::size_t i = 1; i < g.size(); ++i) {
      EXPECT_GE(ds.by_id(g[i - 1]).length(), ds.by_id(g[i]).length());
    }
  }
  EXPECT_EQ(ds.by_id(groups[0][0]).length(), 8u);
}

TEST(GroupByLength, PermutationAndLongestFirst) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = generate_synthetic({257, UniformLength{1, 500}, 1, 500, seed});
    const auto order = group_by_length_order(ds, 16, seed);
    ASSERT_TRUE(is_permutation_of_ids(order, ds));
    std::size_t longest = 0;
    for (const auto& s : ds) longest = std::max(longest, s.length());
    EXPECT_EQ(ds.by_id(order[0]).length(), longest);
  }
}

}  // namespace
}  // namespace packbench
