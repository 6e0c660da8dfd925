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

#include "packbench/error.hpp"
#include "packbench/method.hpp"
#include "packbench/types.hpp"
#include "support/oracles.hpp"

namespace packbench {
namespace {

TEST(TokenSequence, RejectsEmptyAndNegative) {
  EXPECT_THROW(TokenSequence(0, {}), ValidationError);
  EXPECT_THROW(TokenSequence(0, {1, -2}), ValidationError);
  const TokenSequence s(7, {1, 2, 3});
  EXPECT_EQ(s.id(), 7u);
  EXPECT_EQ(s.length(), 3u);
}

TEST(Dataset, RejectsDuplicateIds) {
  std::vector<TokenSequence> seqs{TokenSequence(1, {1}), TokenSequence(1, {2})};
  EXPECT_THROW(Dataset{std::move(seqs)}, ValidationError);
}

TEST(Dataset, LookupById) {
  const Dataset ds({TokenSequence(5, {1, 2}), TokenSequence(2, {3})});
  EXPECT_TRUE(ds.contains(5));
  EXPECT_FALSE(ds.contains(0));
  EXPECT_EQ(ds.by_id(2).length(), 1u);
  EXPECT_THROW(ds.by_id(9), ValidationError);
}

TEST(DatasetTotalTokens, Examples) {
  EXPECT_EQ(dataset_total_tokens(Dataset{}), 0u);
  EXPECT_EQ(dataset_total_tokens(testing::golden_dataset()), 28u);
  EXPECT_EQ(dataset_total_tokens(testing::dataset_from_lengths(std::vector<std::size_t>(1000, 7))),
            7000u);
}

TEST(TruncateDataset, KeepsPrefix) {
  const auto ds = truncate_dataset(testing::golden_dataset(), 5);
  EXPECT_EQ(ds[0].length(), 4u);
  EXPECT_EQ(ds[1].length(), 5u);
  EXPECT_EQ(ds[3].tokens()[4], 44);
}

TEST(Segment, WholeOrBroken) {
  EXPECT_TRUE((Segment{0, 0, 4}.is_whole(4)));
  EXPECT_FALSE((Segment{0, 1, 4}.is_whole(4)));
  EXPECT_FALSE((Segment{0, 0, 3}.is_whole(4)));
}

TEST(Pack, CapacityAccounting) {
  Pack p(10);
  p.append({0, 0, 4});
  p.append({1, 2, 8});
  EXPECT_EQ(p.used(), 10u);
  EXPECT_EQ(p.free(), 0u);
  EXPECT_FALSE(p.fits(1));
  EXPECT_THROW(p.append({2, 0, 1}), ValidationError);
  EXPECT_THROW(Pack(4).append({0, 3, 3}), ValidationError);
  EXPECT_THROW(Pack(4, {{0, 0, 5}}), ValidationError);
}

TEST(CollatedBatch, RejectsMismatchedShapes) {
  Grid<TokenId> ids(1, 3, 1);
  EXPECT_THROW(CollatedBatch(ids, Grid<TokenId>(1, 2)), ValidationError);
  EXPECT_THROW(CollatedBatch(ids, Grid<TokenId>(1, 3), Grid<TokenId>(2, 3)), ValidationError);
  EXPECT_THROW(CollatedBatch(ids, Grid<TokenId>(1, 3), std::nullopt, Grid<std::uint8_t>(1, 4, 1)),
               ValidationError);
}

TEST(CollatedBatch, RejectsBadPositionRuns) {
  Grid<TokenId> ids(1, 3, 1);
  Grid<TokenId> pos(1, 3);
  pos.at(0, 1) = 1;
  pos.at(0, 2) = 3;
  EXPECT_THROW(CollatedBatch(ids, Grid<TokenId>(1, 3), pos), ValidationError);
}

TEST(CollatedBatch, RejectsBadCuSeqlens) {
  Grid<TokenId> ids(1, 4, 1);
  Grid<TokenId> labels(1, 4);
  using Cu = std::vector<std::size_t>;
  EXPECT_THROW(CollatedBatch(ids, labels, std::nullopt, std::nullopt, Cu{1, 4}), ValidationError);
  EXPECT_THROW(CollatedBatch(ids, labels, std::nullopt, std::nullopt, Cu{0, 2, 2}),
               ValidationError);
  EXPECT_THROW(CollatedBatch(ids, labels, std::nullopt, std::nullopt, Cu{0, 5}), ValidationError);
  EXPECT_THROW(CollatedBatch(Grid<TokenId>(2, 4), Grid<TokenId>(2, 4), std::nullopt,
                             std::nullopt, Cu{0, 4}),
               ValidationError);
  EXPECT_NO_THROW(CollatedBatch(ids, labels, std::nullopt, std::nullopt, Cu{0, 1, 4}));
}

TEST(Method, NamesRoundTrip) {
  for (auto m : kAllMethods) EXPECT_EQ(parse_method(method_name(m)), m);
  EXPECT_EQ(parse_method("MiniBatchPacking+PosIDd"), Method::kMiniBatchPackingPosId);
  EXPECT_THROW(parse_method("Nope"), ValidationError);
}

TEST(Method, TraitsMatchMatrix) {
  struct Row {
    Method m;
    bool pos, cross, whole, unsorted;
  };
  const Row rows[] = {
      {Method::kRandomSamplingPadding, false, true, true, true},
      {Method::kGroupByLengthPadding, false, true, true, false},
      {Method::kMiniBatchPackingPosId, true, true, true, true},
      {Method::kFixedLengthPacking, false, false, false, true},
      {Method::kFixedLengthPackingPosId, true, true, false, true},
      {Method::kMultipackPosId, true, true, true, false},
      {Method::kSortedPackingPosId, true, true, true, false},
      {Method::kRandomPackingPosId, true, true, true, true},
  };
  for (const auto& r : rows) {
    const auto t = method_traits(r.m);
    EXPECT_EQ(t.position_ids, r.pos) << method_name(r.m);
    EXPECT_EQ(t.correct_cross_attention, r.cross) << method_name(r.m);
    EXPECT_EQ(t.no_broken_examples, r.whole) << method_name(r.m);
    EXPECT_EQ(t.no_sorting, r.unsorted) << method_name(r.m);
  }
}

TEST(RunConfig, Validate) {
  RunConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.effective_megabatch(), 50u * 4 * 8);
  c.gas = 0;
  EXPECT_THROW(c.validate(), ValidationError);
}

}  // namespace
}  // namespace packbench
