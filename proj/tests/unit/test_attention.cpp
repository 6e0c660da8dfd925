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

#include <cmath>
#include <random>

#include "packbench/attention.hpp"
#include "packbench/collate.hpp"
#include "packbench/error.hpp"
#include "support/oracles.hpp"

namespace packbench {
namespace {

CollatedBatch golden_batch() {
  const auto ds = testing::golden_dataset();
  const std::vector<TokenSequence> ex(ds.begin(), ds.end());
  return padding_free_collate(ex);
}

TEST(Embed, Deterministic) {
  const std::vector<TokenId> ids{5, 9, 5};
  const auto e = embed(ids, 16, 3);
  for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(e.at(0, k), e.at(2, k));
  EXPECT_EQ(e, embed(ids, 16, 3));
  EXPECT_NE(e, embed(ids, 16, 4));
}

TEST(Embed, RangeAndDistinctTokens) {
  for (TokenId t = 0; t < 2000; ++t) {
    const double v = embed_value(t, 0, 1);
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
  const std::vector<TokenId> two{1, 2};
  const auto e = embed(two, 64, 1);
  bool differ = false;
  for (std::size_t k = 0; k < 64; ++k) differ |= e.at(0, k) != e.at(1, k);
  EXPECT_TRUE(differ);
}

TEST(CausalAttention, MatchesAdditiveMaskOracle) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto p = testing::random_pack(rng, 1, 6, 20);
    const auto e = embed(p.tokens, 8, 11);
    const auto block = causal_attention(e, BlockDiagonal{p.cu_seqlens});
    EXPECT_LT(max_abs_diff(block, testing::additive_mask_attention(e, p.cu_seqlens)), 1e-9);
    const std::vector<std::size_t> whole{0, p.tokens.size()};
    EXPECT_LT(max_abs_diff(causal_attention(e, FullCausal{}),
                           testing::additive_mask_attention(e, whole)),
              1e-9);
  }
}

TEST(CausalAttention, SingleSegmentAndSingleToken) {
  const auto e = embed(golden_batch().input_ids().row(0), 32, 1);
  const std::vector<std::size_t> whole{0, e.rows()};
  EXPECT_EQ(causal_attention(e, FullCausal{}), causal_attention(e, BlockDiagonal{whole}));
  const std::vector<TokenId> one{7};
  const auto e1 = embed(one, 5, 2);
  EXPECT_EQ(causal_attention(e1, FullCausal{}), e1);
}

TEST(CausalAttention, RejectsBadBoundaries) {
  const auto e = embed(golden_batch().input_ids().row(0), 4, 1);
  EXPECT_THROW(causal_attention(e, BlockDiagonal{{0, 10}}), ValidationError);
  EXPECT_THROW(causal_attention(e, BlockDiagonal{{0, 10, 10, 28}}), ValidationError);
  EXPECT_THROW(causal_attention(Embeddings{}, FullCausal{}), ValidationError);
}

TEST(AttentionWeights, NormalizedAndMasked) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto p = testing::random_pack(rng, 2, 5, 12);
    const auto e = embed(p.tokens, 16, 4);
    const MaskMode mask = BlockDiagonal{p.cu_seqlens};
    for (std::size_t s = 0; s + 1 < p.cu_seqlens.size(); ++s) {
      for (auto q = p.cu_seqlens[s]; q < p.cu_seqlens[s + 1]; ++q) {
        const auto w = attention_weights(e, mask, q);
        ASSERT_EQ(w.size(), q + 1);
        double total = 0.0;
        for (std::size_t j = 0; j <= q; ++j) {
          total += w[j];
          if (j < p.cu_seqlens[s]) {
            EXPECT_EQ(w[j], 0.0);
          }
        }
        EXPECT_NEAR(total, 1.0, 1e-12);
      }
    }
  }
}

TEST(CausalAttention, FutureTokensDoNotMatter) {
  std::mt19937_64 rng(13);
  const auto p = testing::random_pack(rng, 3, 3, 10);
  auto e = embed(p.tokens, 16, 2);
  const auto before = causal_attention(e, FullCausal{});
  const auto cut = e.rows() / 2;
  for (auto i = cut; i < e.rows(); ++i) {
    for (std::size_t k = 0; k < e.cols(); ++k) e.at(i, k) += 0.5;
  }
  const auto after = causal_attention(e, FullCausal{});
  for (std::size_t i = 0; i < cut; ++i) {
    for (std::size_t k = 0; k < e.cols(); ++k) EXPECT_EQ(before.at(i, k), after.at(i, k));
  }
}

TEST(CausalAttention, SegmentsAreIsolated) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const auto p = testing::random_pack(rng, 3, 6, 10);
    auto e = embed(p.tokens, 8, 9);
    const MaskMode mask = BlockDiagonal{p.cu_seqlens};
    const auto before = causal_attention(e, mask);
    const auto lo = p.cu_seqlens[1];
    const auto hi = p.cu_seqlens[2];
    for (auto i = lo; i < hi; ++i) {
      for (std::size_t k = 0; k < e.cols(); ++k) e.at(i, k) = -e.at(i, k);
    }
    const auto after = causal_attention(e, mask);
    for (std::size_t i = 0; i < e.rows(); ++i) {
      if (i >= lo && i < hi) continue;
      for (std::size_t k = 0; k < e.cols(); ++k) EXPECT_EQ(before.at(i, k), after.at(i, k));
    }
  }
}

TEST(IndependentAttention, EqualsBlockDiagonal) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    const auto p = testing::random_pack(rng, 2, 8, 64);
    const auto e = embed(p.tokens, 32, 3);
    EXPECT_LT(max_abs_diff(causal_attention(e, BlockDiagonal{p.cu_seqlens}),
                           independent_attention(e, p.cu_seqlens)),
              1e-9);
  }
}

TEST(CrossContamination, GoldenPack) {
  const auto b = with_cu_seqlens(golden_batch(), 28);
  const auto r = cross_contamination_report(b, 32, 42);
  EXPECT_LT(r.blockdiag_max_diff, 1e-6);
  EXPECT_GT(r.naive_max_diff, 1e-3);
  EXPECT_TRUE(r.pass());
  EXPECT_EQ(r.rows, 1u);
  // Position ids alone are enough boundary information.
  const auto from_pos = cross_contamination_report(golden_batch(), 32, 42);
  EXPECT_EQ(from_pos.blockdiag_max_diff, r.blockdiag_max_diff);
}

TEST(CrossContamination, NaiveDiffOnlyAfterFirstSegment) {
  const auto b = golden_batch();
  const auto e = embed(b.input_ids().row(0), 32, 42);
  const std::vector<std::size_t> cu{0, 4, 12, 17, 28};
  const auto naive = causal_attention(e, FullCausal{});
  const auto ref = independent_attention(e, cu);
  double first = 0.0;
  double rest = 0.0;
  for (std::size_t i = 0; i < e.rows(); ++i) {
    for (std::size_t k = 0; k < e.cols(); ++k) {
      double& worst = i < 4 ? first : rest;
      worst = std::max(worst, std::abs(naive.at(i, k) - ref.at(i, k)));
    }
  }
  EXPECT_EQ(first, 0.0);
  EXPECT_GT(rest, 1e-3);
}

TEST(CrossContamination, SingleExampleAndIdenticalPair) {
  const std::vector<TokenSequence> one{TokenSequence(0, {4, 5, 6, 7})};
  const auto r = cross_contamination_report(padding_free_collate(one), 16, 1);
  EXPECT_LT(r.blockdiag_max_diff, 1e-6);
  EXPECT_LT(r.naive_max_diff, 1e-6);

  const std::vector<TokenSequence> pair{TokenSequence(0, {4, 5, 6}), TokenSequence(1, {4, 5, 6})};
  const auto b = padding_free_collate(pair);
  const auto e = embed(b.input_ids().row(0), 16, 1);
  const std::vector<std::size_t> cu{0, 3, 6};
  const auto naive = causal_attention(e, FullCausal{});
  const auto block = causal_attention(e, BlockDiagonal{cu});
  const auto ind = independent_attention(e, cu);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t k = 0; k < 16; ++k) {
      EXPECT_EQ(naive.at(i, k), block.at(i, k));
      EXPECT_EQ(block.at(i, k), ind.at(i, k));
    }
  }
}

TEST(CrossContamination, PaddedRowsUseMask) {
  const auto ds = testing::golden_dataset();
  const std::vector<TokenSequence> ex(ds.begin(), ds.end());
  const auto r = cross_contamination_report(pad_collate(ex, 0), 16, 1);
  EXPECT_EQ(r.rows, 4u);
  EXPECT_LT(r.blockdiag_max_diff, 1e-6);
  EXPECT_LT(r.naive_max_diff, 1e-6);
}

TEST(CrossContamination, MissingBoundariesThrow) {
  const auto ds = testing::golden_dataset();
  const auto b = packed_collate(Pack(16, {{0, 0, 4}, {2, 0, 5}}), ds, false);
  EXPECT_TRUE(row_boundaries(b, 0).empty());
  EXPECT_THROW(cross_contamination_report(b, 8, 1), ValidationError);
}

TEST(RowBoundaries, Sources) {
  const auto b = golden_batch();
  EXPECT_EQ(row_boundaries(b, 0), (std::vector<std::size_t>{0, 4, 12, 17, 28}));
  const auto ds = testing::golden_dataset();
  const auto packed = packed_collate(Pack(12, {{0, 0, 4}, {2, 0, 5}}), ds, true);
  EXPECT_EQ(row_boundaries(packed, 0), (std::vector<std::size_t>{0, 4, 9}));
  const std::vector<TokenSequence> ex(ds.begin(), ds.end());
  EXPECT_EQ(row_boundaries(pad_collate(ex, 0), 2), (std::vector<std::size_t>{0, 5}));
}

}  // namespace
}  // namespace packbench
