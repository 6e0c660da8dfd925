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

#include <cstdlib>
#include <sstream>

#include "packbench/error.hpp"
#include "packbench/ingest.hpp"
#include "packbench/metrics.hpp"
#include "packbench/packing.hpp"
#include "packbench/parallel.hpp"
#include "support/oracles.hpp"

namespace packbench {
namespace {

MetricsReport run(const Dataset& ds, RunConfig c, SimulationMode mode = SimulationMode::kAuto) {
  return simulate(build_plan(ds, c), ds, {mode});
}

TEST(Simulate, PaddingRowsEqualDatasetSize) {
  const auto ds = generate_synthetic({777, Lognormal{4.0, 1.0}, 1, 512, 1});
  const auto r = run(ds, {.bs = 4, .msl = 512, .gas = 2, .world = 8});
  EXPECT_EQ(r.rows, 777u);
  EXPECT_EQ(r.useful_tokens + r.pad_tokens, r.total_cells);
  EXPECT_FALSE(r.position_ids);
  EXPECT_EQ(r.broken_examples, 0u);
}

TEST(Simulate, MiniBatchHasFullUtilization) {
  const auto ds = generate_synthetic({777, Lognormal{4.0, 1.0}, 1, 512, 1});
  const auto r =
      run(ds, {.bs = 4, .msl = 512, .gas = 2, .world = 8, .method = Method::kMiniBatchPackingPosId});
  EXPECT_EQ(r.rows, 777u);
  EXPECT_EQ(r.pad_tokens, 0u);
  EXPECT_DOUBLE_EQ(r.utilization, 1.0);
  EXPECT_TRUE(r.position_ids);
}

TEST(Simulate, EqualLengthsNoPadding) {
  const auto ds = testing::dataset_from_lengths({6, 6, 6, 6});
  const auto r = run(ds, {.bs = 4, .msl = 16, .gas = 1, .world = 1});
  EXPECT_EQ(r.pad_tokens, 0u);
  EXPECT_DOUBLE_EQ(r.utilization, 1.0);
  EXPECT_EQ(r.steps, 1u);
}

TEST(Simulate, ShapesAgreeWithMaterialized) {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const auto ds = generate_synthetic({400, Lognormal{3.5, 1.2}, 1, 300, seed});
    for (auto m : kAllMethods) {
      RunConfig c{.bs = 3, .msl = 128, .gas = 2, .world = 3, .seed = seed, .method = m};
      const auto plan = build_plan(ds, c);
      EXPECT_EQ(simulate(plan, ds, {SimulationMode::kShapes}),
                simulate(plan, ds, {SimulationMode::kMaterialize}))
          << method_name(m);
    }
  }
}

TEST(Simulate, BrokenOnlyForFixedLength) {
  const auto ds = generate_synthetic({300, UniformLength{10, 90}, 1, 90, 4});
  for (auto m : kAllMethods) {
    const auto r = run(ds, {.bs = 2, .msl = 100, .gas = 1, .world = 2, .method = m});
    EXPECT_EQ(r.broken_examples == 0, method_traits(m).no_broken_examples) << method_name(m);
    EXPECT_EQ(r.position_ids, method_traits(m).position_ids) << method_name(m);
  }
}

TEST(Simulate, TokenConservationAcrossMethods) {
  const auto ds = generate_synthetic(flan_like(2000, 9));
  const auto total = dataset_total_tokens(prepare_dataset(ds, {}));
  for (auto m : kAllMethods) {
    EXPECT_EQ(run(ds, {.method = m}).useful_tokens, total) << method_name(m);
  }
}

TEST(Simulate, PerRankBalanceForMultipack) {
  const auto ds = generate_synthetic({3000, Lognormal{5.0, 1.0}, 1, 2048, 2});
  const auto r =
      run(ds, {.bs = 2, .msl = 2048, .gas = 2, .world = 4, .method = Method::kMultipackPosId});
  ASSERT_EQ(r.per_rank_tokens.size(), 4u);
  EXPECT_LT(r.imbalance, 0.1);
}

TEST(Simulate, MismatchThrows) {
  const auto ds = testing::golden_dataset();
  const auto plan = build_plan(ds, {.bs = 2, .msl = 16, .gas = 1, .world = 1});
  EXPECT_THROW(simulate(plan, testing::dataset_from_lengths({4, 8, 5})), ValidationError);
}

TEST(Simulate, DeterministicAcrossThreadCounts) {
  const auto ds = generate_synthetic({2000, Lognormal{4.5, 1.0}, 1, 1024, 6});
  const auto plan = build_plan(ds, {.bs = 4, .msl = 1024, .gas = 2, .world = 4,
                                    .method = Method::kSortedPackingPosId});
  ::setenv("PACKBENCH_THREADS", "1", 1);
  const auto one = simulate(plan, ds, {SimulationMode::kMaterialize});
  ::setenv("PACKBENCH_THREADS", "4", 1);
  const auto four = simulate(plan, ds, {SimulationMode::kMaterialize});
  ::unsetenv("PACKBENCH_THREADS");
  EXPECT_EQ(one, four);
}

TEST(ThroughputProxy, PaddingArithmetic) {
  const auto ds = testing::dataset_from_lengths({1, 100});
  const auto r = run(ds, {.bs = 2, .msl = 128, .gas = 1, .world = 1});
  EXPECT_EQ(r.total_cells, 200u);
  EXPECT_EQ(r.useful_tokens, 101u);
  EXPECT_NEAR(throughput_proxy(r, CostModel::kCells) / throughput_proxy(r, CostModel::kTokens),
              1.98, 0.005);
  const auto eq = run(testing::dataset_from_lengths({5, 5}), {.bs = 2, .msl = 8, .gas = 1, .world = 1});
  EXPECT_EQ(throughput_proxy(eq, CostModel::kCells), throughput_proxy(eq, CostModel::kTokens));
}

TEST(AuditCrossAttention, MatchesMatrix) {
  const auto ds = generate_synthetic({60, UniformLength{1, 30}, 1, 30, 3});
  for (auto m : kAllMethods) {
    const auto plan = build_plan(ds, {.bs = 2, .msl = 32, .gas = 1, .world = 2, .method = m});
    const auto audit = audit_cross_attention(plan, ds, 16, 7);
    EXPECT_GT(audit.rows_checked, 0u);
    EXPECT_EQ(audit.correct(), method_traits(m).correct_cross_attention) << method_name(m);
  }
  EXPECT_THROW(audit_cross_attention(build_plan(ds, {}), ds, 0, 1), ValidationError);
}

TEST(ParallelFor, CoversEveryIndexAndRethrows) {
  std::vector<int> seen(500, 0);
  parallel_for(seen.size(), [&](std::size_t i) { seen[i] += 1; });
  for (int v : seen) EXPECT_EQ(v, 1);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 3) throw ValidationError("boom");
               }),
               ValidationError);
  ::setenv("PACKBENCH_THREADS", "3", 1);
  EXPECT_EQ(thread_budget(), 3u);
  ::unsetenv("PACKBENCH_THREADS");
  EXPECT_GE(thread_budget(), 1u);
}

TEST(Comparison, CsvAndText) {
  const auto ds = testing::dataset_from_lengths({1, 100});
  const std::vector<MetricsReport> reports{run(ds, {.bs = 2, .msl = 128, .gas = 1, .world = 1})};
  std::ostringstream csv;
  write_comparison_csv(csv, reports);
  EXPECT_EQ(csv.str(),
            "method,rows,steps,useful_tokens,pad_tokens,utilization,imbalance,broken_examples\n"
            "RandomSampling+Padding,2,1,101,99,0.505000,0.000000,0\n");
  std::ostringstream text;
  write_comparison_text(text, reports);
  EXPECT_NE(text.str().find("RandomSampling+Padding"), std::string::npos);
  std::ostringstream again;
  write_comparison_csv(again, reports);
  EXPECT_EQ(csv.str(), again.str());
}

TEST(ReportJson, Fields) {
  const auto r = run(testing::golden_dataset(),
                     {.bs = 4, .msl = 16, .gas = 1, .world = 1, .method = Method::kMiniBatchPackingPosId});
  const auto j = report_to_json(r);
  EXPECT_EQ(j["method"], "MiniBatchPacking+PosID");
  EXPECT_EQ(j["useful_tokens"], 28);
  EXPECT_EQ(j["rows"], 4);
  EXPECT_EQ(j["position_ids"], true);
}

}  // namespace
}  // namespace packbench
