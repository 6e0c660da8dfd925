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

#include <benchmark/benchmark.h>

#include "packbench/attention.hpp"
#include "packbench/collate.hpp"
#include "packbench/ingest.hpp"
#include "packbench/metrics.hpp"
#include "packbench/ordering.hpp"
#include "packbench/packing.hpp"

namespace {

using namespace packbench;

const Dataset& flan(std::size_t n) {
  static const Dataset ds = generate_synthetic(flan_like(20000, 42));
  static std::vector<Dataset> prefixes;
  if (n >= ds.size()) return ds;
  for (const auto& p : prefixes) {
    if (p.size() == n) return p;
  }
  prefixes.emplace_back(std::vector<TokenSequence>(ds.begin(), ds.begin() + static_cast<std::ptrdiff_t>(n)));
  return prefixes.back();
}

void BM_FirstFitDecreasing(benchmark::State& state) {
  const auto& ds = flan(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(first_fit_decreasing(ds, 16384));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_FirstFitDecreasing)->Arg(1000)->Arg(5000)->Arg(20000);

void BM_GreedySequential(benchmark::State& state) {
  const auto& ds = flan(static_cast<std::size_t>(state.range(0)));
  const auto order = random_order(ds, 1);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_sequential_pack(order, ds, 16384));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ds.size()));
}
BENCHMARK(BM_GreedySequential)->Arg(1000)->Arg(20000);

void BM_PaddingFreeCollate(benchmark::State& state) {
  const auto& ds = flan(20000);
  std::vector<ExampleId> ids(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(padding_free_collate(ids, ds));
}
BENCHMARK(BM_PaddingFreeCollate)->Arg(4)->Arg(64);

void BM_PadCollate(benchmark::State& state) {
  const auto& ds = flan(20000);
  std::vector<ExampleId> ids(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(pad_collate(ids, ds));
}
BENCHMARK(BM_PadCollate)->Arg(4)->Arg(64);

void BM_BlockDiagonalAttention(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::vector<TokenId> tokens(len);
  std::vector<std::size_t> cu{0};
  for (std::size_t i = 0; i < len; ++i) tokens[i] = static_cast<TokenId>(i * 7 % 1000);
  for (std::size_t b = 64; b < len; b += 64) cu.push_back(b);
  cu.push_back(len);
  const auto e = embed(tokens, 32, 1);
  for (auto _ : state) benchmark::DoNotOptimize(causal_attention(e, BlockDiagonal{cu}));
}
BENCHMARK(BM_BlockDiagonalAttention)->Arg(256)->Arg(1024);

void BM_SimulateShapes(benchmark::State& state) {
  const auto& ds = flan(20000);
  const auto method = kAllMethods[static_cast<std::size_t>(state.range(0))];
  const RunConfig config{.method = method};
  const auto plan = build_plan(ds, config);
  state.SetLabel(std::string(method_name(method)));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(plan, ds, {SimulationMode::kShapes}));
}
BENCHMARK(BM_SimulateShapes)->DenseRange(0, 7);

}  // namespace

BENCHMARK_MAIN();
