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
#include <variant>
#include <vector>

#include "packbench/method.hpp"
#include "packbench/types.hpp"

namespace packbench {

// Concatenates the ordered examples into one token stream and cuts it every
// `row_capacity` tokens. Examples straddling a cut become broken segments;
// only the final pack may be short.
std::vector<Pack> fixed_length_pack(std::span<const ExampleId> order, const Dataset& dataset,
                                    std::size_t row_capacity);

// First-come-first-serve packing: appends each whole example to the single
// open pack while it fits, otherwise closes it and opens a new one.
// Throws ValidationError if an example is longer than `capacity`.
std::vector<Pack> greedy_sequential_pack(std::span<const ExampleId> order, const Dataset& dataset,
                                         std::size_t capacity);

// First-fit-decreasing: examples sorted longest first (ties by id), each
// placed into the earliest pack with room. Packs are returned in creation order.
std::vector<Pack> first_fit_decreasing(const Dataset& dataset, std::size_t capacity);

// FFD packs dealt round-robin to `world` ranks in creation order.
std::vector<std::vector<Pack>> ffd_multipack(const Dataset& dataset, std::size_t capacity,
                                             std::size_t world);

// bs whole examples collated together (padded rows or one flattened row).
struct Minibatch {
  std::vector<ExampleId> examples;
  friend bool operator==(const Minibatch&, const Minibatch&) = default;
};

// Packs collated into one tensor, one row per pack.
struct PackGroup {
  std::vector<Pack> packs;
  friend bool operator==(const PackGroup&, const PackGroup&) = default;
};

// One rank-microbatch.
using Unit = std::variant<Minibatch, PackGroup>;
// Up to `gas` microbatches of one rank in one optimizer step.
using RankSlot = std::vector<Unit>;
// Exactly `world` slots.
using Step = std::vector<RankSlot>;

struct PackingPlan {
  RunConfig config;
  std::vector<Step> steps;

  std::size_t unit_count() const;
  friend bool operator==(const PackingPlan&, const PackingPlan&) = default;
};

// Deals units round-robin to ranks (unit i goes to rank i % world) and cuts
// each rank's queue into steps of `gas` microbatches. The final partial step
// is kept.
PackingPlan assign_plan(std::vector<Unit> units, const RunConfig& config);
// As assign_plan for units that are already assigned to ranks.
PackingPlan assign_rank_plan(std::vector<std::vector<Unit>> per_rank, const RunConfig& config);

// Token capacity of one pack for an offline method: msl for pack rows,
// bs * msl for flattened packs.
std::size_t pack_capacity(const RunConfig& config);

// Examples longer than msl truncated to msl; every method plans over this.
Dataset prepare_dataset(const Dataset& dataset, const RunConfig& config);

// Plans `dataset` with config.method. The dataset is truncated to msl first.
PackingPlan build_plan(const Dataset& dataset, const RunConfig& config);

// Checks rank structure, unit kinds, capacities and that the plan covers the
// prepared dataset exactly once (whole examples, or a tiling of every
// example's token range for breaking methods). Throws ValidationError.
void validate_plan(const PackingPlan& plan, const Dataset& prepared);

}  // namespace packbench
