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

#include "packbench/packing.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>

#include <fmt/format.h>

#include "packbench/error.hpp"
#include "packbench/ordering.hpp"

namespace packbench {

std::vector<Pack> fixed_length_pack(std::span<const ExampleId> order, const Dataset& dataset,
                                    std::size_t row_capacity) {
  if (row_capacity == 0) throw ValidationError("row capacity must be >= 1");
  std::vector<Pack> packs;
  std::optional<Pack> open;
  for (auto id : order) {
    const auto length = dataset.by_id(id).length();
    std::size_t offset = 0;
    while (offset < length) {
      if (!open) open.emplace(row_capacity);
      const auto take = std::min(open->free(), length - offset);
      open->append({id, offset, offset + take});
      offset += take;
      if (open->free() == 0) {
        packs.push_back(std::move(*open));
        open.reset();
      }
    }
  }
  if (open) packs.push_back(std::move(*open));
  return packs;
}

std::vector<Pack> greedy_sequential_pack(std::span<const ExampleId> order, const Dataset& dataset,
                                         std::size_t capacity) {
  if (capacity == 0) throw ValidationError("pack capacity must be >= 1");
  std::vector<Pack> packs;
  std::optional<Pack> open;
  for (auto id : order) {
    const auto length = dataset.by_id(id).length();
    if (length > capacity) {
      throw ValidationError(fmt::format("example {} ({} tokens) exceeds pack capacity {}", id,
                                        length, capacity));
    }
    if (open && !open->fits(length)) {
      packs.push_back(std::move(*open));
      open.reset();
    }
    if (!open) open.emplace(capacity);
    open->append({id, 0, length});
  }
  if (open) packs.push_back(std::move(*open));
  return packs;
}

std::vector<Pack> first_fit_decreasing(const Dataset& dataset, std::size_t capacity) {
  if (capacity == 0) throw ValidationError("pack capacity must be >= 1");
  const auto order = sorted_order(dataset);
  std::vector<Pack> packs;
  for (auto id : order) {
    const auto length = dataset.by_id(id).length();
    if (length > capacity) {
      throw ValidationError(fmt::format("example {} ({} tokens) exceeds pack capacity {}", id,
                                        length, capacity));
    }
    auto slot = std::find_if(packs.begin(), packs.end(),
                             [&](const Pack& p) { return p.fits(length); });
    if (slot == packs.end()) {
      packs.emplace_back(capacity);
      slot = std::prev(packs.end());
    }
    slot->append({id, 0, length});
  }
  return packs;
}

std::vector<std::vector<Pack>> ffd_multipack(const Dataset& dataset, std::size_t capacity,
                                             std::size_t world) {
  if (world == 0) throw ValidationError("world must be >= 1");
  auto packs = first_fit_decreasing(dataset, capacity);
  std::vector<std::vector<Pack>> per_rank(world);
  for (std::size_t i = 0; i < packs.size(); ++i) {
    per_rank[i % world].push_back(std::move(packs[i]));
  }
  return per_rank;
}

std::size_t PackingPlan::unit_count() const {
  std::size_t n = 0;
  for (const auto& step : steps) {
    for (const auto& slot : step) n += slot.size();
  }
  return n;
}

PackingPlan assign_rank_plan(std::vector<std::vector<Unit>> per_rank, const RunConfig& config) {
  config.validate();
  if (per_rank.size() != config.world) {
    throw ValidationError(fmt::format("expected {} rank queues, got {}", config.world,
                                      per_rank.size()));
  }
  std::size_t longest = 0;
  for (const auto& q : per_rank) longest = std::max(longest, q.size());
  const std::size_t steps = (longest + config.gas - 1) / config.gas;

  PackingPlan plan{config, {}};
  plan.steps.assign(steps, Step(config.world));
  for (std::size_t r = 0; r < config.world; ++r) {
    for (std::size_t k = 0; k < per_rank[r].size(); ++k) {
      plan.steps[k / config.gas][r].push_back(std::move(per_rank[r][k]));
    }
  }
  return plan;
}

PackingPlan assign_plan(std::vector<Unit> units, const RunConfig& config) {
  config.validate();
  std::vector<std::vector<Unit>> per_rank(config.world);
  for (std::size_t i = 0; i < units.size(); ++i) {
    per_rank[i % config.world].push_back(std::move(units[i]));
  }
  return assign_rank_plan(std::move(per_rank), config);
}

std::size_t pack_capacity(const RunConfig& config) {
  return unit_kind(config.method) == UnitKind::kPackRows ? config.msl : config.bs * config.msl;
}

Dataset prepare_dataset(const Dataset& dataset, const RunConfig& config) {
  config.validate();
  return truncate_dataset(dataset, config.msl);
}

namespace {

std::vector<Unit> chunk_minibatches(const std::vector<ExampleId>& order, std::size_t bs) {
  std::vector<Unit> units;
  units.reserve((order.size() + bs - 1) / bs);
  for (std::size_t i = 0; i < order.size(); i += bs) {
    const auto last = std::min(order.size(), i + bs);
    units.emplace_back(Minibatch{{order.begin() + static_cast<std::ptrdiff_t>(i),
                                  order.begin() + static_cast<std::ptrdiff_t>(last)}});
  }
  return units;
}

std::vector<Unit> group_packs(std::vector<Pack> packs, std::size_t per_unit) {
  std::vector<Unit> units;
  units.reserve((packs.size() + per_unit - 1) / per_unit);
  for (std::size_t i = 0; i < packs.size(); i += per_unit) {
    PackGroup group;
    for (std::size_t k = i; k < std::min(packs.size(), i + per_unit); ++k) {
      group.packs.push_back(std::move(packs[k]));
    }
    units.emplace_back(std::move(group));
  }
  return units;
}

}  // namespace

PackingPlan build_plan(const Dataset& dataset, const RunConfig& config) {
  const auto prepared = prepare_dataset(dataset, config);
  const auto capacity = pack_capacity(config);

  switch (config.method) {
    case Method::kRandomSamplingPadding:
    case Method::kMiniBatchPackingPosId:
      return assign_plan(chunk_minibatches(random_order(prepared, config.seed), config.bs),
                         config);
    case Method::kGroupByLengthPadding:
      return assign_plan(
          chunk_minibatches(
              group_by_length_order(prepared, config.effective_megabatch(), config.seed),
              config.bs),
          config);
    case Method::kFixedLengthPacking: {
      const auto order = random_order(prepared, config.seed);
      return assign_plan(group_packs(fixed_length_pack(order, prepared, capacity), config.bs),
                         config);
    }
    case Method::kFixedLengthPackingPosId: {
      const auto order = random_order(prepared, config.seed);
      return assign_plan(group_packs(fixed_length_pack(order, prepared, capacity), 1), config);
    }
    case Method::kMultipackPosId: {
      auto per_rank = ffd_multipack(prepared, capacity, config.world);
      std::vector<std::vector<Unit>> units(config.world);
      for (std::size_t r = 0; r < config.world; ++r) {
        units[r] = group_packs(std::move(per_rank[r]), 1);
      }
      return assign_rank_plan(std::move(units), config);
    }
    case Method::kSortedPackingPosId: {
      const auto order = sorted_order(prepared);
      return assign_plan(group_packs(greedy_sequential_pack(order, prepared, capacity), 1),
                         config);
    }
    case Method::kRandomPackingPosId: {
      const auto order = random_order(prepared, config.seed);
      return assign_plan(group_packs(greedy_sequential_pack(order, prepared, capacity), 1),
                         config);
    }
  }
  throw ValidationError("unhandled method");
}

void validate_plan(const PackingPlan& plan, const Dataset& prepared) {
  const auto& config = plan.config;
  config.validate();
  const auto kind = unit_kind(config.method);
  const bool breaking = !method_traits(config.method).no_broken_examples;
  const auto capacity = pack_capacity(config);

  auto fail = [](const std::string& why) {
    throw ValidationError("plan does not match dataset: " + why);
  };

  // example id -> (start, end) ranges seen
  std::map<ExampleId, std::vector<std::pair<std::size_t, std::size_t>>> seen;

  for (std::size_t s = 0; s < plan.steps.size(); ++s) {
    const auto& step = plan.steps[s];
    if (step.size() != config.world) {
      fail(fmt::format("step {} has {} rank slots, expected {}", s, step.size(), config.world));
    }
    for (const auto& slot : step) {
      if (slot.size() > config.gas) fail(fmt::format("step {} slot exceeds gas", s));
      for (const auto& unit : slot) {
        if (const auto* mb = std::get_if<Minibatch>(&unit)) {
          if (kind != UnitKind::kPaddedMinibatch && kind != UnitKind::kFlatMinibatch) {
            fail("minibatch unit in an offline plan");
          }
          if (mb->examples.empty() || mb->examples.size() > config.bs) {
            fail("minibatch size outside [1, bs]");
          }
          for (auto id : mb->examples) {
            if (!prepared.contains(id)) fail(fmt::format("unknown example id {}", id));
            seen[id].emplace_back(0, prepared.by_id(id).length());
          }
          continue;
        }
        const auto& group = std::get<PackGroup>(unit);
        if (kind != UnitKind::kPackRows && kind != UnitKind::kFlatPack) {
          fail("pack unit in a minibatch plan");
        }
        const std::size_t max_packs = kind == UnitKind::kPackRows ? config.bs : 1;
        if (group.packs.empty() || group.packs.size() > max_packs) {
          fail("pack group size out of range");
        }
        for (const auto& pack : group.packs) {
          if (pack.capacity() != capacity) {
            fail(fmt::format("pack capacity {} != {}", pack.capacity(), capacity));
          }
          for (const auto& seg : pack.segments()) {
            if (!prepared.contains(seg.example_id)) {
              fail(fmt::format("unknown example id {}", seg.example_id));
            }
            const auto length = prepared.by_id(seg.example_id).length();
            if (seg.end > length) {
              fail(fmt::format("segment [{}, {}) beyond example {} of length {}", seg.start,
                               seg.end, seg.example_id, length));
            }
            if (!breaking && !seg.is_whole(length)) {
              fail(fmt::format("broken segment of example {} in a non-breaking method",
                               seg.example_id));
            }
            seen[seg.example_id].emplace_back(seg.start, seg.end);
          }
        }
      }
    }
  }

  if (seen.size() != prepared.size()) {
    fail(fmt::format("plan covers {} examples, dataset has {}", seen.size(), prepared.size()));
  }
  for (auto& [id, ranges] : seen) {
    std::sort(ranges.begin(), ranges.end());
    std::size_t cursor = 0;
    for (const auto& [start, end] : ranges) {
      if (start != cursor) fail(fmt::format("example {} is not tiled exactly once", id));
      cursor = end;
    }
    if (cursor != prepared.by_id(id).length()) {
      fail(fmt::format("example {} is not fully covered", id));
    }
  }
}

}  // namespace packbench
