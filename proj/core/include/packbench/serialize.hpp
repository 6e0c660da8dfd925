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

#include <iosfwd>

#include <nlohmann/json.hpp>

#include "packbench/packing.hpp"
#include "packbench/types.hpp"

namespace packbench {

// Plan document: {method, config{bs,msl,gas,world,seed}, steps}. steps[s][r]
// lists rank r's microbatches in step s; a microbatch is {"examples":[ids]}
// or {"packs":[{"capacity":c,"segments":[[id,start,end],...]},...]}.
nlohmann::ordered_json plan_to_json(const PackingPlan& plan);
// Throws ValidationError on a malformed document.
PackingPlan plan_from_json(const nlohmann::json& doc);

void write_plan(std::ostream& out, const PackingPlan& plan);
PackingPlan read_plan(std::istream& in);

// {rows, cols, input_ids, labels, position_ids?, attention_mask?, cu_seqlens?}
nlohmann::ordered_json batch_to_json(const CollatedBatch& batch);
CollatedBatch batch_from_json(const nlohmann::json& doc);

}  // namespace packbench
