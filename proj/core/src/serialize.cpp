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

#include "packbench/serialize.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "packbench/error.hpp"

namespace packbench {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

template <typename T>
ordered_json grid_to_json(const Grid<T>& grid) {
  ordered_json rows = ordered_json::array();
  for (std::size_t r = 0; r < grid.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (auto v : grid.row(r)) row.push_back(static_cast<std::int64_t>(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename T>
Grid<T> grid_from_json(const json& doc, std::size_t rows, std::size_t cols, const char* name) {
  if (!doc.is_array() || doc.size() != rows) {
    throw ValidationError(std::string(name) + " must have " + std::to_string(rows) + " rows");
  }
  Grid<T> grid(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = doc[r];
    if (!row.is_array() || row.size() != cols) {
      throw ValidationError(std::string(name) + " row " + std::to_string(r) + " must have " +
                            std::to_string(cols) + " columns");
    }
    for (std::size_t c = 0; c < cols; ++c) grid.at(r, c) = static_cast<T>(row[c].get<std::int64_t>());
  }
  return grid;
}

ordered_json unit_to_json(const Unit& unit) {
  ordered_json out = ordered_json::object();
  if (const auto* mb = std::get_if<Minibatch>(&unit)) {
    out["examples"] = mb->examples;
    return out;
  }
  ordered_json packs = ordered_json::array();
  for (const auto& pack : std::get<PackGroup>(unit).packs) {
    ordered_json segments = ordered_json::array();
    for (const auto& s : pack.segments()) segments.push_back({s.example_id, s.start, s.end});
    ordered_json p = ordered_json::object();
    p["capacity"] = pack.capacity();
    p["segments"] = std::move(segments);
    packs.push_back(std::move(p));
  }
  out["packs"] = std::move(packs);
  return out;
}

Unit unit_from_json(const json& doc) {
  if (doc.contains("examples")) {
    return Minibatch{doc.at("examples").get<std::vector<ExampleId>>()};
  }
  PackGroup group;
  for (const auto& p : doc.at("packs")) {
    Pack pack(p.at("capacity").get<std::size_t>());
    for (const auto& s : p.at("segments")) {
      if (!s.is_array() || s.size() != 3) throw ValidationError("segment must be [id, start, end]");
      pack.append({s[0].get<ExampleId>(), s[1].get<std::size_t>(), s[2].get<std::size_t>()});
    }
    group.packs.push_back(std::move(pack));
  }
  return group;
}

}  // namespace

ordered_json plan_to_json(const PackingPlan& plan) {
  ordered_json doc = ordered_json::object();
  doc["method"] = std::string(method_name(plan.config.method));
  ordered_json config = ordered_json::object();
  config["bs"] = plan.config.bs;
  config["msl"] = plan.config.msl;
  config["gas"] = plan.config.gas;
  config["world"] = plan.config.world;
  config["seed"] = plan.config.seed;
  doc["config"] = std::move(config);
  ordered_json steps = ordered_json::array();
  for (const auto& step : plan.steps) {
    ordered_json ranks = ordered_json::array();
    for (const auto& slot : step) {
      ordered_json units = ordered_json::array();
      for (const auto& unit : slot) units.push_back(unit_to_json(unit));
      ranks.push_back(std::move(units));
    }
    steps.push_back(std::move(ranks));
  }
  doc["steps"] = std::move(steps);
  return doc;
}

PackingPlan plan_from_json(const json& doc) {
  try {
    PackingPlan plan;
    plan.config.method = parse_method(doc.at("method").get<std::string>());
    const auto& config = doc.at("config");
    plan.config.bs = config.at("bs").get<std::size_t>();
    plan.config.msl = config.at("msl").get<std::size_t>();
    plan.config.gas = config.at("gas").get<std::size_t>();
    plan.config.world = config.at("world").get<std::size_t>();
    plan.config.seed = config.at("seed").get<std::uint64_t>();
    plan.config.validate();
    for (const auto& step : doc.at("steps")) {
      Step s;
      for (const auto& slot : step) {
        RankSlot rs;
        for (const auto& unit : slot) rs.push_back(unit_from_json(unit));
        s.push_back(std::move(rs));
      }
      plan.steps.push_back(std::move(s));
    }
    return plan;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed plan: ") + e.what());
  }
}

void write_plan(std::ostream& out, const PackingPlan& plan) {
  out << plan_to_json(plan).dump() << '\n';
}

PackingPlan read_plan(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("malformed plan: ") + e.what());
  }
  return plan_from_json(doc);
}

ordered_json batch_to_json(const CollatedBatch& batch) {
  ordered_json doc = ordered_json::object();
  doc["rows"] = batch.rows();
  doc["cols"] = batch.cols();
  doc["input_ids"] = grid_to_json(batch.input_ids());
  doc["labels"] = grid_to_json(batch.labels());
  if (batch.position_ids()) doc["position_ids"] = grid_to_json(*batch.position_ids());
  if (batch.attention_mask()) doc["attention_mask"] = grid_to_json(*batch.attention_mask());
  if (batch.cu_seqlens()) doc["cu_seqlens"] = *batch.cu_seqlens();
  return doc;
}

CollatedBatch batch_from_json(const json& doc) {
  try {
    const auto rows = doc.at("rows").get<std::size_t>();
    const auto cols = doc.at("cols").get<std::size_t>();
    auto input_ids = grid_from_json<TokenId>(doc.at("input_ids"), rows, cols, "input_ids");
    auto labels = grid_from_json<TokenId>(doc.at("labels"), rows, cols, "labels");
    std::optional<Grid<TokenId>> position_ids;
    if (doc.contains("position_ids")) {
      position_ids = grid_from_json<TokenId>(doc["position_ids"], rows, cols, "position_ids");
    }
    std::optional<Grid<std::uint8_t>> mask;
    if (doc.contains("attention_mask")) {
      mask = grid_from_json<std::uint8_t>(doc["attention_mask"], rows, cols, "attention_mask");
    }
    std::optional<std::vector<std::size_t>> cu;
    if (doc.contains("cu_seqlens")) cu = doc["cu_seqlens"].get<std::vector<std::size_t>>();
    return CollatedBatch(std::move(input_ids), std::move(labels), std::move(position_ids),
                         std::move(mask), std::move(cu));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed collated batch: ") + e.what());
  }
}

}  // namespace packbench
