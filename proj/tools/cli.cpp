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

#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "packbench/attention.hpp"
#include "packbench/collate.hpp"
#include "packbench/error.hpp"
#include "packbench/ingest.hpp"
#include "packbench/metrics.hpp"
#include "packbench/packing.hpp"
#include "packbench/serialize.hpp"

namespace packbench::cli {

namespace {

struct GlobalFlags {
  std::uint64_t seed = 42;
  std::string out = "-";
  std::string format;
};

struct ConfigFlags {
  std::size_t bs = 4;
  std::size_t msl = 4096;
  std::size_t gas = 2;
  std::size_t world = 8;
  std::size_t megabatch = 0;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& c) {
  cmd->add_option("--bs", c.bs, "Minibatch size per rank")->capture_default_str();
  cmd->add_option("--msl", c.msl, "Maximum sequence length (tokens)")->capture_default_str();
  cmd->add_option("--gas", c.gas, "Gradient accumulation steps")->capture_default_str();
  cmd->add_option("--world", c.world, "Number of data-parallel ranks")->capture_default_str();
  cmd->add_option("--megabatch", c.megabatch,
                  "GroupByLength megabatch size (0 = 50 * bs * world)")
      ->capture_default_str();
}

RunConfig make_config(const ConfigFlags& c, const GlobalFlags& g, Method method) {
  RunConfig config;
  config.bs = c.bs;
  config.msl = c.msl;
  config.gas = c.gas;
  config.world = c.world;
  config.megabatch = c.megabatch;
  config.seed = g.seed;
  config.method = method;
  config.validate();
  return config;
}

// Wraps the --out destination; "-" means the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw IoError("cannot write '" + path + "'");
    stream_ = file_.get();
  }

  std::ostream& get() { return *stream_; }

  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("write failed");
  }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

std::vector<Method> parse_methods(const std::string& list) {
  if (list.empty() || list == "all") return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> methods;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) methods.push_back(parse_method(item));
  }
  if (methods.empty()) throw ValidationError("no methods requested");
  return methods;
}

std::vector<double> parse_numbers(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  return values;
}

LengthDistribution parse_distribution(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ValidationError("distribution must be name:params");
  const auto name = text.substr(0, colon);
  std::vector<double> p;
  try {
    p = parse_numbers(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("bad distribution parameters '" + text + "'");
  }
  if (name == "lognormal" && p.size() == 2) return Lognormal{p[0], p[1]};
  if (name == "uniform" && p.size() == 2 && p[0] >= 0 && p[1] >= 0) {
    return UniformLength{static_cast<std::size_t>(p[0]), static_cast<std::size_t>(p[1])};
  }
  if (name == "bimodal" && p.size() == 5) return Bimodal{p[0], p[1], p[2], p[3], p[4]};
  throw ValidationError("unknown distribution '" + text +
                        "' (lognormal:mu,sigma | uniform:lo,hi | "
                        "bimodal:mu1,sigma1,mu2,sigma2,weight)");
}

int cmd_stats(const GlobalFlags& g, const std::string& path, std::size_t bin_width,
              const std::string& dataset_format, std::ostream& out) {
  const auto dataset = load_dataset(path, parse_dataset_format(dataset_format));
  const auto h = length_stats(dataset, bin_width);
  Sink sink(g.out, out);
  if (g.format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    doc["bin_edges"] = h.bin_edges;
    doc["counts"] = h.counts;
    doc["n"] = dataset.size();
    doc["mean"] = h.mean;
    doc["variance"] = h.variance;
    doc["min"] = h.min;
    doc["max"] = h.max;
    doc["mode_bin"] = h.mode_bin;
    sink.get() << doc.dump() << '\n';
  } else {
    write_histogram_csv(sink.get(), h);
  }
  sink.finish();
  return kExitOk;
}

int cmd_plan(const GlobalFlags& g, const ConfigFlags& c, const std::string& path,
             const std::string& method, const std::string& dataset_format, std::ostream& out) {
  const auto config = make_config(c, g, parse_method(method));
  const auto dataset = load_dataset(path, parse_dataset_format(dataset_format));
  const auto plan = build_plan(dataset, config);
  Sink sink(g.out, out);
  write_plan(sink.get(), plan);
  sink.finish();
  return kExitOk;
}

int cmd_collate(const GlobalFlags& g, const std::string& plan_path,
                const std::string& dataset_path, const std::string& dataset_format,
                TokenId pad_id, bool cu_seqlens, std::ostream& out) {
  auto in = open_input(plan_path);
  const auto plan = read_plan(in);
  const auto dataset = load_dataset(dataset_path, parse_dataset_format(dataset_format));
  const auto prepared = prepare_dataset(dataset, plan.config);
  validate_plan(plan, prepared);

  Sink sink(g.out, out);
  for (const auto& step : plan.steps) {
    for (const auto& slot : step) {
      for (const auto& unit : slot) {
        auto batch = collate_unit(unit, plan.config.method, prepared, pad_id);
        if (cu_seqlens && batch.rows() == 1 && batch.position_ids() && !batch.cu_seqlens()) {
          batch = with_cu_seqlens(batch, batch.cols());
        }
        sink.get() << batch_to_json(batch).dump() << '\n';
      }
    }
  }
  sink.finish();
  return kExitOk;
}

int cmd_verify(const GlobalFlags& g, const std::string& path, std::size_t d, std::ostream& out,
               std::ostream& err) {
  auto in = open_input(path);
  ContaminationReport total;
  std::string line;
  std::size_t line_no = 0;
  std::size_t batches = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, e.what());
    }
    const auto batch = batch_from_json(doc);
    ContaminationReport r;
    try {
      r = cross_contamination_report(batch, d, g.seed);
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("line {}: {}", line_no, e.what()));
    }
    total.blockdiag_max_diff = std::max(total.blockdiag_max_diff, r.blockdiag_max_diff);
    total.naive_max_diff = std::max(total.naive_max_diff, r.naive_max_diff);
    total.rows += r.rows;
    ++batches;
  }
  if (batches == 0) throw ValidationError("no collated batches in '" + path + "'");

  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["blockdiag_max_diff"] = total.blockdiag_max_diff;
  doc["naive_max_diff"] = total.naive_max_diff;
  doc["pass"] = total.pass();
  doc["batches"] = batches;
  doc["rows"] = total.rows;
  doc["d"] = d;
  doc["seed"] = g.seed;
  Sink sink(g.out, out);
  sink.get() << doc.dump() << '\n';
  sink.finish();
  if (!total.pass()) {
    err << "verify: block-diagonal attention deviates from independent attention\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_simulate(const GlobalFlags& g, const ConfigFlags& c, const std::string& path,
                 const std::string& methods_arg, const std::string& dataset_format,
                 const std::string& mode, std::size_t audit_d, std::ostream& out) {
  const auto methods = parse_methods(methods_arg);
  const auto dataset = load_dataset(path, parse_dataset_format(dataset_format));
  SimulateOptions options;
  if (mode == "shapes") {
    options.mode = SimulationMode::kShapes;
  } else if (mode == "materialize") {
    options.mode = SimulationMode::kMaterialize;
  } else if (mode != "auto") {
    throw ValidationError("unknown simulation mode '" + mode + "'");
  }

  std::vector<MetricsReport> reports;
  std::vector<AttentionAudit> audits;
  for (auto m : methods) {
    const auto config = make_config(c, g, m);
    const auto plan = build_plan(dataset, config);
    reports.push_back(simulate(plan, dataset, options));
    if (audit_d > 0) audits.push_back(audit_cross_attention(plan, dataset, audit_d, g.seed));
  }

  Sink sink(g.out, out);
  auto& os = sink.get();
  if (g.format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    doc["seed"] = g.seed;
    doc["config"] = {{"bs", c.bs}, {"msl", c.msl}, {"gas", c.gas}, {"world", c.world}};
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto r = report_to_json(reports[i]);
      if (!audits.empty()) {
        r["correct_cross_attention"] = audits[i].correct();
        r["attention_max_diff"] = audits[i].max_diff;
      }
      list.push_back(std::move(r));
    }
    doc["reports"] = std::move(list);
    os << doc.dump() << '\n';
  } else {
    os << fmt::format("# seed={} bs={} msl={} gas={} world={} examples={}\n", g.seed, c.bs, c.msl,
                      c.gas, c.world, dataset.size());
    if (audits.empty()) {
      write_comparison_csv(os, reports);
    } else {
      std::ostringstream table;
      write_comparison_csv(table, reports);
      std::istringstream lines(table.str());
      std::string row;
      std::getline(lines, row);
      os << row << ",correct_cross_attention,attention_max_diff\n";
      for (std::size_t i = 0; std::getline(lines, row); ++i) {
        os << fmt::format("{},{},{:.3e}\n", row, audits[i].correct() ? "yes" : "no",
                          audits[i].max_diff);
      }
    }
  }
  sink.finish();
  return kExitOk;
}

int cmd_generate(const GlobalFlags& g, const std::string& preset, const std::string& dist,
                 std::size_t n, std::optional<std::size_t> min_len,
                 std::optional<std::size_t> max_len, bool lengths_only, std::ostream& out) {
  SynthSpec spec;
  if (!dist.empty()) {
    spec.n = n;
    spec.seed = g.seed;
    spec.distribution = parse_distribution(dist);
  } else {
    auto p = synth_preset(preset, n, g.seed);
    if (!p) throw ValidationError("unknown preset '" + preset + "' (flan | orcamath | stack)");
    spec = *p;
  }
  if (min_len) spec.min_len = *min_len;
  if (max_len) spec.max_len = *max_len;
  const auto dataset = generate_synthetic(spec);
  Sink sink(g.out, out);
  write_dataset(sink.get(), dataset, lengths_only ? DatasetFormat::kLengths : DatasetFormat::kTokens);
  sink.finish();
  return kExitOk;
}

const CLI::Validator kMethodList(
    [](std::string& value) -> std::string {
      try {
        parse_methods(value);
      } catch (const ValidationError& e) {
        return e.what();
      }
      return {};
    },
    "METHOD[,METHOD...]");

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"packbench: sequence batching strategies for LLM fine-tuning"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--seed", g.seed, "RNG seed")->capture_default_str();
  app.add_option("--out", g.out, "Output file ('-' for stdout)")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string dataset_format = "auto";
  auto add_dataset_format = [&](CLI::App* cmd) {
    cmd->add_option("--dataset-format", dataset_format, "auto | tokens | lengths")
        ->check(CLI::IsMember({"auto", "tokens", "lengths"}))
        ->capture_default_str();
  };

  std::string dataset_path;
  std::size_t bin_width = 50;
  auto* stats = app.add_subcommand("stats", "Length histogram of a dataset");
  stats->add_option("dataset", dataset_path, "JSON-lines dataset")->required();
  stats->add_option("--bin-width", bin_width, "Bin width in tokens")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_dataset_format(stats);

  ConfigFlags config;
  std::string method;
  auto* plan = app.add_subcommand("plan", "Build a packing plan");
  plan->add_option("dataset", dataset_path, "JSON-lines dataset")->required();
  plan->add_option("--method", method, "Batching method")->required()->check(kMethodList);
  add_config_flags(plan, config);
  add_dataset_format(plan);

  std::string plan_path;
  TokenId pad_id = 0;
  bool cu_seqlens = false;
  auto* collate = app.add_subcommand("collate", "Materialize a plan as collated batches");
  collate->add_option("plan", plan_path, "Plan JSON")->required();
  collate->add_option("dataset", dataset_path, "JSON-lines dataset")->required();
  collate->add_option("--pad-id", pad_id, "Pad token id")->capture_default_str();
  collate->add_flag("--cu-seqlens", cu_seqlens,
                    "Attach cu_seqlens to flattened rows that only carry position ids");
  add_dataset_format(collate);

  std::string collated_path;
  std::size_t d = 32;
  auto* verify = app.add_subcommand("verify", "Check attention masking of collated batches");
  verify->add_option("collated", collated_path, "Collated JSON-lines")->required();
  verify->add_option("--d", d, "Embedding width")->check(CLI::PositiveNumber)->capture_default_str();

  std::string methods;
  std::string mode = "auto";
  std::size_t audit_d = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "Compare methods on one dataset");
  simulate_cmd->add_option("dataset", dataset_path, "JSON-lines dataset")->required();
  simulate_cmd->add_option("--methods", methods, "Comma-separated methods or 'all'")
      ->check(kMethodList);
  simulate_cmd->add_option("--mode", mode, "auto | shapes | materialize")->capture_default_str();
  simulate_cmd->add_option("--audit", audit_d,
                           "Also check cross-attention with this embedding width (0 = off)");
  add_config_flags(simulate_cmd, config);
  add_dataset_format(simulate_cmd);

  std::string preset = "flan";
  std::string dist;
  std::size_t count = 20000;
  std::optional<std::size_t> min_len;
  std::optional<std::size_t> max_len;
  bool lengths_only = false;
  auto* generate = app.add_subcommand("generate", "Write a synthetic dataset");
  generate->add_option("--preset", preset, "flan | orcamath | stack")->capture_default_str();
  generate->add_option("--dist", dist, "Custom distribution, e.g. lognormal:5.6,1.0");
  generate->add_option("--n", count, "Number of examples")->capture_default_str();
  generate->add_option("--min-len", min_len, "Lower length clamp");
  generate->add_option("--max-len", max_len, "Upper length clamp");
  generate->add_flag("--lengths", lengths_only, "Write {\"length\": n} records");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o;
    std::ostringstream e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*stats) return cmd_stats(g, dataset_path, bin_width, dataset_format, out);
    if (*plan) return cmd_plan(g, config, dataset_path, method, dataset_format, out);
    if (*collate) {
      return cmd_collate(g, plan_path, dataset_path, dataset_format, pad_id, cu_seqlens, out);
    }
    if (*verify) return cmd_verify(g, collated_path, d, out, err);
    if (*simulate_cmd) {
      return cmd_simulate(g, config, dataset_path, methods, dataset_format, mode, audit_d, out);
    }
    if (*generate) {
      return cmd_generate(g, preset, dist, count, min_len, max_len, lengths_only, out);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace packbench::cli
