/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "evobench/driver.hpp"
#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"

using namespace evobench;

namespace {

constexpr int kUsageExit = 2;

std::vector<int> parse_order(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError("bad analyst '" + item + "' in order");
    }
  }
  return out;
}

int cmd_gen(std::uint64_t seed, const std::string& out, const datagen::GenConfig& sizes) {
  auto cfg = sizes;
  cfg.seed = seed;
  cfg.validate();
  const auto files = driver::prepare_data(cfg, out);
  std::cout << files.twitter.string() << "\n" << files.foursquare.string() << "\n" << files.landmarks.string() << "\n";
  return 0;
}

int cmd_dump_plan(int analyst, int version, const std::string& params_path, bool signature) {
  const auto params = params_path.empty() ? workload::default_params() : workload::ParamSet::load(params_path);
  const auto plan = workload::build_query(analyst, version, params);
  for (const auto& d : engine::validate_structure(plan)) std::cerr << "warning: " << d.node << ": " << d.message << "\n";
  std::cout << engine::dump_plan(plan);
  if (signature) {
    const auto sig = engine::canonicalize(plan);
    std::cout << ";; signature " << sig.key() << "\n;; " << sig.text << "\n";
  }
  if (version > 1) {
    const auto prev = workload::build_query(analyst, version - 1, params);
    std::cout << ";; revision from v" << (version - 1) << " " << workload::classify_delta(prev, plan).to_string()
              << "\n";
  }
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format, const std::string& out,
               bool mask) {
  std::vector<metrics::MetricsReport> reports;
  for (const auto& in : inputs) {
    for (auto& r : metrics::reports_from_json(read_text_file(in))) {
      reports.push_back(mask ? metrics::mask_timing(r) : std::move(r));
    }
  }
  const auto fmt = metrics::format_from_string(format);
  if (out.empty()) {
    metrics::emit(reports, fmt, std::cout);
  } else {
    std::ostringstream s;
    metrics::emit(reports, fmt, s);
    write_text_file(out, s.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary analytics benchmark harness"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate the three synthetic logs");
  std::uint64_t gen_seed = 42;
  std::string gen_out = "data";
  auto sizes = datagen::default_config();
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--users", sizes.n_users, "Number of users");
  gen->add_option("--venues", sizes.n_venues, "Number of venues");
  gen->add_option("--tweets", sizes.n_tweets, "Number of tweets");
  gen->add_option("--checkins", sizes.n_checkins, "Number of checkins");

  auto* run = app.add_subcommand("run", "Run one benchmark methodology");
  driver::RunPlan plan;
  plan.work_dir = "evobench-work";
  plan.out_dir = "reports";
  std::string methodology = "query-evolution";
  std::string backend = "raw";
  std::string views = "all";
  std::string order;
  std::string work = plan.work_dir.string();
  std::string data;
  std::string out = plan.out_dir.string();
  std::string params;
  std::string cost;
  run->add_option("--methodology", methodology, "query-evolution, user-evolution or data-evolution");
  run->add_option("--analyst", plan.analyst, "Analyst for query evolution (1-8)");
  run->add_option("--order", order, "Comma-separated analyst order for user evolution");
  run->add_option("--source", plan.source, "Log for data evolution");
  run->add_option("--backend", backend, "raw or loaded");
  run->add_option("--views", views, "none, all or lru");
  run->add_option("--lru-budget", plan.lru_budget_bytes, "View budget in bytes for --views lru");
  run->add_option("--seed", plan.seed, "Data seed");
  run->add_option("--tweets", plan.gen.n_tweets, "Number of tweets");
  run->add_option("--checkins", plan.gen.n_checkins, "Number of checkins");
  run->add_option("--work", work, "Catalog and view directory");
  run->add_option("--data", data, "Directory holding (or receiving) the generated logs");
  run->add_option("--out", out, "Report directory (EVOBENCH_REPORT_DIR overrides)");
  run->add_option("--params", params, "Workload parameter file");
  run->add_option("--cost", cost, "Cost model file");

  auto* report = app.add_subcommand("report", "Re-emit or combine saved reports");
  std::vector<std::string> report_in;
  std::string report_format = "csv";
  std::string report_out;
  bool report_mask = false;
  report->add_option("inputs", report_in, "Report JSON files")->required();
  report->add_option("--format", report_format, "json, csv or svg");
  report->add_option("--out", report_out, "Output file (default stdout)");
  report->add_flag("--mask-timing", report_mask, "Zero every timing field");

  auto* dump = app.add_subcommand("dump-plan", "Print a workload plan");
  int dump_analyst = 1;
  int dump_version = 1;
  std::string dump_params;
  bool dump_signature = false;
  dump->add_option("--analyst", dump_analyst, "Analyst (1-8)");
  dump->add_option("--version", dump_version, "Version (1-4)");
  dump->add_option("--params", dump_params, "Workload parameter file");
  dump->add_flag("--signature", dump_signature, "Also print the canonical signature");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (*gen) return cmd_gen(gen_seed, gen_out, sizes);
    if (*dump) return cmd_dump_plan(dump_analyst, dump_version, dump_params, dump_signature);
    if (*report) return cmd_report(report_in, report_format, report_out, report_mask);

    try {
      plan.methodology = driver::methodology_from_string(methodology);
      plan.backend = backend_from_string(backend);
      plan.views = views::policy_from_string(views);
      if (!order.empty()) plan.order = parse_order(order);
      plan.work_dir = work;
      plan.data_dir = data;
      plan.out_dir = out;
      plan.params_path = params;
      plan.cost_path = cost;
      plan.validate();
    } catch (const ValidationError& e) {
      std::cerr << "error: " << e.what() << "\n" << run->help();
      return kUsageExit;
    }
    const auto outcome = driver::run(plan);
    std::cout << driver::format_outcome(plan, outcome);
    return outcome.equal ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
