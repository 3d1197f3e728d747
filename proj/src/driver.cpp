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

#include "evobench/driver.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"
#include "json.hpp"

namespace evobench::driver {

using namespace evobench::engine;
using json = nlohmann::json;
namespace fs = std::filesystem;
using metrics::MetricsReport;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

const char* const kSources[] = {datagen::kTwitter, datagen::kFoursquare, datagen::kLandmarks};

std::string gen_stamp(const datagen::GenConfig& c) {
  return format_kv_numbers({{"seed", static_cast<double>(c.seed)},
                            {"n_users", static_cast<double>(c.n_users)},
                            {"n_venues", static_cast<double>(c.n_venues)},
                            {"n_tweets", static_cast<double>(c.n_tweets)},
                            {"n_checkins", static_cast<double>(c.n_checkins)},
                            {"start_time", static_cast<double>(c.start_time)},
                            {"end_time", static_cast<double>(c.end_time)},
                            {"lat_min", c.region.lat_min},
                            {"lat_max", c.region.lat_max},
                            {"lon_min", c.region.lon_min},
                            {"lon_max", c.region.lon_max},
                            {"decay_fraction", c.decay_fraction}});
}

std::vector<ColumnDef> columns_of(const std::string& source, const std::vector<std::string>& names) {
  const auto& schema = datagen::schema_for(source);
  if (names.empty()) return schema;
  std::vector<ColumnDef> out;
  for (const auto& n : names) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ColumnDef& c) { return c.name == n; });
    if (it == schema.end()) throw ValidationError("source '" + source + "' has no column '" + n + "'");
    out.push_back(*it);
  }
  return out;
}

std::vector<MetricComparison> compare(const MetricsReport& a, const MetricsReport& b) {
  return {{"response_seconds", a.response_seconds, b.response_seconds},
          {"tuning_seconds", a.tuning_seconds, b.tuning_seconds},
          {"data_arrival_seconds", a.data_arrival_seconds, b.data_arrival_seconds},
          {"storage_total_bytes", static_cast<double>(a.storage_total_bytes), static_cast<double>(b.storage_total_bytes)},
          {"dollars_total", a.dollars.total, b.dollars.total},
          {"bytes_loaded", static_cast<double>(a.bytes_loaded), static_cast<double>(b.bytes_loaded)},
          {"reuse_hits", static_cast<double>(a.reuse_hits), static_cast<double>(b.reuse_hits)}};
}

std::string run_name(const RunPlan& plan) {
  std::string name(to_string(plan.methodology));
  if (plan.methodology == Methodology::QueryEvolution) name += "-a" + std::to_string(plan.analyst);
  if (plan.methodology == Methodology::DataEvolution) name += "-" + plan.source;
  return name;
}

void write_outputs(const RunPlan& plan, RunOutcome& out) {
  if (!plan.emit) return;
  out.out_dir = metrics::report_dir(plan.out_dir) / run_name(plan);
  fs::create_directories(out.out_dir);
  json files = json::array();
  metrics::emit_report(out.reports, out.out_dir, "report");
  for (const char* ext : {"report.json", "report.csv", "report.svg"}) files.push_back(ext);
  for (const auto& r : out.reports) {
    write_text_file(out.out_dir / (r.info.label + ".json"), metrics::to_json(r));
    files.push_back(r.info.label + ".json");
  }
  json summary = json::array();
  for (const auto& m : out.summary) {
    summary.push_back({{"metric", m.metric}, {"first", m.first}, {"second", m.second}, {"delta", m.delta()},
                       {"ratio", m.ratio()}});
  }
  json manifest = {{"methodology", std::string(to_string(plan.methodology))},
                   {"backend", std::string(to_string(plan.backend))},
                   {"views_policy", std::string(to_string(plan.views))},
                   {"seed", plan.seed},
                   {"equal", out.equal},
                   {"mismatches", out.mismatches},
                   {"summary", summary},
                   {"files", files}};
  if (plan.methodology == Methodology::QueryEvolution) manifest["analyst"] = plan.analyst;
  if (plan.methodology == Methodology::UserEvolution) manifest["order"] = plan.order;
  if (plan.methodology == Methodology::DataEvolution) {
    manifest["source"] = plan.source;
    manifest["column_order"] = out.column_order;
    manifest["revisit_columns"] = out.revisit_columns;
  }
  write_text_file(out.out_dir / "manifest.json", manifest.dump(2) + "\n");
}

void check_digests(const MetricsReport& cold, const MetricsReport& warm, RunOutcome& out) {
  for (std::size_t i = 0; i < cold.queries.size() && i < warm.queries.size(); ++i) {
    if (cold.queries[i].digest != warm.queries[i].digest) {
      out.equal = false;
      out.mismatches.push_back(cold.queries[i].query);
    }
  }
  if (cold.queries.size() != warm.queries.size()) {
    out.equal = false;
    out.mismatches.push_back("query count");
  }
}

}  // namespace

std::string_view to_string(Methodology m) {
  switch (m) {
    case Methodology::QueryEvolution: return "query-evolution";
    case Methodology::UserEvolution: return "user-evolution";
    case Methodology::DataEvolution: return "data-evolution";
  }
  return "query-evolution";
}

Methodology methodology_from_string(std::string_view name) {
  if (name == "query-evolution") return Methodology::QueryEvolution;
  if (name == "user-evolution") return Methodology::UserEvolution;
  if (name == "data-evolution") return Methodology::DataEvolution;
  throw ValidationError("unknown methodology '" + std::string(name) +
                        "' (expected query-evolution, user-evolution or data-evolution)");
}

void RunPlan::validate() const {
  if (work_dir.empty()) throw ValidationError("work directory is not set");
  switch (methodology) {
    case Methodology::QueryEvolution:
      if (analyst < 1 || analyst > workload::kAnalysts) {
        throw ValidationError("analyst must be in [1, " + std::to_string(workload::kAnalysts) + "], got " +
                              std::to_string(analyst));
      }
      break;
    case Methodology::UserEvolution: {
      if (order.size() != static_cast<std::size_t>(workload::kAnalysts)) {
        throw ValidationError("order must list all " + std::to_string(workload::kAnalysts) + " analysts, got " +
                              std::to_string(order.size()));
      }
      std::set<int> seen;
      for (int a : order) {
        if (a < 1 || a > workload::kAnalysts) throw ValidationError("analyst " + std::to_string(a) + " out of range");
        if (!seen.insert(a).second) throw ValidationError("duplicate analyst " + std::to_string(a) + " in order");
      }
      break;
    }
    case Methodology::DataEvolution: {
      const auto& schema = datagen::schema_for(source);
      if (schema.size() % 2 != 0) {
        throw ValidationError("source '" + source + "' has an odd column count (" + std::to_string(schema.size()) + ")");
      }
      break;
    }
  }
  if (views == views::Policy::Lru && lru_budget_bytes == 0) throw ValidationError("LRU budget must be positive");
}

datagen::GeneratedFiles prepare_data(const datagen::GenConfig& cfg, const fs::path& dir) {
  const fs::path stamp = dir / "gen.conf";
  const std::string want = gen_stamp(cfg);
  bool present = fs::exists(stamp);
  for (const char* s : kSources) present = present && fs::exists(dir / datagen::file_name_for(s));
  if (present && read_text_file(stamp) == want) {
    datagen::GeneratedFiles f;
    f.twitter = dir / datagen::file_name_for(datagen::kTwitter);
    f.foursquare = dir / datagen::file_name_for(datagen::kFoursquare);
    f.landmarks = dir / datagen::file_name_for(datagen::kLandmarks);
    return f;
  }
  auto files = datagen::generate_all(cfg, dir);
  write_text_file(stamp, want);
  return files;
}

// ---------------------------------------------------------------------------
// Harness

namespace {

datagen::GenConfig seeded(const RunPlan& plan) {
  plan.validate();
  auto cfg = plan.gen;
  cfg.seed = plan.seed;
  cfg.validate();
  return cfg;
}

fs::path data_dir_of(const RunPlan& plan) { return plan.data_dir.empty() ? plan.work_dir / "data" : plan.data_dir; }

}  // namespace

Harness::Harness(const RunPlan& plan)
    : plan_(plan),
      files_(prepare_data(seeded(plan), data_dir_of(plan))),
      catalog_(plan.work_dir / "catalog"),
      views_(plan.work_dir / "catalog" / "views", plan.views, plan.lru_budget_bytes),
      params_(plan.params_path.empty() ? workload::default_params() : workload::ParamSet::load(plan.params_path)),
      run_id_(run_name(plan) + "-seed" + std::to_string(plan.seed)) {
  if (!plan.cost_path.empty()) {
    cost_ = metrics::CostModel::load(plan.cost_path);
  } else if (fs::exists(metrics::default_cost_path())) {
    cost_ = metrics::CostModel::load(metrics::default_cost_path());
  }
}

void Harness::reset_state() {
  catalog_.reset();
  views_.reset();
}

void Harness::register_source(const std::string& source, const std::vector<std::string>& columns,
                              MetricsReport& report) {
  const auto t = catalog_.register_source(source, columns_of(source, columns), files_.for_source(source),
                                          plan_.backend);
  metrics::ArrivalTiming a;
  a.source = source;
  for (const auto& c : columns_of(source, columns)) a.columns.push_back(c.name);
  a.seconds = t.total_seconds();
  a.bytes_loaded = t.bytes_loaded;
  a.bytes_parsed = t.bytes_parsed;
  report.add_arrival(std::move(a));
}

void Harness::register_all(MetricsReport& report) {
  for (const char* s : kSources) register_source(s, {}, report);
}

void Harness::extend(const std::string& source, const std::vector<std::string>& columns, MetricsReport& report) {
  const auto t = catalog_.extend_columns(source, columns_of(source, columns));
  metrics::ArrivalTiming a;
  a.source = source;
  a.columns = columns;
  a.seconds = t.total_seconds();
  a.bytes_loaded = t.bytes_loaded;
  a.bytes_parsed = t.bytes_parsed;
  report.add_arrival(std::move(a));
}

std::string Harness::run_query(const QueryPlan& plan, MetricsReport& report) {
  const auto start = Clock::now();
  auto rewritten = views_.rewrite(plan, catalog_);
  ExecOptions opts;
  opts.retain_intermediates = views_.policy() != views::Policy::None;
  auto result = execute_plan(rewritten.plan, catalog_, opts);
  metrics::QueryTiming q;
  q.query = plan.name;
  q.response_seconds = since(start);
  const auto captured = views_.capture(rewritten, result, catalog_, run_id_);
  q.tuning_seconds = captured.seconds;
  q.views_captured = captured.added.size();
  q.rows = result.result.table.rows.size();
  q.reuse_hits = rewritten.report.hits;
  q.digest = multiset_digest(result.result.table);
  std::string digest = q.digest;
  report.add_query(std::move(q));
  return digest;
}

MetricsReport Harness::new_report(const std::string& label) const {
  MetricsReport r;
  r.info.seed = plan_.seed;
  r.info.backend = std::string(to_string(plan_.backend));
  r.info.views_policy = std::string(views::to_string(plan_.views));
  r.info.methodology = std::string(to_string(plan_.methodology));
  r.info.label = label;
  r.info.timestamp = metrics::utc_timestamp();
  return r;
}

void Harness::finish(MetricsReport& report, double elapsed_seconds) const {
  report.set_storage(catalog_.base_storage_bytes(), views_.storage_footprint());
  report.elapsed_seconds = elapsed_seconds;
  report.price(cost_);
  report.check_totals();
}

// ---------------------------------------------------------------------------
// Methodologies

namespace {

QueryPlan build(const Harness& h, int analyst, int version) {
  try {
    return workload::build_query(analyst, version, h.params());
  } catch (const Error& e) {
    throw RunError(analyst, version, e.what());
  }
}

void run_one(Harness& h, int analyst, int version, MetricsReport& report) {
  const auto plan = build(h, analyst, version);
  try {
    h.run_query(plan, report);
  } catch (const RunError&) {
    throw;
  } catch (const Error& e) {
    throw RunError(analyst, version, e.what());
  }
}

/// Cold: reset before every query. Warm: reset once and keep state.
RunOutcome cold_warm(const RunPlan& plan, const std::vector<std::pair<int, int>>& queries) {
  Harness h(plan);
  RunOutcome out;

  auto cold = h.new_report("cold");
  auto t0 = Clock::now();
  for (const auto& [a, v] : queries) {
    h.reset_state();
    h.register_all(cold);
    run_one(h, a, v, cold);
  }
  h.finish(cold, since(t0));

  auto warm = h.new_report("warm");
  t0 = Clock::now();
  h.reset_state();
  h.register_all(warm);
  for (const auto& [a, v] : queries) run_one(h, a, v, warm);
  h.finish(warm, since(t0));

  check_digests(cold, warm, out);
  out.summary = compare(cold, warm);
  out.reports = {std::move(cold), std::move(warm)};
  write_outputs(plan, out);
  return out;
}

std::vector<std::string> seeded_shuffle(std::vector<std::string> items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) std::swap(items[i - 1], items[rng() % i]);
  return items;
}

}  // namespace

std::vector<std::string> column_arrival_order(const std::string& source, std::uint64_t seed) {
  std::vector<std::string> names;
  for (const auto& c : datagen::schema_for(source)) names.push_back(c.name);
  return seeded_shuffle(std::move(names), seed);
}

QueryPlan column_probe(const std::string& source, const std::vector<std::string>& columns) {
  std::vector<AggSpec> aggs;
  for (const auto& c : columns) aggs.push_back({AggFunc::Count, c, "n_" + c});
  return QueryPlan{group_agg(scan(source, columns_of(source, columns)), {}, std::move(aggs)),
                   "probe(" + std::to_string(columns.size()) + ")"};
}

RunOutcome run_query_evolution(const RunPlan& plan) {
  if (plan.methodology != Methodology::QueryEvolution) throw ValidationError("run plan is not query-evolution");
  plan.validate();
  std::vector<std::pair<int, int>> queries;
  for (int v = 1; v <= workload::kVersions; ++v) queries.emplace_back(plan.analyst, v);
  return cold_warm(plan, queries);
}

RunOutcome run_user_evolution(const RunPlan& plan) {
  if (plan.methodology != Methodology::UserEvolution) throw ValidationError("run plan is not user-evolution");
  plan.validate();
  std::vector<std::pair<int, int>> queries;
  for (int a : plan.order) queries.emplace_back(a, 1);
  return cold_warm(plan, queries);
}

RunOutcome run_data_evolution(const RunPlan& plan) {
  if (plan.methodology != Methodology::DataEvolution) throw ValidationError("run plan is not data-evolution");
  plan.validate();
  Harness h(plan);
  RunOutcome out;
  out.column_order = column_arrival_order(plan.source, plan.seed);
  const std::size_t half = out.column_order.size() / 2;
  const std::vector<std::string> initial(out.column_order.begin(), out.column_order.begin() + static_cast<std::ptrdiff_t>(half));
  auto revisit = seeded_shuffle(out.column_order, plan.seed + 1);
  revisit.resize(half);
  out.revisit_columns = revisit;

  // Column sets requested by the queries of steps 1-3, in order.
  std::vector<std::vector<std::string>> requests{initial};
  for (std::size_t i = half; i < out.column_order.size(); ++i) {
    auto next = requests.back();
    next.push_back(out.column_order[i]);
    requests.push_back(std::move(next));
  }
  requests.push_back(revisit);

  h.reset_state();
  auto step1 = h.new_report("step1");
  auto t0 = Clock::now();
  h.register_source(plan.source, initial, step1);
  h.run_query(column_probe(plan.source, requests[0]), step1);
  h.finish(step1, since(t0));

  auto step2 = h.new_report("step2");
  t0 = Clock::now();
  for (std::size_t i = 1; i <= half; ++i) {
    h.extend(plan.source, {requests[i].back()}, step2);
    h.run_query(column_probe(plan.source, requests[i]), step2);
  }
  h.finish(step2, since(t0));

  auto step3 = h.new_report("step3");
  t0 = Clock::now();
  h.run_query(column_probe(plan.source, revisit), step3);
  h.finish(step3, since(t0));

  auto step4 = h.new_report("step4");
  t0 = Clock::now();
  for (const auto& cols : requests) {
    h.reset_state();
    h.register_source(plan.source, cols, step4);
    h.run_query(column_probe(plan.source, cols), step4);
  }
  h.finish(step4, since(t0));

  MetricsReport stateful = h.new_report("stateful");
  for (const auto* r : {&step1, &step2, &step3}) {
    for (const auto& q : r->queries) stateful.add_query(q);
    for (const auto& a : r->arrivals) stateful.add_arrival(a);
    stateful.elapsed_seconds += r->elapsed_seconds;
  }
  stateful.set_storage(step3.storage_base_bytes, step3.storage_view_bytes);
  stateful.dollars = {step1.dollars.machine + step2.dollars.machine + step3.dollars.machine,
                      step1.dollars.storage + step2.dollars.storage + step3.dollars.storage, 0};
  stateful.dollars.total = stateful.dollars.machine + stateful.dollars.storage;
  check_digests(stateful, step4, out);
  out.summary = compare(stateful, step4);
  out.reports = {std::move(step1), std::move(step2), std::move(step3), std::move(step4)};
  write_outputs(plan, out);
  return out;
}

RunOutcome run(const RunPlan& plan) {
  switch (plan.methodology) {
    case Methodology::QueryEvolution: return run_query_evolution(plan);
    case Methodology::UserEvolution: return run_user_evolution(plan);
    case Methodology::DataEvolution: return run_data_evolution(plan);
  }
  throw ValidationError("unknown methodology");
}

std::string format_outcome(const RunPlan& plan, const RunOutcome& outcome) {
  std::ostringstream s;
  s << "methodology=" << to_string(plan.methodology);
  if (plan.methodology == Methodology::QueryEvolution) s << " analyst=" << plan.analyst;
  if (plan.methodology == Methodology::DataEvolution) s << " source=" << plan.source;
  s << " backend=" << to_string(plan.backend) << " views=" << views::to_string(plan.views) << " seed=" << plan.seed
    << "\n";
  std::size_t queries = 0;
  for (const auto& r : outcome.reports) queries += r.queries.size();
  s << "verdict: " << (outcome.equal ? "equal" : "DIFFERENT") << " (" << queries << " queries)";
  for (const auto& m : outcome.mismatches) s << " " << m;
  s << "\n";
  const bool data = plan.methodology == Methodology::DataEvolution;
  s << "metric," << (data ? "stateful,reset" : "cold,warm") << ",delta,ratio\n";
  for (const auto& m : outcome.summary) {
    s << m.metric << "," << m.first << "," << m.second << "," << m.delta() << "," << m.ratio() << "\n";
  }
  if (!outcome.out_dir.empty()) s << "reports: " << outcome.out_dir.string() << "\n";
  return s.str();
}

}  // namespace evobench::driver
