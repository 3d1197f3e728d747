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

#include <map>

#include "doctest.h"
#include "evobench/driver.hpp"
#include "evobench/error.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace evobench;
using namespace evobench::driver;
namespace fs = std::filesystem;

namespace {

/// Shared generated logs so each run skips generation.
const fs::path& data_dir() {
  static evotest::TempDir dir("driver-data");
  return dir.path();
}

struct Run {
  evotest::TempDir work{"driver"};
  RunPlan plan;

  Run() {
    plan.data_dir = data_dir();
    plan.work_dir = work / "work";
    plan.out_dir = work / "out";
    plan.emit = false;
  }
};

std::map<std::string, std::string> digests(const metrics::MetricsReport& r) {
  std::map<std::string, std::string> out;
  for (const auto& q : r.queries) out[q.query] = q.digest;
  return out;
}

}  // namespace

TEST_CASE("methodology names") {
  for (auto m : {Methodology::QueryEvolution, Methodology::UserEvolution, Methodology::DataEvolution}) {
    CHECK(methodology_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(methodology_from_string("schema-evolution"), ValidationError);
}

TEST_CASE("run plans are validated against their methodology") {
  Run r;
  r.plan.analyst = 9;
  CHECK_THROWS_AS(r.plan.validate(), ValidationError);
  CHECK_THROWS_AS(run(r.plan), ValidationError);
  r.plan.analyst = 0;
  CHECK_THROWS_AS(r.plan.validate(), ValidationError);
  r.plan.analyst = 1;
  CHECK_NOTHROW(r.plan.validate());

  r.plan.methodology = Methodology::UserEvolution;
  r.plan.order = {1, 1, 2, 3, 4, 5, 6, 7};
  try {
    r.plan.validate();
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("duplicate analyst 1") != std::string::npos);
  }
  r.plan.order = {1, 2, 3};
  CHECK_THROWS_AS(r.plan.validate(), ValidationError);

  r.plan.methodology = Methodology::DataEvolution;
  r.plan.source = "nope";
  CHECK_THROWS_AS(r.plan.validate(), ValidationError);
  r.plan.source = datagen::kTwitter;
  r.plan.work_dir.clear();
  CHECK_THROWS_AS(r.plan.validate(), ValidationError);
}

TEST_CASE("query evolution without views records no reuse") {
  Run r;
  r.plan.views = views::Policy::None;
  const auto out = run_query_evolution(r.plan);
  REQUIRE(out.reports.size() == 2);
  CHECK(out.reports[0].info.label == "cold");
  CHECK(out.reports[1].info.label == "warm");
  CHECK(out.reports[1].reuse_hits == 0);
  CHECK(out.reports[1].storage_view_bytes == 0);
  CHECK(out.equal);
}

TEST_CASE("query evolution of analyst 1 with all views reuses and agrees") {
  Run r;
  r.plan.analyst = 1;
  r.plan.views = views::Policy::All;
  const auto out = run_query_evolution(r.plan);
  CHECK(out.equal);
  CHECK(out.mismatches.empty());
  const auto& cold = out.reports[0];
  const auto& warm = out.reports[1];
  CHECK(warm.reuse_hits >= 1);
  CHECK(cold.reuse_hits == 0);
  REQUIRE(cold.queries.size() == 4);
  REQUIRE(warm.queries.size() == 4);
  CHECK(digests(cold) == digests(warm));
  CHECK(warm.queries[0].query == "a1.v1");
  CHECK(warm.tuning_seconds > 0);
  CHECK(warm.storage_view_bytes > 0);
  CHECK_NOTHROW(cold.check_totals());
  CHECK_NOTHROW(warm.check_totals());
  CHECK_FALSE(out.summary.empty());
  CHECK(format_outcome(r.plan, out).find("equal") != std::string::npos);
}

TEST_CASE("user evolution agrees between cold and warm") {
  Run r;
  r.plan.methodology = Methodology::UserEvolution;
  r.plan.order = {3, 1, 4, 2, 8, 5, 7, 6};
  const auto out = run_user_evolution(r.plan);
  CHECK(out.equal);
  REQUIRE(out.reports[0].queries.size() == 8);
  CHECK(out.reports[0].queries[0].query == "a3.v1");
  CHECK(digests(out.reports[0]) == digests(out.reports[1]));
}

TEST_CASE("cold user evolution digests do not depend on the order") {
  Run a, b;
  a.plan.methodology = b.plan.methodology = Methodology::UserEvolution;
  a.plan.views = b.plan.views = views::Policy::None;
  b.plan.order = {8, 7, 6, 5, 4, 3, 2, 1};
  const auto ra = run_user_evolution(a.plan);
  const auto rb = run_user_evolution(b.plan);
  CHECK(digests(ra.reports[0]) == digests(rb.reports[0]));
  CHECK(digests(ra.reports[0]).size() == 8);
}

TEST_CASE("data evolution on LOADED loads one column per step and nothing on revisit") {
  Run r;
  r.plan.methodology = Methodology::DataEvolution;
  r.plan.backend = Backend::Loaded;
  const auto out = run_data_evolution(r.plan);
  REQUIRE(out.reports.size() == 4);
  CHECK(out.column_order.size() == 12);
  CHECK(std::set<std::string>(out.column_order.begin(), out.column_order.end()).size() == 12);
  CHECK(out.revisit_columns.size() >= 1);
  CHECK(out.equal);

  const auto& step1 = out.reports[0];
  REQUIRE(step1.arrivals.size() == 1);
  CHECK(step1.arrivals[0].columns.size() == 6);
  CHECK(step1.arrivals[0].columns == std::vector<std::string>(out.column_order.begin(), out.column_order.begin() + 6));

  const auto& step2 = out.reports[1];
  REQUIRE(step2.arrivals.size() == 6);
  REQUIRE(step2.queries.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(step2.arrivals[i].columns.size() == 1);
    CHECK(step2.arrivals[i].columns[0] == out.column_order[6 + i]);
    CHECK(step2.arrivals[i].bytes_loaded > 0);
  }

  const auto& step3 = out.reports[2];
  CHECK(step3.bytes_loaded == 0);
  CHECK(step3.arrivals.empty());
  CHECK(step3.queries.size() == 1);

  const auto& step4 = out.reports[3];
  CHECK(step4.bytes_loaded > step1.bytes_loaded + step2.bytes_loaded);
  for (const auto& rep : out.reports) CHECK_NOTHROW(rep.check_totals());
}

TEST_CASE("data evolution column choices are seeded") {
  CHECK(column_arrival_order(datagen::kTwitter, 42) == column_arrival_order(datagen::kTwitter, 42));
  CHECK(column_arrival_order(datagen::kTwitter, 42) != column_arrival_order(datagen::kTwitter, 43));
  CHECK(column_arrival_order(datagen::kFoursquare, 1).size() == 8);
  Run a, b;
  a.plan.methodology = b.plan.methodology = Methodology::DataEvolution;
  const auto ra = run_data_evolution(a.plan);
  const auto rb = run_data_evolution(b.plan);
  CHECK(ra.column_order == rb.column_order);
  CHECK(ra.revisit_columns == rb.revisit_columns);
}

TEST_CASE("runs are reproducible apart from timing") {
  Run a, b;
  const auto ra = run_query_evolution(a.plan);
  const auto rb = run_query_evolution(b.plan);
  REQUIRE(ra.reports.size() == rb.reports.size());
  for (std::size_t i = 0; i < ra.reports.size(); ++i) {
    CHECK(metrics::mask_timing(ra.reports[i]) == metrics::mask_timing(rb.reports[i]));
  }
}

TEST_CASE("column probes count every column") {
  const auto p = column_probe(datagen::kTwitter, {"user_id", "text"});
  const auto cols = engine::output_columns(p.sink);
  CHECK(cols.size() == 2);
}

TEST_CASE("emitted runs write reports and a manifest") {
  Run r;
  r.plan.emit = true;
  r.plan.analyst = 2;
  ::unsetenv("EVOBENCH_REPORT_DIR");
  const auto out = run(r.plan);
  REQUIRE_FALSE(out.out_dir.empty());
  CHECK(out.out_dir.parent_path() == r.plan.out_dir);
  for (const char* f : {"report.json", "report.csv", "report.svg", "manifest.json", "cold.json", "warm.json"}) {
    CHECK_MESSAGE(fs::exists(out.out_dir / f), f);
  }
  CHECK(metrics::reports_from_json(read_text_file(out.out_dir / "report.json")) == out.reports);
  const auto manifest = nlohmann::json::parse(read_text_file(out.out_dir / "manifest.json"));
  CHECK(manifest.is_object());
}

TEST_CASE("data is generated once and reused while the config matches") {
  evotest::TempDir dir("prep");
  auto cfg = datagen::default_config();
  cfg.n_tweets = 50;
  cfg.n_checkins = 40;
  cfg.n_venues = 20;
  const auto files = prepare_data(cfg, dir.path());
  const auto stamp = fs::last_write_time(files.twitter);
  prepare_data(cfg, dir.path());
  CHECK(fs::last_write_time(files.twitter) == stamp);
  cfg.seed = 7;
  const auto text_before = read_text_file(files.twitter);
  prepare_data(cfg, dir.path());
  CHECK(read_text_file(files.twitter) != text_before);
}
