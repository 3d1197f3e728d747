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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "evobench/catalog.hpp"
#include "evobench/engine.hpp"
#include "evobench/error.hpp"
#include "test_support.hpp"

using namespace evobench;
using namespace evobench::engine;

namespace {

const std::vector<ColumnDef> kCols{{"id", ColumnType::Int}, {"score", ColumnType::Int}, {"name", ColumnType::Text}};

struct Fixture {
  evotest::TempDir dir{"engine"};
  Catalog catalog{dir / "catalog"};

  explicit Fixture(const std::string& body = "{\"id\":1,\"score\":0,\"name\":\"a\"}\n"
                                             "{\"id\":2,\"score\":1,\"name\":\"b\"}\n"
                                             "{\"id\":3,\"score\":2,\"name\":\"c\"}\n",
                   Backend backend = Backend::Loaded) {
    catalog.register_source("f", kCols, evotest::write_file(dir / "f.jsonl", body), backend);
  }

  Table run(const NodePtr& sink, const ExecOptions& opts = {}) const {
    return execute_plan(QueryPlan{sink, "t"}, catalog, opts).result.table;
  }
};

NodePtr base() { return scan("f", kCols); }

}  // namespace

TEST_CASE("scan-only plan returns the fixture verbatim") {
  Fixture fx;
  const auto t = fx.run(base());
  CHECK(t.columns == kCols);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0] == Row{Value(1), Value(0), Value("a")});
  CHECK(t.rows[2] == Row{Value(3), Value(2), Value("c")});
}

TEST_CASE("filter score > 1 keeps exactly the score-2 row") {
  Fixture fx;
  const auto t = fx.run(filter(base(), "score", Cmp::Gt, Value(1)));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == Value(2));
}

TEST_CASE("group count over empty input is empty") {
  Fixture fx("");
  const auto t = fx.run(group_agg(base(), {"name"}, {{AggFunc::Count, "", "n"}}));
  CHECK(t.rows.empty());
  CHECK(t.columns.size() == 2);
  CHECK(fx.run(global_agg(base(), {AggFunc::Count, "", "n"})).rows.empty());
}

TEST_CASE("top_k returns min(k, n) rows ordered with smallest-row ties") {
  Fixture fx("{\"id\":5,\"score\":1,\"name\":\"a\"}\n{\"id\":4,\"score\":1,\"name\":\"b\"}\n"
             "{\"id\":6,\"score\":0,\"name\":\"c\"}\n");
  for (std::size_t k : {0, 1, 2, 3, 4, 10}) CHECK(fx.run(top_k(base(), k, "score")).rows.size() == std::min<std::size_t>(k, 3));
  const auto t = fx.run(top_k(base(), 2, "score"));
  CHECK(t.rows[0][0] == Value(4));
  CHECK(t.rows[1][0] == Value(5));
  CHECK(fx.run(top_k(base(), 1, "score", false)).rows[0][0] == Value(6));
}

TEST_CASE("argmax per group breaks ties by the smallest row") {
  Fixture fx("{\"id\":9,\"score\":3,\"name\":\"a\"}\n{\"id\":7,\"score\":3,\"name\":\"a\"}\n"
             "{\"id\":8,\"score\":1,\"name\":\"a\"}\n{\"id\":1,\"score\":null,\"name\":\"b\"}\n");
  const auto t = fx.run(argmax_per_group(base(), {"name"}, "score"));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][0] == Value(7));
}

TEST_CASE("time window with every record in the recent month has ratio one") {
  const std::int64_t ref = ExecOptions{}.reference_time;
  std::string body;
  for (int i = 0; i < 5; ++i) {
    body += "{\"id\":" + std::to_string(i % 2) + ",\"score\":" + std::to_string(ref - 3600 * (i + 1)) +
            ",\"name\":\"x\"}\n";
  }
  Fixture fx(body);
  TimeWindowSpec w;
  w.keys = {"id"};
  w.timestamp = "score";
  w.history_months = 6;
  w.recent_months = 1;
  const auto t = fx.run(filter_ratio(time_window(base(), w), "hist_avg", "recent_count", Cmp::Eq, 1.0));
  REQUIRE(t.rows.size() == 2);
  std::int64_t total = 0;
  for (const auto& r : t.rows) {
    CHECK(r[2].as_real() == static_cast<double>(r[1].as_int()));
    total += r[1].as_int();
  }
  CHECK(total == 5);
}

TEST_CASE("time window ignores records after the reference time") {
  const std::int64_t ref = ExecOptions{}.reference_time;
  Fixture fx("{\"id\":1,\"score\":" + std::to_string(ref + 10) + ",\"name\":\"x\"}\n" +
             "{\"id\":1,\"score\":" + std::to_string(ref - 2 * kMonthSeconds - 5) + ",\"name\":\"x\"}\n");
  TimeWindowSpec w;
  w.keys = {"id"};
  w.timestamp = "score";
  const auto t = fx.run(time_window(base(), w));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == Value(0));
  CHECK(t.rows[0][2] == Value(1.0));
}

TEST_CASE("ratio filters treat a zero denominator as infinity") {
  Fixture fx("{\"id\":4,\"score\":0,\"name\":\"a\"}\n{\"id\":4,\"score\":2,\"name\":\"b\"}\n");
  const auto gt = fx.run(filter_ratio(base(), "id", "score", Cmp::Gt, 1e300));
  REQUIRE(gt.rows.size() == 1);
  CHECK(gt.rows[0][2] == Value("a"));
  CHECK(fx.run(filter_ratio(base(), "id", "score", Cmp::Lt, 3.0)).rows.size() == 1);
  CHECK(fx.run(filter_ratio(base(), "id", "score", Cmp::Eq, std::numeric_limits<double>::infinity())).rows.size() ==
        1);
}

TEST_CASE("join matches keys numerically and skips null keys") {
  Fixture fx("{\"id\":1,\"score\":1,\"name\":\"a\"}\n{\"id\":2,\"score\":null,\"name\":\"b\"}\n");
  const auto right = project(base(), {{"score", "s2"}, {"name", "n2"}});
  const auto t = fx.run(join(base(), right, {{"id", "s2"}}));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0] == Row{Value(1), Value(1), Value("a"), Value("a")});
  CHECK(fx.run(join(base(), right, {})).rows.size() == 4);
}

TEST_CASE("pair generation counts messages in both directions") {
  Fixture fx("{\"id\":1,\"score\":2,\"name\":\"x\"}\n{\"id\":2,\"score\":1,\"name\":\"x\"}\n"
             "{\"id\":1,\"score\":2,\"name\":\"x\"}\n{\"id\":3,\"score\":3,\"name\":\"x\"}\n"
             "{\"id\":1,\"score\":null,\"name\":\"x\"}\n");
  PairGenSpec p;
  p.a = "id";
  p.b = "score";
  const auto sym = fx.run(pair_gen(base(), p));
  REQUIRE(sym.rows.size() == 2);
  CHECK(sym.rows[0] == Row{Value(1), Value(2), Value(3)});
  CHECK(sym.rows[1] == Row{Value(2), Value(1), Value(3)});
  p.symmetric = false;
  CHECK(fx.run(pair_gen(base(), p)).rows.size() == 2);
}

TEST_CASE("co-occurrence counts shared groups") {
  Fixture fx("{\"id\":1,\"score\":10,\"name\":\"u\"}\n{\"id\":2,\"score\":10,\"name\":\"u\"}\n"
             "{\"id\":1,\"score\":20,\"name\":\"v\"}\n{\"id\":2,\"score\":20,\"name\":\"v\"}\n"
             "{\"id\":3,\"score\":20,\"name\":\"v\"}\n");
  PairGenSpec p;
  p.mode = PairMode::CoOccur;
  p.a = "score";
  p.b = "id";
  const auto t = fx.run(pair_gen(base(), p));
  CHECK(t.rows.size() == 6);
  for (const auto& r : t.rows) {
    const bool both = (r[0] == Value(1) || r[0] == Value(2)) && (r[1] == Value(1) || r[1] == Value(2));
    CHECK(r[2] == Value(both ? 2 : 1));
  }
}

TEST_CASE("aggregates skip nulls") {
  Fixture fx("{\"id\":1,\"score\":4,\"name\":\"a\"}\n{\"id\":1,\"score\":null,\"name\":\"a\"}\n"
             "{\"id\":1,\"score\":2,\"name\":\"b\"}\n");
  const auto t = fx.run(group_agg(base(), {"id"},
                                  {{AggFunc::Count, "", "n"}, {AggFunc::Sum, "score", "s"}, {AggFunc::Avg, "score", "a"},
                                   {AggFunc::Max, "name", "m"}, {AggFunc::CountDistinct, "name", "d"},
                                   {AggFunc::Histogram, "name", "h"}}));
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0] == Row{Value(1), Value(3), Value(6), Value(3.0), Value("b"), Value(2), Value("a:2;b:1")});
}

TEST_CASE("udf maps over the shipped lexicons") {
  Fixture fx("{\"id\":1,\"score\":0,\"name\":\"merlot and cabernet\"}\n{\"id\":2,\"score\":0,\"name\":null}\n");
  const auto t = fx.run(map_udf(base(), {UdfKind::ClassifyScore, "wine"}, {"name"}, {"w"}));
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][3] == Value(2.0));
  CHECK(t.rows[1][3] == Value(0.0));
  const auto u = fx.run(group_udaf(base(), {}, {UdfKind::ClassifyUser, "wine", "", 2}, "name", "flag"));
  REQUIRE(u.rows.size() == 1);
  CHECK(u.rows[0][0] == Value(1));
}

TEST_CASE("errors: missing sources and columns are catalog errors") {
  Fixture fx;
  CHECK_THROWS_AS(fx.run(scan("nope", kCols)), CatalogError);
  CHECK_THROWS_AS(fx.run(scan("f", {{"absent", ColumnType::Int}})), CatalogError);
  CHECK_THROWS_AS(fx.run(scan("f", {{"name", ColumnType::Int}})), PlanError);
  CHECK_THROWS_AS(fx.run(filter(base(), "missing", Cmp::Gt, Value(1))), PlanError);
  CHECK_THROWS_AS(execute_plan(QueryPlan{nullptr, "empty"}, fx.catalog), PlanError);
  CHECK_THROWS_AS(fx.run(group_udaf(base(), {}, {UdfKind::Sentiment, "sentiment"}, "name", "x")), PlanError);
}

TEST_CASE("stats and retained intermediates") {
  Fixture fx;
  const auto f = filter(base(), "score", Cmp::Ge, Value(1));
  const auto sink = group_agg(f, {}, {{AggFunc::Count, "", "n"}});
  ExecOptions opts;
  opts.retain_intermediates = true;
  const auto res = execute_plan(QueryPlan{sink, "s"}, fx.catalog, opts);
  CHECK(res.stats.nodes_executed == 3);
  CHECK(res.stats.rows_read == 3);
  CHECK(res.stats.bytes_read > 0);
  CHECK(res.intermediates.size() == 3);
  CHECK(res.intermediates.at(f.get())->rows.size() == 2);
  CHECK(res.result.table.rows[0][0] == Value(2));
  CHECK(res.result.plan_signature == canonicalize(sink).key());
  CHECK(execute_plan(QueryPlan{sink, "s"}, fx.catalog).intermediates.empty());
}

TEST_CASE("results are deterministic and backend independent") {
  Fixture loaded;
  Fixture raw("{\"id\":1,\"score\":0,\"name\":\"a\"}\n{\"id\":2,\"score\":1,\"name\":\"b\"}\n"
              "{\"id\":3,\"score\":2,\"name\":\"c\"}\n",
              Backend::Raw);
  const auto plan = group_agg(base(), {"name"}, {{AggFunc::Sum, "score", "s"}});
  CHECK(multiset_digest(loaded.run(plan)) == multiset_digest(loaded.run(plan)));
  CHECK(multiset_digest(loaded.run(plan)) == multiset_digest(raw.run(plan)));
}
