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

#include <filesystem>

#include "doctest.h"
#include "evobench/catalog.hpp"
#include "evobench/engine.hpp"
#include "evobench/error.hpp"
#include "evobench/views.hpp"
#include "evobench/workload.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace evobench;
using namespace evobench::engine;
using namespace evobench::views;
namespace fs = std::filesystem;

namespace {

const std::vector<ColumnDef> kCols{{"id", ColumnType::Int}, {"score", ColumnType::Real}, {"name", ColumnType::Text}};

std::string fixture_body() {
  std::string body;
  for (int i = 0; i < 40; ++i) {
    body += "{\"id\":" + std::to_string(i % 7) + ",\"score\":" + std::to_string(i % 5) + ".5,\"name\":\"n" +
            std::to_string(i % 3) + "\"}\n";
  }
  return body;
}

struct Bench {
  evotest::TempDir dir{"views"};
  Catalog catalog{dir / "catalog"};

  Bench() { catalog.register_source("f", kCols, evotest::write_file(dir / "f.jsonl", fixture_body()), Backend::Loaded); }
};

struct Outcome {
  RewriteReport report;
  Table table;
  CaptureResult capture;
};

Outcome run(ViewStore& store, const Catalog& cat, const QueryPlan& plan) {
  auto rw = store.rewrite(plan, cat);
  ExecOptions opts;
  opts.retain_intermediates = true;
  const auto res = execute_plan(rw.plan, cat, opts);
  auto cap = store.capture(rw, res, cat, "test");
  return {rw.report, res.result.table, cap};
}

NodePtr base() { return scan("f", kCols); }

/// scan -> filter -> group_agg -> top_k: four nodes, three of them non-scan.
QueryPlan four_node(double threshold = 1.0) {
  return QueryPlan{top_k(group_agg(filter(base(), "score", Cmp::Gt, Value(threshold)), {"name"},
                                   {{AggFunc::Count, "", "n"}, {AggFunc::Sum, "score", "s"}}),
                         2, "n"),
                   "four"};
}

std::uint64_t data_bytes_on_disk(const ViewStore& store) {
  std::uint64_t total = 0;
  for (const auto& e : store.entries()) total += fs::file_size(e.path / "data.bin");
  return total;
}

}  // namespace

TEST_CASE("policy names") {
  CHECK(policy_from_string("none") == Policy::None);
  CHECK(policy_from_string("off") == Policy::None);
  CHECK(policy_from_string("all") == Policy::All);
  CHECK(policy_from_string("lru") == Policy::Lru);
  CHECK(to_string(Policy::All) == "all");
  CHECK_THROWS_AS(policy_from_string("some"), ValidationError);
}

TEST_CASE("policy NONE captures nothing and reuses nothing") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::None);
  run(store, b.catalog, four_node());
  const auto second = run(store, b.catalog, four_node());
  CHECK(store.size() == 0);
  CHECK(second.report.hits == 0);
  CHECK(store.storage_footprint() == 0);
}

TEST_CASE("policy ALL on a four node plan captures the three non-scan nodes") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  const auto first = run(store, b.catalog, four_node());
  CHECK(first.capture.added.size() == 3);
  CHECK(store.size() == 3);
  for (const auto& e : store.entries()) {
    CHECK(fs::exists(e.path / "data.bin"));
    const auto m = nlohmann::json::parse(read_text_file(e.path / "manifest.json"));
    CHECK(m.at("key").get<std::string>() == e.key);
    CHECK(e.size_bytes == fs::file_size(e.path / "data.bin"));
    CHECK(e.run_id == "test");
  }
}

TEST_CASE("capturing an identical subplan again is deduplicated") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  const auto plan = four_node();
  ExecOptions opts;
  opts.retain_intermediates = true;
  const auto res = execute_plan(plan, b.catalog, opts);
  CHECK(store.capture(plan, res, b.catalog, "a").added.size() == 3);
  const auto again = store.capture(plan, execute_plan(four_node(), b.catalog, opts), b.catalog, "b");
  CHECK(again.added.empty());
  CHECK(again.bytes_written == 0);
  CHECK(store.size() == 3);
}

TEST_CASE("exact replay reuses all non-scan work with identical results") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  const auto cold = run(store, b.catalog, four_node());
  CHECK(cold.report.hits == 0);
  CHECK(cold.report.coverage() == 0.0);
  const auto warm = run(store, b.catalog, four_node());
  CHECK(warm.report.hits == 1);
  CHECK(warm.report.coverage() == 1.0);
  CHECK(warm.report.non_scan_nodes == 3);
  CHECK(warm.report.non_scan_reused == 3);
  CHECK(warm.report.bytes_avoided > 0);
  CHECK(warm.table.rows == cold.table.rows);
  CHECK(warm.table.columns == cold.table.columns);
  CHECK(warm.capture.added.empty());
}

TEST_CASE("a narrower filter is served from a wider cached filter") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  run(store, b.catalog, QueryPlan{filter(base(), "score", Cmp::Gt, Value(1.0)), "wide"});
  const auto narrow = QueryPlan{filter(base(), "score", Cmp::Gt, Value(2.0)), "narrow"};
  const auto rw = store.rewrite(narrow, b.catalog);
  REQUIRE(rw.report.decisions.size() == 2);
  CHECK(rw.report.decisions[1].decision == Decision::ReusedSubsumed);
  CHECK(rw.report.hits == 1);
  const auto served = execute_plan(rw.plan, b.catalog).result.table;
  const auto cold = execute_plan(narrow, b.catalog).result.table;
  CHECK(same_multiset(served, cold));
  CHECK(cold.rows.size() > 0);

  // A wider request is not answerable from the narrower view.
  ViewStore other(b.dir / "views2", Policy::All);
  run(other, b.catalog, narrow);
  CHECK(other.rewrite(QueryPlan{filter(base(), "score", Cmp::Gt, Value(1.0)), "wide"}, b.catalog).report.hits == 0);
  // Less-than filters subsume in the other direction.
  run(other, b.catalog, QueryPlan{filter(base(), "score", Cmp::Lt, Value(3.0)), "lt"});
  const auto lt = other.rewrite(QueryPlan{filter(base(), "score", Cmp::Le, Value(2.0)), "le"}, b.catalog);
  CHECK(lt.report.hits == 0);
  const auto lt2 = other.rewrite(QueryPlan{filter(base(), "score", Cmp::Lt, Value(1.5)), "lt2"}, b.catalog);
  CHECK(lt2.report.hits == 1);
  CHECK(same_multiset(execute_plan(lt2.plan, b.catalog).result.table,
                      execute_plan(QueryPlan{filter(base(), "score", Cmp::Lt, Value(1.5)), "lt2"}, b.catalog)
                          .result.table));
}

TEST_CASE("subsumed rewrites agree with cold execution on random thresholds") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  for (double x : {0.0, 2.0, 1.0, 3.5, 0.5, 4.0}) {
    for (auto cmp : {Cmp::Gt, Cmp::Ge, Cmp::Lt, Cmp::Le}) {
      const auto plan = four_node(x);
      const auto p = QueryPlan{group_agg(filter(base(), "score", cmp, Value(x)), {"id"}, {{AggFunc::Count, "", "n"}}),
                               "g"};
      const auto warm = run(store, b.catalog, p);
      CHECK(same_multiset(warm.table, execute_plan(p, b.catalog).result.table));
      const auto warm4 = run(store, b.catalog, plan);
      CHECK(warm4.table.rows == execute_plan(plan, b.catalog).result.table.rows);
    }
  }
}

TEST_CASE("analyst 1 version 2 reuses the wine scores but not the stricter filter") {
  const auto params = workload::default_params();
  evotest::TempDir dir("views");
  Catalog cat(dir / "catalog");
  evotest::register_default(cat, Backend::Loaded);
  ViewStore store(dir / "views", Policy::All);
  run(store, cat, workload::build_query(1, 1, params));
  const auto v2 = workload::build_query(1, 2, params);
  const auto rw = store.rewrite(v2, cat);
  const auto nodes = v2.nodes();
  std::optional<std::size_t> wine_filter, wine_group;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i]->kind() == NodeKind::Filter && nodes[i]->as<FilterSpec>().column == "wine_score") {
      wine_filter = i;
      wine_group = std::find(nodes.begin(), nodes.end(), nodes[i]->child()) - nodes.begin();
    }
  }
  REQUIRE(wine_filter);
  CHECK(rw.report.decisions[*wine_filter].decision == Decision::Computed);
  CHECK(rw.report.decisions[*wine_group].decision == Decision::ReusedExact);
  CHECK(rw.report.hits >= 1);
  const auto warm = execute_plan(rw.plan, cat).result.table;
  CHECK(multiset_digest(warm) == multiset_digest(execute_plan(v2, cat).result.table));
}

TEST_CASE("a plan over a source no view mentions is left unchanged") {
  Bench b;
  evotest::write_file(b.dir / "g.jsonl", fixture_body());
  b.catalog.register_source("g", kCols, b.dir / "g.jsonl", Backend::Raw);
  ViewStore store(b.dir / "views", Policy::All);
  run(store, b.catalog, four_node());
  const auto other = QueryPlan{filter(scan("g", kCols), "score", Cmp::Gt, Value(1.0)), "g"};
  const auto rw = store.rewrite(other, b.catalog);
  CHECK(rw.report.hits == 0);
  CHECK(rw.plan.sink == other.sink);
}

TEST_CASE("footprint equals the stored data sizes and resets to zero") {
  Bench b;
  ViewStore store(b.dir / "views", Policy::All);
  CHECK(store.storage_footprint() == 0);
  run(store, b.catalog, four_node());
  run(store, b.catalog, four_node(3.0));
  CHECK(store.size() == 6);
  CHECK(store.storage_footprint() == data_bytes_on_disk(store));
  CHECK(store.storage_footprint() > 0);
  store.reset();
  CHECK(store.storage_footprint() == 0);
  CHECK(store.size() == 0);
  CHECK(fs::is_empty(b.dir / "views"));
}

TEST_CASE("views are never served after the source is re-registered") {
  evotest::TempDir dir("views");
  const auto file = evotest::write_file(dir / "f.jsonl", fixture_body());
  Catalog cat(dir / "catalog");
  cat.register_source("f", kCols, file, Backend::Loaded);
  ViewStore store(dir / "views", Policy::All);
  run(store, cat, four_node());
  cat.reset();
  evotest::write_file(dir / "f.jsonl", "{\"id\":1,\"score\":9.5,\"name\":\"z\"}\n");
  cat.register_source("f", kCols, file, Backend::Loaded);
  const auto after = run(store, cat, four_node());
  CHECK(after.report.hits == 0);
  REQUIRE(after.table.rows.size() == 1);
  CHECK(after.table.rows[0][0] == Value("z"));
}

TEST_CASE("LRU keeps the store within its byte budget") {
  Bench b;
  ViewStore probe(b.dir / "probe", Policy::All);
  run(probe, b.catalog, four_node());
  const auto one_plan = probe.storage_footprint();

  ViewStore store(b.dir / "views", Policy::Lru, one_plan);
  run(store, b.catalog, four_node(0.0));
  run(store, b.catalog, four_node());
  CHECK(store.storage_footprint() <= one_plan);
  CHECK(store.storage_footprint() == data_bytes_on_disk(store));
  for (const auto& e : store.entries()) CHECK(fs::exists(e.path / "data.bin"));
  // The most recent plan survived eviction.
  CHECK(run(store, b.catalog, four_node()).report.hits == 1);

  std::size_t on_disk = 0;
  for (const auto& d : fs::directory_iterator(b.dir / "views")) on_disk += d.is_directory();
  CHECK(on_disk == store.size());
}

TEST_CASE("a fresh store starts empty even over an old directory") {
  Bench b;
  {
    ViewStore store(b.dir / "views", Policy::All);
    run(store, b.catalog, four_node());
  }
  ViewStore again(b.dir / "views", Policy::All);
  CHECK(again.size() == 0);
  CHECK(run(again, b.catalog, four_node()).report.hits == 0);
}
