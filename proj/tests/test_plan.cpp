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

#include "doctest.h"
#include "evobench/catalog.hpp"
#include "evobench/error.hpp"
#include "evobench/plan.hpp"
#include "evobench/workload.hpp"
#include "test_support.hpp"

using namespace evobench;
using namespace evobench::engine;

namespace {

NodePtr users() { return scan("u", {{"id", ColumnType::Int}, {"name", ColumnType::Text}, {"score", ColumnType::Real}}); }
NodePtr visits() { return scan("v", {{"uid", ColumnType::Int}, {"place", ColumnType::Text}}); }

bool mentions(const std::vector<Diagnostic>& diags, const std::string& needle) {
  for (const auto& d : diags) {
    if (d.message.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("join input order does not change the signature") {
  const auto ab = join(users(), visits(), {{"id", "uid"}});
  const auto ba = join(visits(), users(), {{"uid", "id"}});
  CHECK(canonicalize(ab) == canonicalize(ba));
  CHECK(canonicalize(ab).key() == canonicalize(ba).key());
  CHECK(canonicalize(ab).key().size() == 16);
}

TEST_CASE("rebuilding a plan gives the same signature") {
  const auto a = filter(group_agg(users(), {"name"}, {{AggFunc::Count, "", "n"}}), "n", Cmp::Gt, Value(2));
  const auto b = filter(group_agg(users(), {"name"}, {{AggFunc::Count, "", "n"}}), "n", Cmp::Gt, Value(2));
  CHECK(a.get() != b.get());
  CHECK(canonicalize(a) == canonicalize(b));
  CHECK(canonicalize(with_label(a, "renamed")) == canonicalize(a));
}

TEST_CASE("filter constants are lifted into slots") {
  const auto lo = filter(users(), "score", Cmp::Gt, Value(1.0));
  const auto hi = filter(users(), "score", Cmp::Gt, Value(3));
  const auto s1 = canonicalize(lo), s2 = canonicalize(hi);
  CHECK(s1.text == s2.text);
  CHECK(s1.text.find('?') != std::string::npos);
  REQUIRE(s1.slots.size() == 1);
  REQUIRE(s2.slots.size() == 1);
  CHECK(s1.slots[0].constant == 1.0);
  CHECK(s2.slots[0].constant == 3.0);
  CHECK(s1.slots[0].cmp == Cmp::Gt);
  CHECK(s1.slots[0].node == 1);
  CHECK(s1 != s2);
  // Comparators and string constants are structure, not slots.
  CHECK(canonicalize(filter(users(), "score", Cmp::Lt, Value(1.0))).text != s1.text);
  const auto named = canonicalize(filter(users(), "name", Cmp::Eq, Value("x")));
  CHECK(named.slots.empty());
  CHECK(named.text != canonicalize(filter(users(), "name", Cmp::Eq, Value("y"))).text);
}

TEST_CASE("scan column order does not change the signature") {
  const auto a = scan("u", {{"id", ColumnType::Int}, {"name", ColumnType::Text}});
  const auto b = scan("u", {{"name", ColumnType::Text}, {"id", ColumnType::Int}});
  CHECK(canonicalize(a).text == canonicalize(b).text);
}

TEST_CASE("output columns follow operator rules") {
  const auto j = join(users(), visits(), {{"id", "uid"}});
  const auto cols = output_columns(j);
  REQUIRE(cols.size() == 4);
  CHECK(cols[0].name == "id");
  CHECK(cols[3].name == "place");
  const auto g = group_agg(users(), {"name"},
                           {{AggFunc::Count, "", "n"}, {AggFunc::Sum, "id", "s"}, {AggFunc::Avg, "id", "a"},
                            {AggFunc::Max, "name", "m"}, {AggFunc::Histogram, "name", "h"}});
  const auto gc = output_columns(g);
  REQUIRE(gc.size() == 6);
  CHECK(gc[1].type == ColumnType::Int);
  CHECK(gc[2].type == ColumnType::Int);
  CHECK(gc[3].type == ColumnType::Real);
  CHECK(gc[4].type == ColumnType::Text);
  CHECK(gc[5].type == ColumnType::Histogram);
  CHECK_THROWS_AS(output_columns(filter(users(), "missing", Cmp::Gt, Value(1))), PlanError);
  CHECK_THROWS_AS(output_columns(join(users(), users(), {{"id", "id"}})), PlanError);
}

TEST_CASE("validate_plan reports sources and columns") {
  evotest::TempDir dir("plan");
  const auto file = evotest::write_file(dir / "u.jsonl", "{\"id\":1,\"name\":\"a\",\"score\":1.5}\n");
  Catalog cat(dir / "catalog");
  cat.register_source("u", {{"id", ColumnType::Int}, {"name", ColumnType::Text}}, file, Backend::Raw);

  CHECK(validate_plan(QueryPlan{filter(scan("u", {{"id", ColumnType::Int}}), "id", Cmp::Gt, Value(0)), "ok"}, cat)
            .empty());

  const auto missing_source = validate_plan(QueryPlan{visits(), "missing"}, cat);
  REQUIRE_FALSE(missing_source.empty());
  CHECK(mentions(missing_source, "'v'"));

  const auto missing_column = validate_plan(QueryPlan{users(), "col"}, cat);
  CHECK(mentions(missing_column, "score"));

  const auto wrong_type = validate_plan(QueryPlan{scan("u", {{"id", ColumnType::Text}}), "type"}, cat);
  CHECK_FALSE(wrong_type.empty());
}

TEST_CASE("a filter on a column produced only downstream is an ordering diagnostic") {
  const auto base = scan("u", {{"id", ColumnType::Int}, {"name", ColumnType::Text}});
  const auto early = filter(base, "n", Cmp::Gt, Value(1));
  const auto late = group_agg(early, {"name"}, {{AggFunc::Count, "", "n"}});
  const auto diags = validate_structure(QueryPlan{late, "bad"});
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].message.find("used before it is produced") != std::string::npos);
  CHECK(diags[0].message.find("group_agg") != std::string::npos);
  CHECK(diags[0].node.find("filter") != std::string::npos);
}

TEST_CASE("every workload plan is structurally valid and validates against the default catalog") {
  const auto& cat = evotest::default_catalog(Backend::Raw);
  const auto params = workload::default_params();
  for (int a = 1; a <= workload::kAnalysts; ++a) {
    for (int v = 1; v <= workload::kVersions; ++v) {
      const auto plan = workload::build_query(a, v, params);
      const auto diags = validate_plan(plan, cat);
      for (const auto& d : diags) MESSAGE(plan.name << " " << d.node << ": " << d.message);
      CHECK(diags.empty());
    }
  }
}

TEST_CASE("dump_plan prints one node per line") {
  const auto shared = users();
  const auto plan = QueryPlan{join(filter(shared, "score", Cmp::Ge, Value(2.5)),
                                   project(shared, {{"id", "id2"}}), {{"id", "id2"}}),
                              "demo"};
  const auto text = dump_plan(plan);
  CHECK(text.rfind(";; demo\n", 0) == 0);
  CHECK(text.find("filter(score>=2.5)") != std::string::npos);
  CHECK(text.find("(ref #") != std::string::npos);
  std::size_t open = 0, close = 0;
  for (char c : text) {
    open += c == '(';
    close += c == ')';
  }
  CHECK(open == close);
}

TEST_CASE("topological order lists children before parents once") {
  const auto s = users();
  const auto sink = join(filter(s, "id", Cmp::Gt, Value(1)), project(s, {{"id", "k"}}), {{"id", "k"}});
  const auto order = topo_nodes(sink);
  CHECK(order.size() == 4);
  CHECK(order.front() == s);
  CHECK(order.back() == sink);
}

TEST_CASE("compare handles nulls, numbers, strings and mixed types") {
  CHECK_FALSE(compare(Value(), Cmp::Eq, Value()));
  CHECK_FALSE(compare(Value(), Cmp::Ne, Value(1)));
  CHECK(compare(Value(2), Cmp::Gt, Value(1.5)));
  CHECK(compare(Value(2), Cmp::Eq, Value(2.0)));
  CHECK(compare(Value("a"), Cmp::Lt, Value("b")));
  CHECK(compare(Value("a"), Cmp::Ne, Value(1)));
  CHECK_FALSE(compare(Value("a"), Cmp::Lt, Value(1)));
}
