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

#include "evobench/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "evobench/catalog.hpp"
#include "evobench/error.hpp"

namespace evobench::engine {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<std::size_t> indices(const Table& t, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(t.require_column(n));
  return out;
}

Row pick(const Row& row, const std::vector<std::size_t>& idx) {
  Row out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(row[i]);
  return out;
}

/// Join keys compare numerically regardless of int/real storage.
Value key_value(const Value& v) { return v.is_numeric() ? Value(v.to_double()) : v; }

const udf::LexiconSet& lexicons(const ExecOptions& o) {
  return o.lexicons ? *o.lexicons : udf::default_lexicons();
}

std::string text_of(const Value& v) { return v.is_string() ? v.as_string() : std::string(); }

std::set<std::string> token_set(const Value& v) {
  auto tokens = udf::tokenize(text_of(v));
  return {tokens.begin(), tokens.end()};
}

// ---------------------------------------------------------------------------

Table run_filter(const FilterSpec& f, const Table& in) {
  Table out;
  out.columns = in.columns;
  const std::size_t ci = in.require_column(f.column);
  const std::optional<std::size_t> di =
      f.divisor.empty() ? std::nullopt : std::optional<std::size_t>(in.require_column(f.divisor));
  const std::optional<std::size_t> ri =
      f.rhs_column.empty() ? std::nullopt : std::optional<std::size_t>(in.require_column(f.rhs_column));
  for (const auto& row : in.rows) {
    Value lhs = row[ci];
    if (di) {
      const Value& den = row[*di];
      if (lhs.is_null() || den.is_null()) continue;
      const double d = den.to_double();
      lhs = Value(d == 0 ? std::numeric_limits<double>::infinity() : lhs.to_double() / d);
    }
    const Value& rhs = ri ? row[*ri] : f.constant;
    if (compare(lhs, f.cmp, rhs)) out.rows.push_back(row);
  }
  return out;
}

Table run_map_udf(const MapUdfSpec& m, const Table& in, const ExecOptions& opts) {
  Table out;
  out.columns = in.columns;
  const auto idx = indices(in, m.inputs);
  const auto& lex = lexicons(opts);
  switch (m.udf.kind) {
    case UdfKind::ClassifyScore:
    case UdfKind::Sentiment: {
      const udf::Lexicon& l = lex.get(m.udf.lexicon);
      out.columns.push_back({m.outputs.at(0), ColumnType::Real});
      for (const auto& row : in.rows) {
        Row r = row;
        r.emplace_back(udf::classify_text_score(text_of(row[idx[0]]), l));
        out.rows.push_back(std::move(r));
      }
      break;
    }
    case UdfKind::GridCell: {
      const udf::GridSpec grid(m.udf.param);
      out.columns.push_back({m.outputs.at(0), ColumnType::Int});
      for (const auto& row : in.rows) {
        Row r = row;
        const Value& lat = row[idx[0]];
        const Value& lon = row[idx[1]];
        if (lat.is_null() || lon.is_null()) {
          r.emplace_back(Null{});
        } else {
          r.emplace_back(static_cast<std::int64_t>(udf::grid_cell(lat.to_double(), lon.to_double(), grid)));
        }
        out.rows.push_back(std::move(r));
      }
      break;
    }
    case UdfKind::MenuSimilarity: {
      out.columns.push_back({m.outputs.at(0), ColumnType::Real});
      for (const auto& row : in.rows) {
        Row r = row;
        r.emplace_back(udf::menu_similarity(token_set(row[idx[0]]), token_set(row[idx[1]])));
        out.rows.push_back(std::move(r));
      }
      break;
    }
    case UdfKind::EntitySentiment: {
      const udf::Lexicon& entities = lex.get(m.udf.lexicon);
      const udf::Lexicon& sentiment = lex.get(m.udf.lexicon2);
      out.columns.push_back({m.outputs.at(0), ColumnType::Text});
      out.columns.push_back({m.outputs.at(1), ColumnType::Real});
      const auto window = static_cast<std::size_t>(std::max(0.0, m.udf.param));
      for (const auto& row : in.rows) {
        for (const auto& es : udf::entity_sentiment(text_of(row[idx[0]]), entities, sentiment, window)) {
          Row r = row;
          r.emplace_back(es.entity);
          r.emplace_back(es.score);
          out.rows.push_back(std::move(r));
        }
      }
      break;
    }
    case UdfKind::GridDistance: {
      const udf::GridSpec grid(m.udf.param);
      out.columns.push_back({m.outputs.at(0), ColumnType::Int});
      for (const auto& row : in.rows) {
        Row r = row;
        const Value& a = row[idx[0]];
        const Value& b = row[idx[1]];
        if (!a.is_int() || !b.is_int()) {
          r.emplace_back(Null{});
        } else {
          r.emplace_back(static_cast<std::int64_t>(udf::grid_distance(
              static_cast<std::uint64_t>(a.as_int()), static_cast<std::uint64_t>(b.as_int()), grid)));
        }
        out.rows.push_back(std::move(r));
      }
      break;
    }
    case UdfKind::HistogramOverlap: {
      out.columns.push_back({m.outputs.at(0), ColumnType::Real});
      for (const auto& row : in.rows) {
        Row r = row;
        const Value& a = row[idx[0]];
        const Value& b = row[idx[1]];
        if (a.is_null() || b.is_null()) {
          r.emplace_back(Null{});
        } else {
          r.emplace_back(udf::histogram_intersection(decode_histogram(text_of(a)), decode_histogram(text_of(b))));
        }
        out.rows.push_back(std::move(r));
      }
      break;
    }
    case UdfKind::ClassifyUser:
      throw PlanError("classify_user must run as a group_udaf");
  }
  return out;
}


/// Running state of one aggregate within one group.
struct Accumulator {
  AggFunc func{AggFunc::Count};
  ColumnType type{ColumnType::Int};
  std::int64_t count{0};
  std::int64_t isum{0};
  double dsum{0};
  std::optional<Value> best;
  std::set<Value> distinct;
  std::map<std::string, std::int64_t> bins;

  void add(const Value& v) {
    if (func == AggFunc::Count) {
      ++count;
      return;
    }
    if (v.is_null()) return;
    ++count;
    switch (func) {
      case AggFunc::Sum:
      case AggFunc::Avg:
        if (type == ColumnType::Int && func == AggFunc::Sum) {
          isum += v.as_int();
        } else {
          dsum += v.to_double();
        }
        break;
      case AggFunc::Max:
        if (!best || *best < v) best = v;
        break;
      case AggFunc::Min:
        if (!best || v < *best) best = v;
        break;
      case AggFunc::CountDistinct:
        distinct.insert(v);
        break;
      case AggFunc::Histogram:
        ++bins[v.to_string()];
        break;
      case AggFunc::Count:
        break;
    }
  }

  Value result() const {
    switch (func) {
      case AggFunc::Count: return Value(count);
      case AggFunc::Sum:
        if (count == 0) return Null{};
        return type == ColumnType::Int ? Value(isum) : Value(dsum);
      case AggFunc::Avg: return count == 0 ? Value(Null{}) : Value(dsum / static_cast<double>(count));
      case AggFunc::Max:
      case AggFunc::Min: return best ? *best : Value(Null{});
      case AggFunc::CountDistinct: return Value(static_cast<std::int64_t>(distinct.size()));
      case AggFunc::Histogram: return count == 0 ? Value(Null{}) : Value(encode_histogram(bins));
    }
    return Null{};
  }
};

struct AggInput {
  AggSpec spec;
  std::optional<std::size_t> column;
  ColumnType type{ColumnType::Int};
};

std::vector<AggInput> agg_inputs(const Table& in, const std::vector<AggSpec>& aggs) {
  std::vector<AggInput> out;
  for (const auto& a : aggs) {
    AggInput ai{a, std::nullopt, ColumnType::Int};
    if (a.func != AggFunc::Count) {
      ai.column = in.require_column(a.input);
      ai.type = in.columns[*ai.column].type;
    }
    out.push_back(ai);
  }
  return out;
}

std::vector<Accumulator> fresh(const std::vector<AggInput>& inputs) {
  std::vector<Accumulator> accs;
  for (const auto& ai : inputs) {
    Accumulator a;
    a.func = ai.spec.func;
    a.type = ai.type;
    accs.push_back(std::move(a));
  }
  return accs;
}

ColumnType agg_type(const AggInput& ai) {
  switch (ai.spec.func) {
    case AggFunc::Count:
    case AggFunc::CountDistinct: return ColumnType::Int;
    case AggFunc::Sum: return ai.type == ColumnType::Int ? ColumnType::Int : ColumnType::Real;
    case AggFunc::Avg: return ColumnType::Real;
    case AggFunc::Max:
    case AggFunc::Min: return ai.type;
    case AggFunc::Histogram: return ColumnType::Histogram;
  }
  return ColumnType::Int;
}

/// Groups rows by key, preserving first-appearance order of groups.
template <class State, class Init, class Step>
std::vector<std::pair<Row, State>> group_by(const Table& in, const std::vector<std::size_t>& keys, Init init,
                                            Step step) {
  std::unordered_map<Row, std::size_t, RowHash> index;
  std::vector<std::pair<Row, State>> groups;
  for (const auto& row : in.rows) {
    Row k = pick(row, keys);
    auto it = index.find(k);
    if (it == index.end()) {
      it = index.emplace(k, groups.size()).first;
      groups.emplace_back(std::move(k), init());
    }
    step(groups[it->second].second, row);
  }
  return groups;
}

Table run_group_agg(const GroupAggSpec& g, const Table& in) {
  Table out;
  const auto keys = indices(in, g.keys);
  for (auto k : keys) out.columns.push_back(in.columns[k]);
  const auto inputs = agg_inputs(in, g.aggs);
  for (const auto& ai : inputs) out.columns.push_back({ai.spec.output, agg_type(ai)});
  auto groups = group_by<std::vector<Accumulator>>(
      in, keys, [&] { return fresh(inputs); },
      [&](std::vector<Accumulator>& accs, const Row& row) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          accs[i].add(inputs[i].column ? row[*inputs[i].column] : Value(Null{}));
        }
      });
  for (auto& [key, accs] : groups) {
    Row r = key;
    for (const auto& a : accs) r.push_back(a.result());
    out.rows.push_back(std::move(r));
  }
  return out;
}

Table run_group_udaf(const GroupUdafSpec& g, const Table& in, const ExecOptions& opts) {
  if (g.udf.kind != UdfKind::ClassifyUser) throw PlanError(g.udf.id() + " is not an aggregate");
  const udf::Lexicon& lex = lexicons(opts).get(g.udf.lexicon);
  Table out;
  const auto keys = indices(in, g.keys);
  for (auto k : keys) out.columns.push_back(in.columns[k]);
  out.columns.push_back({g.output, ColumnType::Int});
  const std::size_t ti = in.require_column(g.input);
  auto groups = group_by<std::vector<std::string>>(
      in, keys, [] { return std::vector<std::string>{}; },
      [&](std::vector<std::string>& texts, const Row& row) { texts.push_back(text_of(row[ti])); });
  for (auto& [key, texts] : groups) {
    Row r = key;
    r.emplace_back(static_cast<std::int64_t>(udf::classify_user_binary(texts, lex, g.udf.param) ? 1 : 0));
    out.rows.push_back(std::move(r));
  }
  return out;
}

Table run_join(const JoinSpec& j, const Table& left, const Table& right) {
  Table out;
  out.columns = left.columns;
  std::vector<std::size_t> lk;
  std::vector<std::size_t> rk;
  std::set<std::size_t> drop;
  for (const auto& [l, r] : j.keys) {
    lk.push_back(left.require_column(l));
    rk.push_back(right.require_column(r));
    drop.insert(rk.back());
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < right.columns.size(); ++i) {
    if (drop.count(i)) continue;
    if (out.column_index(right.columns[i].name)) {
      throw PlanError("join output column '" + right.columns[i].name + "' is ambiguous");
    }
    keep.push_back(i);
    out.columns.push_back(right.columns[i]);
  }
  auto key_of = [](const Row& row, const std::vector<std::size_t>& idx, bool& has_null) {
    Row k;
    k.reserve(idx.size());
    has_null = false;
    for (auto i : idx) {
      has_null = has_null || row[i].is_null();
      k.push_back(key_value(row[i]));
    }
    return k;
  };
  std::unordered_map<Row, std::vector<std::size_t>, RowHash> table;
  for (std::size_t i = 0; i < right.rows.size(); ++i) {
    bool null_key = false;
    Row k = key_of(right.rows[i], rk, null_key);
    if (!null_key) table[std::move(k)].push_back(i);
  }
  for (const auto& lrow : left.rows) {
    bool null_key = false;
    Row k = key_of(lrow, lk, null_key);
    if (null_key) continue;
    auto it = table.find(k);
    if (it == table.end()) continue;
    for (auto ri : it->second) {
      Row r = lrow;
      for (auto c : keep) r.push_back(right.rows[ri][c]);
      out.rows.push_back(std::move(r));
    }
  }
  return out;
}

Table run_pair_gen(const PairGenSpec& p, const Table& in) {
  Table out;
  const std::size_t ai = in.require_column(p.a);
  const std::size_t bi = in.require_column(p.b);
  std::map<std::pair<Value, Value>, std::int64_t> counts;
  if (p.mode == PairMode::Edge) {
    out.columns = {{p.out_a, in.columns[ai].type}, {p.out_b, in.columns[bi].type}, {p.out_count, ColumnType::Int}};
    for (const auto& row : in.rows) {
      const Value& a = row[ai];
      const Value& b = row[bi];
      if (a.is_null() || b.is_null() || a == b) continue;
      if (p.symmetric && b < a) {
        ++counts[{b, a}];
      } else {
        ++counts[{a, b}];
      }
    }
    for (const auto& [pair, c] : counts) {
      out.rows.push_back({pair.first, pair.second, Value(c)});
      if (p.symmetric) out.rows.push_back({pair.second, pair.first, Value(c)});
    }
  } else {
    out.columns = {{p.out_a, in.columns[bi].type}, {p.out_b, in.columns[bi].type}, {p.out_count, ColumnType::Int}};
    std::map<Value, std::set<Value>> items;
    for (const auto& row : in.rows) {
      if (row[ai].is_null() || row[bi].is_null()) continue;
      items[row[ai]].insert(row[bi]);
    }
    for (const auto& [group, set] : items) {
      for (const auto& x : set) {
        for (const auto& y : set) {
          if (!(x == y)) ++counts[{x, y}];
        }
      }
    }
    for (const auto& [pair, c] : counts) out.rows.push_back({pair.first, pair.second, Value(c)});
  }
  return out;
}

Table run_argmax(const ArgMaxSpec& a, const Table& in) {
  Table out;
  out.columns = in.columns;
  const auto keys = indices(in, a.keys);
  const std::size_t vi = in.require_column(a.value);
  auto groups = group_by<std::optional<Row>>(
      in, keys, [] { return std::optional<Row>{}; },
      [&](std::optional<Row>& best, const Row& row) {
        if (row[vi].is_null()) return;
        if (!best || (*best)[vi] < row[vi] || ((*best)[vi] == row[vi] && row_less(row, *best))) best = row;
      });
  for (auto& [key, best] : groups) {
    if (best) out.rows.push_back(std::move(*best));
  }
  return out;
}

Table run_global_agg(const GlobalAggSpec& g, const Table& in) {
  Table out;
  out.columns = in.columns;
  const auto inputs = agg_inputs(in, {g.agg});
  out.columns.push_back({g.agg.output, agg_type(inputs[0])});
  if (in.rows.empty()) return out;
  auto accs = fresh(inputs);
  for (const auto& row : in.rows) accs[0].add(inputs[0].column ? row[*inputs[0].column] : Value(Null{}));
  const Value v = accs[0].result();
  for (const auto& row : in.rows) {
    Row r = row;
    r.push_back(v);
    out.rows.push_back(std::move(r));
  }
  return out;
}

Table run_time_window(const TimeWindowSpec& t, const Table& in, const ExecOptions& opts) {
  Table out;
  const auto keys = indices(in, t.keys);
  for (auto k : keys) out.columns.push_back(in.columns[k]);
  out.columns.push_back({t.out_recent, ColumnType::Int});
  out.columns.push_back({t.out_hist, ColumnType::Real});
  const std::size_t ti = in.require_column(t.timestamp);
  struct State {
    std::int64_t recent{0};
    std::int64_t history{0};
    std::set<std::int64_t> months;
  };
  auto groups = group_by<State>(
      in, keys, [] { return State{}; },
      [&](State& s, const Row& row) {
        const Value& ts = row[ti];
        if (ts.is_null()) return;
        const auto when = static_cast<std::int64_t>(ts.to_double());
        if (when > opts.reference_time) return;
        const std::int64_t month = (opts.reference_time - when) / kMonthSeconds;
        if (month < t.recent_months) ++s.recent;
        if (month < t.history_months) {
          ++s.history;
          s.months.insert(month);
        }
      });
  for (auto& [key, s] : groups) {
    Row r = key;
    r.emplace_back(s.recent);
    r.emplace_back(s.months.empty() ? 0.0
                                    : static_cast<double>(s.history) / static_cast<double>(s.months.size()));
    out.rows.push_back(std::move(r));
  }
  return out;
}

Table run_project(const ProjectSpec& p, const Table& in) {
  Table out;
  std::vector<std::size_t> idx;
  for (const auto& [from, to] : p.columns) {
    idx.push_back(in.require_column(from));
    out.columns.push_back({to, in.columns[idx.back()].type});
  }
  out.rows.reserve(in.rows.size());
  for (const auto& row : in.rows) out.rows.push_back(pick(row, idx));
  return out;
}

Table run_distinct(const Table& in) {
  Table out;
  out.columns = in.columns;
  std::unordered_map<Row, bool, RowHash> seen;
  for (const auto& row : in.rows) {
    if (seen.emplace(row, true).second) out.rows.push_back(row);
  }
  return out;
}

Table run_top_k(const TopKSpec& t, const Table& in) {
  Table out;
  out.columns = in.columns;
  const std::size_t oi = in.require_column(t.order);
  std::vector<const Row*> rows;
  for (const auto& r : in.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [&](const Row* a, const Row* b) {
    const Value& x = (*a)[oi];
    const Value& y = (*b)[oi];
    if (!(x == y)) return t.descending ? y < x : x < y;
    return row_less(*a, *b);
  });
  const std::size_t n = std::min(t.k, rows.size());
  for (std::size_t i = 0; i < n; ++i) out.rows.push_back(*rows[i]);
  return out;
}

std::string scan_key(const ScanSpec& s) {
  std::string k = s.source;
  for (const auto& c : s.columns) k += "|" + c.name;
  return k;
}

}  // namespace

Table apply_node(const Node& node, const std::vector<const Table*>& in, const ExecOptions& options) {
  auto input = [&](std::size_t i) -> const Table& {
    if (i >= in.size() || !in[i]) throw PlanError(std::string(to_string(node.kind())) + ": missing input");
    return *in[i];
  };
  switch (node.kind()) {
    case NodeKind::Filter: return run_filter(node.as<FilterSpec>(), input(0));
    case NodeKind::MapUdf: return run_map_udf(node.as<MapUdfSpec>(), input(0), options);
    case NodeKind::GroupAgg: return run_group_agg(node.as<GroupAggSpec>(), input(0));
    case NodeKind::GroupUdaf: return run_group_udaf(node.as<GroupUdafSpec>(), input(0), options);
    case NodeKind::Join: return run_join(node.as<JoinSpec>(), input(0), input(1));
    case NodeKind::PairGen: return run_pair_gen(node.as<PairGenSpec>(), input(0));
    case NodeKind::ArgMaxPerGroup: return run_argmax(node.as<ArgMaxSpec>(), input(0));
    case NodeKind::GlobalAgg: return run_global_agg(node.as<GlobalAggSpec>(), input(0));
    case NodeKind::TimeWindowAgg: return run_time_window(node.as<TimeWindowSpec>(), input(0), options);
    case NodeKind::Project: return run_project(node.as<ProjectSpec>(), input(0));
    case NodeKind::Distinct: return run_distinct(input(0));
    case NodeKind::TopK: return run_top_k(node.as<TopKSpec>(), input(0));
    case NodeKind::ViewScan: {
      const auto& v = node.as<ViewScanSpec>();
      if (!v.table) throw PlanError("view scan without a table");
      return *v.table;
    }
    case NodeKind::Scan: throw PlanError("scan needs a catalog");
  }
  throw PlanError("unknown node kind");
}

ExecResult execute_plan(const QueryPlan& plan, const Catalog& catalog, const ExecOptions& options) {
  if (!plan.sink) throw PlanError("plan has no sink");
  const auto start = Clock::now();
  output_columns(plan.sink);
  ExecResult res;
  std::unordered_map<const Node*, std::shared_ptr<const Table>> memo;
  std::unordered_map<std::string, std::shared_ptr<const Table>> scans;
  std::uint64_t snapshot = 0xcbf29ce484222325ULL;
  const auto nodes = plan.nodes();
  // Last consumer of each node, so that non-retained intermediates can be released.
  std::unordered_map<const Node*, std::size_t> last_use;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& c : nodes[i]->children()) last_use[c.get()] = i;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = *nodes[i];
    const auto node_start = Clock::now();
    std::shared_ptr<const Table> out;
    if (n.kind() == NodeKind::Scan) {
      const auto& s = n.as<ScanSpec>();
      const std::string key = scan_key(s);
      auto it = scans.find(key);
      if (it != scans.end()) {
        out = it->second;
      } else {
        std::vector<std::string> cols;
        for (const auto& c : s.columns) cols.push_back(c.name);
        ScanStats st;
        Table t = catalog.scan(s.source, cols, &st);
        for (std::size_t c = 0; c < s.columns.size(); ++c) {
          if (t.columns[c].type != s.columns[c].type) {
            throw PlanError("column '" + s.columns[c].name + "' of '" + s.source + "' is " +
                            std::string(to_string(t.columns[c].type)));
          }
        }
        res.stats.rows_read += st.rows_read;
        res.stats.bytes_read += st.bytes_read;
        snapshot = fnv1a64(s.source + "#" + std::to_string(catalog.generation(s.source)), snapshot);
        out = std::make_shared<const Table>(std::move(t));
        scans.emplace(key, out);
      }
    } else {
      std::vector<const Table*> in;
      for (const auto& c : n.children()) in.push_back(memo.at(c.get()).get());
      if (n.kind() == NodeKind::ViewScan) ++res.stats.views_read;
      out = std::make_shared<const Table>(apply_node(n, in, options));
    }
    ++res.stats.nodes_executed;
    res.node_seconds[&n] = std::chrono::duration<double>(Clock::now() - node_start).count();
    memo[&n] = out;
    if (options.retain_intermediates) res.intermediates[&n] = out;
    if (!options.retain_intermediates) {
      for (const auto& c : n.children()) {
        if (last_use[c.get()] == i) memo.erase(c.get());
      }
    }
  }
  res.result.table = *memo.at(plan.sink.get());
  res.result.plan_signature = canonicalize(plan.sink).key();
  res.result.snapshot_id = snapshot;
  res.stats.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return res;
}

}  // namespace evobench::engine
