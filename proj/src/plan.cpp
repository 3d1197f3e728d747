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

#include "evobench/plan.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "evobench/catalog.hpp"
#include "evobench/error.hpp"

namespace evobench::engine {

std::string_view to_string(Cmp cmp) {
  switch (cmp) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Gt: return ">";
    case Cmp::Ge: return ">=";
    case Cmp::Eq: return "=";
    case Cmp::Ne: return "!=";
  }
  return "?";
}

std::string_view to_string(AggFunc func) {
  switch (func) {
    case AggFunc::Count: return "count";
    case AggFunc::Sum: return "sum";
    case AggFunc::Max: return "max";
    case AggFunc::Min: return "min";
    case AggFunc::Avg: return "avg";
    case AggFunc::CountDistinct: return "count_distinct";
    case AggFunc::Histogram: return "histogram";
  }
  return "?";
}

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Scan: return "scan";
    case NodeKind::Filter: return "filter";
    case NodeKind::MapUdf: return "map_udf";
    case NodeKind::GroupAgg: return "group_agg";
    case NodeKind::GroupUdaf: return "group_udaf";
    case NodeKind::Join: return "join";
    case NodeKind::PairGen: return "pair_gen";
    case NodeKind::ArgMaxPerGroup: return "argmax_per_group";
    case NodeKind::GlobalAgg: return "global_agg";
    case NodeKind::TimeWindowAgg: return "time_window_agg";
    case NodeKind::Project: return "project";
    case NodeKind::Distinct: return "distinct";
    case NodeKind::TopK: return "top_k";
    case NodeKind::ViewScan: return "view_scan";
  }
  return "?";
}

namespace {

template <class T>
bool apply_cmp(const T& a, Cmp cmp, const T& b) {
  switch (cmp) {
    case Cmp::Lt: return a < b;
    case Cmp::Le: return a <= b;
    case Cmp::Gt: return a > b;
    case Cmp::Ge: return a >= b;
    case Cmp::Eq: return a == b;
    case Cmp::Ne: return a != b;
  }
  return false;
}

std::string num(double v) { return Value(v).to_string(); }

}  // namespace

bool compare(const Value& lhs, Cmp cmp, const Value& rhs) {
  if (lhs.is_null() || rhs.is_null()) return false;
  if (lhs.is_numeric() && rhs.is_numeric()) {
    if (lhs.is_int() && rhs.is_int()) return apply_cmp(lhs.as_int(), cmp, rhs.as_int());
    return apply_cmp(lhs.to_double(), cmp, rhs.to_double());
  }
  if (lhs.is_string() && rhs.is_string()) return apply_cmp(lhs.as_string(), cmp, rhs.as_string());
  return cmp == Cmp::Ne;
}

std::string UdfSpec::id() const {
  switch (kind) {
    case UdfKind::ClassifyScore: return "classify_score(" + lexicon + ")";
    case UdfKind::Sentiment: return "sentiment(" + lexicon + ")";
    case UdfKind::GridCell: return "grid_cell(" + num(param) + ")";
    case UdfKind::MenuSimilarity: return "menu_similarity";
    case UdfKind::EntitySentiment:
      return "entity_sentiment(" + lexicon + "," + lexicon2 + "," + num(param) + ")";
    case UdfKind::GridDistance: return "grid_distance(" + num(param) + ")";
    case UdfKind::HistogramOverlap: return "histogram_overlap";
    case UdfKind::ClassifyUser: return "classify_user(" + lexicon + "," + num(param) + ")";
  }
  return "?";
}

Node::Node(NodeSpec spec, std::vector<NodePtr> children, std::string label)
    : spec_(std::move(spec)), children_(std::move(children)), label_(std::move(label)) {}

namespace {

NodePtr make(NodeSpec spec, std::vector<NodePtr> children) {
  for (const auto& c : children) {
    if (!c) throw PlanError("null child node");
  }
  return std::make_shared<const Node>(std::move(spec), std::move(children));
}

}  // namespace

NodePtr scan(std::string source, std::vector<ColumnDef> columns) {
  return make(ScanSpec{std::move(source), std::move(columns)}, {});
}

NodePtr filter(NodePtr in, std::string column, Cmp cmp, Value constant) {
  FilterSpec f;
  f.column = std::move(column);
  f.cmp = cmp;
  f.constant = std::move(constant);
  return make(std::move(f), {std::move(in)});
}

NodePtr filter_ratio(NodePtr in, std::string column, std::string divisor, Cmp cmp, double constant) {
  FilterSpec f;
  f.column = std::move(column);
  f.divisor = std::move(divisor);
  f.cmp = cmp;
  f.constant = Value(constant);
  return make(std::move(f), {std::move(in)});
}

NodePtr filter_columns(NodePtr in, std::string column, Cmp cmp, std::string rhs_column) {
  FilterSpec f;
  f.column = std::move(column);
  f.cmp = cmp;
  f.rhs_column = std::move(rhs_column);
  return make(std::move(f), {std::move(in)});
}

NodePtr map_udf(NodePtr in, UdfSpec udf, std::vector<std::string> inputs, std::vector<std::string> outputs) {
  return make(MapUdfSpec{std::move(udf), std::move(inputs), std::move(outputs)}, {std::move(in)});
}

NodePtr group_agg(NodePtr in, std::vector<std::string> keys, std::vector<AggSpec> aggs) {
  return make(GroupAggSpec{std::move(keys), std::move(aggs)}, {std::move(in)});
}

NodePtr group_udaf(NodePtr in, std::vector<std::string> keys, UdfSpec udf, std::string input,
                   std::string output) {
  return make(GroupUdafSpec{std::move(keys), std::move(udf), std::move(input), std::move(output)},
              {std::move(in)});
}

NodePtr join(NodePtr left, NodePtr right, std::vector<std::pair<std::string, std::string>> keys) {
  return make(JoinSpec{std::move(keys)}, {std::move(left), std::move(right)});
}

NodePtr pair_gen(NodePtr in, PairGenSpec spec) { return make(std::move(spec), {std::move(in)}); }

NodePtr argmax_per_group(NodePtr in, std::vector<std::string> keys, std::string value) {
  return make(ArgMaxSpec{std::move(keys), std::move(value)}, {std::move(in)});
}

NodePtr global_agg(NodePtr in, AggSpec agg) { return make(GlobalAggSpec{std::move(agg)}, {std::move(in)}); }

NodePtr time_window(NodePtr in, TimeWindowSpec spec) { return make(std::move(spec), {std::move(in)}); }

NodePtr project(NodePtr in, std::vector<std::pair<std::string, std::string>> columns) {
  return make(ProjectSpec{std::move(columns)}, {std::move(in)});
}

NodePtr distinct(NodePtr in) { return make(DistinctSpec{}, {std::move(in)}); }

NodePtr top_k(NodePtr in, std::size_t k, std::string order, bool descending) {
  return make(TopKSpec{k, std::move(order), descending}, {std::move(in)});
}

NodePtr view_scan(std::string view_key, std::shared_ptr<const Table> table) {
  return make(ViewScanSpec{std::move(view_key), std::move(table)}, {});
}

NodePtr with_label(const NodePtr& node, std::string label) {
  return std::make_shared<const Node>(node->spec(), node->children(), std::move(label));
}

NodePtr with_children(const NodePtr& node, std::vector<NodePtr> children) {
  return std::make_shared<const Node>(node->spec(), std::move(children), node->label());
}

std::vector<NodePtr> topo_nodes(const NodePtr& sink) {
  std::vector<NodePtr> order;
  std::set<const Node*> seen;
  // Iterative post-order so deep plans cannot overflow the stack.
  std::vector<std::pair<NodePtr, std::size_t>> stack;
  if (sink) stack.emplace_back(sink, 0);
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next == 0 && seen.count(node.get())) {
      stack.pop_back();
      continue;
    }
    if (next < node->children().size()) {
      NodePtr c = node->children()[next++];
      if (!seen.count(c.get())) stack.emplace_back(std::move(c), 0);
      continue;
    }
    if (seen.insert(node.get()).second) order.push_back(node);
    stack.pop_back();
  }
  return order;
}

std::vector<NodePtr> QueryPlan::nodes() const { return topo_nodes(sink); }

// ---------------------------------------------------------------------------
// Signatures

namespace {

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ",";
    out += names[i];
  }
  return out;
}

std::string agg_text(const AggSpec& a) {
  std::string s(to_string(a.func));
  s += "(";
  if (a.func != AggFunc::Count) s += a.input;
  s += ")->" + a.output;
  return s;
}

std::string value_text(const Value& v) { return v.is_string() ? quote(v.as_string()) : v.to_string(); }

/// Node description without children. `lift` replaces numeric filter constants by '?'.
std::string describe(const Node& node, bool lift) {
  std::ostringstream s;
  s << to_string(node.kind());
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, ScanSpec>) {
          std::vector<std::string> cols;
          for (const auto& c : spec.columns) cols.push_back(c.name + ":" + std::string(to_string(c.type)));
          if (lift) std::sort(cols.begin(), cols.end());
          s << "(" << spec.source << ";" << join_names(cols) << ")";
        } else if constexpr (std::is_same_v<T, FilterSpec>) {
          s << "(" << spec.column;
          if (!spec.divisor.empty()) s << "/" << spec.divisor;
          s << to_string(spec.cmp);
          if (!spec.rhs_column.empty()) {
            s << "@" << spec.rhs_column;
          } else if (lift && spec.lifted()) {
            s << "?";
          } else {
            s << value_text(spec.constant);
          }
          s << ")";
        } else if constexpr (std::is_same_v<T, MapUdfSpec>) {
          s << "(" << spec.udf.id() << ";" << join_names(spec.inputs) << "->" << join_names(spec.outputs)
            << ")";
        } else if constexpr (std::is_same_v<T, GroupAggSpec>) {
          std::vector<std::string> aggs;
          for (const auto& a : spec.aggs) aggs.push_back(agg_text(a));
          s << "(" << join_names(spec.keys) << ";" << join_names(aggs) << ")";
        } else if constexpr (std::is_same_v<T, GroupUdafSpec>) {
          s << "(" << join_names(spec.keys) << ";" << spec.udf.id() << ";" << spec.input << "->"
            << spec.output << ")";
        } else if constexpr (std::is_same_v<T, JoinSpec>) {
          std::vector<std::string> keys;
          for (const auto& [l, r] : spec.keys) keys.push_back(l + "=" + r);
          s << "(" << join_names(keys) << ")";
        } else if constexpr (std::is_same_v<T, PairGenSpec>) {
          s << "(" << (spec.mode == PairMode::Edge ? "edge" : "cooccur") << ";" << spec.a << ","
            << spec.b << ";" << (spec.symmetric ? "sym" : "asym") << ";" << spec.out_a << ","
            << spec.out_b << "," << spec.out_count << ")";
        } else if constexpr (std::is_same_v<T, ArgMaxSpec>) {
          s << "(" << join_names(spec.keys) << ";" << spec.value << ")";
        } else if constexpr (std::is_same_v<T, GlobalAggSpec>) {
          s << "(" << agg_text(spec.agg) << ")";
        } else if constexpr (std::is_same_v<T, TimeWindowSpec>) {
          s << "(" << join_names(spec.keys) << ";" << spec.timestamp << ";" << spec.history_months
            << "," << spec.recent_months << ";" << spec.out_recent << "," << spec.out_hist << ")";
        } else if constexpr (std::is_same_v<T, ProjectSpec>) {
          std::vector<std::string> cols;
          for (const auto& [in, out] : spec.columns) cols.push_back(in == out ? in : in + "->" + out);
          s << "(" << join_names(cols) << ")";
        } else if constexpr (std::is_same_v<T, DistinctSpec>) {
        } else if constexpr (std::is_same_v<T, TopKSpec>) {
          s << "(" << spec.k << ";" << spec.order << ";" << (spec.descending ? "desc" : "asc") << ")";
        } else if constexpr (std::is_same_v<T, ViewScanSpec>) {
          s << "(" << spec.view_key << ")";
        }
      },
      node.spec());
  return s.str();
}

struct Canon {
  std::string text;
  std::vector<ParamSlot> slots;
  std::size_t size{0};
};

bool slots_less(const std::vector<ParamSlot>& a, const std::vector<ParamSlot>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const ParamSlot& x, const ParamSlot& y) {
                                        if (x.constant != y.constant) return x.constant < y.constant;
                                        return static_cast<int>(x.cmp) < static_cast<int>(y.cmp);
                                      });
}

class Canonicalizer {
 public:
  const Canon& run(const NodePtr& node) {
    auto it = memo_.find(node.get());
    if (it != memo_.end()) return it->second;
    Canon out;
    std::vector<const Canon*> kids;
    for (const auto& c : node->children()) kids.push_back(&run(c));
    std::string head = describe(*node, true);
    if (node->kind() == NodeKind::Join && kids.size() == 2) {
      auto keys = node->as<JoinSpec>().keys;
      const bool swap = kids[1]->text < kids[0]->text ||
                        (kids[1]->text == kids[0]->text && slots_less(kids[1]->slots, kids[0]->slots));
      if (swap) {
        std::swap(kids[0], kids[1]);
        for (auto& [l, r] : keys) std::swap(l, r);
      }
      std::sort(keys.begin(), keys.end());
      std::vector<std::string> kt;
      for (const auto& [l, r] : keys) kt.push_back(l + "=" + r);
      head = "join(" + join_names(kt) + ")";
    }
    out.text = head;
    if (!kids.empty()) {
      out.text += "[";
      for (std::size_t i = 0; i < kids.size(); ++i) {
        if (i) out.text += ";";
        out.text += kids[i]->text;
      }
      out.text += "]";
    }
    for (const Canon* k : kids) {
      for (ParamSlot slot : k->slots) {
        slot.node += out.size;
        out.slots.push_back(slot);
      }
      out.size += k->size;
    }
    if (node->kind() == NodeKind::Filter) {
      const auto& f = node->as<FilterSpec>();
      if (f.lifted()) out.slots.push_back({out.size, f.cmp, f.constant.to_double()});
    }
    out.size += 1;
    return memo_.emplace(node.get(), std::move(out)).first->second;
  }

 private:
  std::unordered_map<const Node*, Canon> memo_;
};

}  // namespace

std::string PlanSignature::key() const {
  std::string bytes = text;
  for (const auto& s : slots) {
    bytes += "|" + std::to_string(s.node) + std::string(to_string(s.cmp)) + num(s.constant);
  }
  return to_hex(fnv1a64(bytes));
}

PlanSignature canonicalize(const NodePtr& node) {
  Canonicalizer c;
  const Canon& r = c.run(node);
  return PlanSignature{r.text, r.slots};
}

// ---------------------------------------------------------------------------
// Schemas and validation

namespace {

using Schema = std::vector<ColumnDef>;

const ColumnDef* find_col(const Schema& s, const std::string& name) {
  for (const auto& c : s) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

bool text_like(ColumnType t) { return t == ColumnType::Text || t == ColumnType::Tokens; }

bool comparable(ColumnType a, ColumnType b) {
  return (is_numeric(a) && is_numeric(b)) || (!is_numeric(a) && !is_numeric(b));
}

/// Computes a node's schema from child schemas, reporting problems through `err`.
/// Always returns a best-effort schema so that checking can continue upstream.
class SchemaChecker {
 public:
  using ErrFn = std::function<void(const std::string&)>;

  Schema check(const Node& node, const std::vector<Schema>& in, const ErrFn& err) const {
    auto need = [&](const Schema& s, const std::string& name) -> const ColumnDef* {
      const ColumnDef* c = find_col(s, name);
      if (!c) err("unknown column '" + name + "'");
      return c;
    };
    auto add = [&](Schema& s, ColumnDef def) {
      if (find_col(s, def.name)) {
        err("duplicate output column '" + def.name + "'");
        return;
      }
      s.push_back(std::move(def));
    };
    auto need_numeric = [&](const Schema& s, const std::string& name) {
      const ColumnDef* c = need(s, name);
      if (c && !is_numeric(c->type)) err("column '" + name + "' is not numeric");
    };

    return std::visit(
        [&](const auto& spec) -> Schema {
          using T = std::decay_t<decltype(spec)>;
          if constexpr (std::is_same_v<T, ScanSpec>) {
            Schema out;
            if (spec.columns.empty()) err("scan of '" + spec.source + "' selects no columns");
            for (const auto& c : spec.columns) add(out, c);
            return out;
          } else if constexpr (std::is_same_v<T, ViewScanSpec>) {
            return spec.table ? spec.table->columns : Schema{};
          } else {
            if (in.empty()) {
              err("missing input");
              return {};
            }
            const Schema& s = in[0];
            if constexpr (std::is_same_v<T, FilterSpec>) {
              const ColumnDef* c = need(s, spec.column);
              if (!spec.divisor.empty()) {
                need_numeric(s, spec.divisor);
                if (c && !is_numeric(c->type)) err("ratio numerator '" + spec.column + "' is not numeric");
              }
              if (c) {
                if (!spec.rhs_column.empty()) {
                  const ColumnDef* r = need(s, spec.rhs_column);
                  if (r && !comparable(c->type, r->type)) {
                    err("type mismatch comparing '" + spec.column + "' with '" + spec.rhs_column + "'");
                  }
                } else if (spec.constant.is_null()) {
                  err("filter constant is null");
                } else if (spec.constant.is_numeric() != is_numeric(c->type)) {
                  err("type mismatch comparing " + std::string(to_string(c->type)) + " column '" +
                      spec.column + "' with " + spec.constant.to_string());
                }
              }
              return s;
            } else if constexpr (std::is_same_v<T, MapUdfSpec>) {
              Schema out = s;
              std::vector<const ColumnDef*> ins;
              for (const auto& name : spec.inputs) ins.push_back(need(s, name));
              auto expect_inputs = [&](std::size_t n) {
                if (spec.inputs.size() != n) err(spec.udf.id() + " expects " + std::to_string(n) + " inputs");
              };
              auto expect_outputs = [&](std::size_t n) {
                if (spec.outputs.size() != n) err(spec.udf.id() + " expects " + std::to_string(n) + " outputs");
              };
              auto in_type = [&](std::size_t i, auto pred, const char* what) {
                if (i < ins.size() && ins[i] && !pred(ins[i]->type)) {
                  err(spec.udf.id() + " input '" + spec.inputs[i] + "' must be " + what);
                }
              };
              std::vector<ColumnType> types;
              switch (spec.udf.kind) {
                case UdfKind::ClassifyScore:
                case UdfKind::Sentiment:
                  expect_inputs(1);
                  expect_outputs(1);
                  in_type(0, text_like, "text");
                  types = {ColumnType::Real};
                  break;
                case UdfKind::GridCell:
                  expect_inputs(2);
                  expect_outputs(1);
                  in_type(0, is_numeric, "numeric");
                  in_type(1, is_numeric, "numeric");
                  types = {ColumnType::Int};
                  break;
                case UdfKind::MenuSimilarity:
                  expect_inputs(2);
                  expect_outputs(1);
                  in_type(0, text_like, "tokens");
                  in_type(1, text_like, "tokens");
                  types = {ColumnType::Real};
                  break;
                case UdfKind::EntitySentiment:
                  expect_inputs(1);
                  expect_outputs(2);
                  in_type(0, text_like, "text");
                  types = {ColumnType::Text, ColumnType::Real};
                  break;
                case UdfKind::GridDistance:
                  expect_inputs(2);
                  expect_outputs(1);
                  in_type(0, is_numeric, "numeric");
                  in_type(1, is_numeric, "numeric");
                  types = {ColumnType::Int};
                  break;
                case UdfKind::HistogramOverlap:
                  expect_inputs(2);
                  expect_outputs(1);
                  in_type(0, [](ColumnType t) { return t == ColumnType::Histogram; }, "a histogram");
                  in_type(1, [](ColumnType t) { return t == ColumnType::Histogram; }, "a histogram");
                  types = {ColumnType::Real};
                  break;
                case UdfKind::ClassifyUser:
                  err("classify_user is an aggregate; use group_udaf");
                  break;
              }
              for (std::size_t i = 0; i < spec.outputs.size() && i < types.size(); ++i) {
                add(out, {spec.outputs[i], types[i]});
              }
              return out;
            } else if constexpr (std::is_same_v<T, GroupAggSpec>) {
              Schema out;
              for (const auto& k : spec.keys) {
                if (const ColumnDef* c = need(s, k)) add(out, *c);
              }
              for (const auto& a : spec.aggs) {
                ColumnType t = ColumnType::Int;
                if (a.func != AggFunc::Count) {
                  const ColumnDef* c = need(s, a.input);
                  if (c) {
                    switch (a.func) {
                      case AggFunc::Sum:
                        if (!is_numeric(c->type)) err("sum of non-numeric column '" + a.input + "'");
                        t = c->type == ColumnType::Int ? ColumnType::Int : ColumnType::Real;
                        break;
                      case AggFunc::Avg:
                        if (!is_numeric(c->type)) err("avg of non-numeric column '" + a.input + "'");
                        t = ColumnType::Real;
                        break;
                      case AggFunc::Max:
                      case AggFunc::Min:
                        t = c->type;
                        break;
                      case AggFunc::Histogram:
                        t = ColumnType::Histogram;
                        break;
                      default:
                        break;
                    }
                  }
                }
                add(out, {a.output, t});
              }
              return out;
            } else if constexpr (std::is_same_v<T, GroupUdafSpec>) {
              Schema out;
              for (const auto& k : spec.keys) {
                if (const ColumnDef* c = need(s, k)) add(out, *c);
              }
              const ColumnDef* c = need(s, spec.input);
              if (c && !text_like(c->type)) err("udaf input '" + spec.input + "' must be text");
              if (spec.udf.kind != UdfKind::ClassifyUser) err(spec.udf.id() + " is not an aggregate");
              add(out, {spec.output, ColumnType::Int});
              return out;
            } else if constexpr (std::is_same_v<T, JoinSpec>) {
              if (in.size() != 2) {
                err("join needs two inputs");
                return s;
              }
              const Schema& r = in[1];
              std::set<std::string> right_keys;
              for (const auto& [lk, rk] : spec.keys) {
                const ColumnDef* lc = need(s, lk);
                const ColumnDef* rc = need(r, rk);
                if (lc && rc && !comparable(lc->type, rc->type)) {
                  err("join key type mismatch '" + lk + "' vs '" + rk + "'");
                }
                right_keys.insert(rk);
              }
              Schema out = s;
              for (const auto& c : r) {
                if (!right_keys.count(c.name)) add(out, c);
              }
              return out;
            } else if constexpr (std::is_same_v<T, PairGenSpec>) {
              const ColumnDef* a = need(s, spec.a);
              const ColumnDef* b = need(s, spec.b);
              Schema out;
              if (spec.mode == PairMode::Edge) {
                if (a && b && !comparable(a->type, b->type)) err("pair endpoints have different types");
                if (a) add(out, {spec.out_a, a->type});
                if (b) add(out, {spec.out_b, b->type});
              } else if (b) {
                add(out, {spec.out_a, b->type});
                add(out, {spec.out_b, b->type});
              }
              add(out, {spec.out_count, ColumnType::Int});
              return out;
            } else if constexpr (std::is_same_v<T, ArgMaxSpec>) {
              for (const auto& k : spec.keys) need(s, k);
              need(s, spec.value);
              return s;
            } else if constexpr (std::is_same_v<T, GlobalAggSpec>) {
              Schema out = s;
              ColumnType t = ColumnType::Int;
              if (spec.agg.func != AggFunc::Count) {
                const ColumnDef* c = need(s, spec.agg.input);
                if (c) {
                  if (spec.agg.func == AggFunc::Avg) t = ColumnType::Real;
                  else if (spec.agg.func == AggFunc::Histogram) t = ColumnType::Histogram;
                  else if (spec.agg.func == AggFunc::CountDistinct) t = ColumnType::Int;
                  else if (spec.agg.func == AggFunc::Sum)
                    t = c->type == ColumnType::Int ? ColumnType::Int : ColumnType::Real;
                  else t = c->type;
                }
              }
              add(out, {spec.agg.output, t});
              return out;
            } else if constexpr (std::is_same_v<T, TimeWindowSpec>) {
              Schema out;
              for (const auto& k : spec.keys) {
                if (const ColumnDef* c = need(s, k)) add(out, *c);
              }
              need_numeric(s, spec.timestamp);
              if (spec.history_months < 1 || spec.recent_months < 1) err("window months must be >= 1");
              add(out, {spec.out_recent, ColumnType::Int});
              add(out, {spec.out_hist, ColumnType::Real});
              return out;
            } else if constexpr (std::is_same_v<T, ProjectSpec>) {
              Schema out;
              for (const auto& [from, to] : spec.columns) {
                if (const ColumnDef* c = need(s, from)) add(out, {to, c->type});
              }
              return out;
            } else if constexpr (std::is_same_v<T, DistinctSpec>) {
              return s;
            } else if constexpr (std::is_same_v<T, TopKSpec>) {
              need(s, spec.order);
              return s;
            } else {
              return s;
            }
          }
        },
        node.spec());
  }
};

std::string node_tag(std::size_t id, const Node& n) {
  return "#" + std::to_string(id) + " " + std::string(to_string(n.kind()));
}

/// Names each node outputs beyond its inputs.
std::set<std::string> produced_names(const Schema& out, const std::vector<Schema>& in) {
  std::set<std::string> names;
  for (const auto& c : out) {
    bool from_input = false;
    for (const auto& s : in) from_input = from_input || find_col(s, c.name);
    if (!from_input) names.insert(c.name);
  }
  return names;
}

std::vector<Diagnostic> check_plan(const QueryPlan& plan, const Catalog* catalog) {
  std::vector<Diagnostic> diags;
  if (!plan.sink) {
    diags.push_back({"", "plan has no sink"});
    return diags;
  }
  const auto nodes = plan.nodes();
  std::unordered_map<const Node*, std::size_t> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) ids[nodes[i].get()] = i;

  SchemaChecker checker;
  std::unordered_map<const Node*, Schema> schemas;
  std::unordered_map<const Node*, std::set<std::string>> produced;
  struct Pending {
    std::size_t id;
    std::string column;
  };
  std::vector<Pending> unknown;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Node& n = *nodes[i];
    std::vector<Schema> in;
    for (const auto& c : n.children()) in.push_back(schemas[c.get()]);
    auto err = [&](const std::string& msg) {
      const std::string prefix = "unknown column '";
      if (msg.rfind(prefix, 0) == 0) {
        unknown.push_back({i, msg.substr(prefix.size(), msg.size() - prefix.size() - 1)});
        return;
      }
      diags.push_back({node_tag(i, n), msg});
    };
    Schema out = checker.check(n, in, err);
    if (catalog && n.kind() == NodeKind::Scan) {
      const auto& sc = n.as<ScanSpec>();
      auto schema = catalog->describe(sc.source);
      if (!schema) {
        diags.push_back({node_tag(i, n), "source '" + sc.source + "' is not registered"});
      } else {
        for (const auto& c : sc.columns) {
          auto have = schema->column(c.name);
          if (!have) {
            diags.push_back({node_tag(i, n), "column '" + c.name + "' of source '" + sc.source +
                                                 "' is not available"});
          } else if (have->type != c.type) {
            diags.push_back({node_tag(i, n), "column '" + c.name + "' is " +
                                                 std::string(to_string(have->type)) + ", plan expects " +
                                                 std::string(to_string(c.type))});
          }
        }
      }
    }
    produced[&n] = produced_names(out, in);
    schemas[&n] = std::move(out);
  }
  for (const auto& u : unknown) {
    const Node& n = *nodes[u.id];
    std::string where;
    for (std::size_t j = u.id + 1; j < nodes.size() && where.empty(); ++j) {
      if (produced[nodes[j].get()].count(u.column)) where = node_tag(j, *nodes[j]);
    }
    if (where.empty()) {
      diags.push_back({node_tag(u.id, n), "unknown column '" + u.column + "'"});
    } else {
      diags.push_back({node_tag(u.id, n), "column '" + u.column + "' is used before it is produced (produced downstream by " +
                                              where + ")"});
    }
  }
  return diags;
}

}  // namespace

std::vector<ColumnDef> output_columns(const NodePtr& node) {
  QueryPlan p{node, {}};
  SchemaChecker checker;
  std::unordered_map<const Node*, Schema> schemas;
  for (const auto& n : p.nodes()) {
    std::vector<Schema> in;
    for (const auto& c : n->children()) in.push_back(schemas[c.get()]);
    schemas[n.get()] = checker.check(*n, in, [&](const std::string& msg) {
      throw PlanError(std::string(to_string(n->kind())) + ": " + msg);
    });
  }
  return schemas[node.get()];
}

std::vector<Diagnostic> validate_structure(const QueryPlan& plan) { return check_plan(plan, nullptr); }

std::vector<Diagnostic> validate_plan(const QueryPlan& plan, const Catalog& catalog) {
  return check_plan(plan, &catalog);
}

std::string dump_plan(const QueryPlan& plan) {
  if (!plan.sink) return "()\n";
  const auto nodes = plan.nodes();
  std::unordered_map<const Node*, std::size_t> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) ids[nodes[i].get()] = i;
  std::set<const Node*> printed;
  std::vector<std::string> lines;
  std::function<void(const NodePtr&, int)> emit = [&](const NodePtr& n, int depth) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    const std::size_t id = ids[n.get()];
    if (printed.count(n.get())) {
      lines.push_back(indent + "(ref #" + std::to_string(id) + ")");
      return;
    }
    printed.insert(n.get());
    std::string line = indent + "(#" + std::to_string(id) + " " + describe(*n, false);
    if (!n->label().empty()) line += " :label " + n->label();
    lines.push_back(line);
    for (const auto& c : n->children()) emit(c, depth + 1);
    lines.back() += ")";
  };
  std::string out;
  if (!plan.name.empty()) out += ";; " + plan.name + "\n";
  emit(plan.sink, 0);
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace evobench::engine
