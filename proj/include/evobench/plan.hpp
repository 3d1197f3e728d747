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

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "evobench/value.hpp"

namespace evobench {
class Catalog;
}

namespace evobench::engine {

enum class Cmp { Lt, Le, Gt, Ge, Eq, Ne };
std::string_view to_string(Cmp cmp);

/// Null on either side compares false. Numbers compare numerically, strings
/// lexicographically; a number never equals a string.
bool compare(const Value& lhs, Cmp cmp, const Value& rhs);

enum class UdfKind {
  ClassifyScore,     // text -> real
  Sentiment,         // text -> real
  GridCell,          // lat, lon -> int; param = resolution
  MenuSimilarity,    // tokens, tokens -> real
  EntitySentiment,   // text -> (entity, score) rows; lexicon2 = sentiment, param = window
  GridDistance,      // cell, cell -> int; param = resolution
  HistogramOverlap,  // histogram, histogram -> real
  ClassifyUser,      // group of texts -> 0/1; param = min hits
};

struct UdfSpec {
  UdfKind kind{UdfKind::ClassifyScore};
  std::string lexicon;
  std::string lexicon2;
  double param{0};

  /// Stable identifier including lexicons and parameters, e.g. "classify_score(wine)".
  std::string id() const;
  /// Helper arithmetic that is not one of the named analyst UDFs.
  bool builtin() const { return kind == UdfKind::GridDistance || kind == UdfKind::HistogramOverlap; }
};

enum class AggFunc { Count, Sum, Max, Min, Avg, CountDistinct, Histogram };
std::string_view to_string(AggFunc func);

struct AggSpec {
  AggFunc func{AggFunc::Count};
  std::string input;  // ignored for Count
  std::string output;
};

struct ScanSpec {
  std::string source;
  std::vector<ColumnDef> columns;
};

/// `column [/ divisor] cmp (constant | rhs_column)`. A zero divisor yields +inf.
struct FilterSpec {
  std::string column;
  std::string divisor;
  Cmp cmp{Cmp::Gt};
  Value constant;
  std::string rhs_column;

  bool lifted() const { return rhs_column.empty() && constant.is_numeric(); }
};

struct MapUdfSpec {
  UdfSpec udf;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

struct GroupAggSpec {
  std::vector<std::string> keys;
  std::vector<AggSpec> aggs;
};

struct GroupUdafSpec {
  std::vector<std::string> keys;
  UdfSpec udf;
  std::string input;
  std::string output;
};

/// Inner equi-join; empty keys is a cross product. Output is the left columns then
/// the right columns without the right keys.
struct JoinSpec {
  std::vector<std::pair<std::string, std::string>> keys;
};

enum class PairMode { Edge, CoOccur };

/// Edge: rows (a -> b) become (out_a, out_b, out_count) with the message count; symmetric
/// counts both directions and emits both orientations. CoOccur: a groups, b items; emits
/// every ordered pair of distinct items with the number of groups containing both.
struct PairGenSpec {
  PairMode mode{PairMode::Edge};
  std::string a;
  std::string b;
  bool symmetric{true};
  std::string out_a{"u1"};
  std::string out_b{"u2"};
  std::string out_count{"strength"};
};

struct ArgMaxSpec {
  std::vector<std::string> keys;
  std::string value;
};

/// Appends the aggregate over the whole input as a column on every row.
struct GlobalAggSpec {
  AggSpec agg;
};

/// Buckets are 30-day months counted back from the reference timestamp.
/// out_recent counts the last recent_months; out_hist is the count over the last
/// history_months divided by the number of those months with any record.
struct TimeWindowSpec {
  std::vector<std::string> keys;
  std::string timestamp;
  int history_months{6};
  int recent_months{1};
  std::string out_recent{"recent_count"};
  std::string out_hist{"hist_avg"};
};

struct ProjectSpec {
  std::vector<std::pair<std::string, std::string>> columns;  // (input, output)
};

struct DistinctSpec {};

struct TopKSpec {
  std::size_t k{1};
  std::string order;
  bool descending{true};
};

/// Reads a materialized result. Produced only by view rewriting.
struct ViewScanSpec {
  std::string view_key;
  std::shared_ptr<const Table> table;
};

using NodeSpec = std::variant<ScanSpec, FilterSpec, MapUdfSpec, GroupAggSpec, GroupUdafSpec, JoinSpec,
                              PairGenSpec, ArgMaxSpec, GlobalAggSpec, TimeWindowSpec, ProjectSpec,
                              DistinctSpec, TopKSpec, ViewScanSpec>;

/// Same order as NodeSpec alternatives.
enum class NodeKind {
  Scan,
  Filter,
  MapUdf,
  GroupAgg,
  GroupUdaf,
  Join,
  PairGen,
  ArgMaxPerGroup,
  GlobalAgg,
  TimeWindowAgg,
  Project,
  Distinct,
  TopK,
  ViewScan
};
std::string_view to_string(NodeKind kind);

class Node;
using NodePtr = std::shared_ptr<const Node>;

class Node {
 public:
  Node(NodeSpec spec, std::vector<NodePtr> children, std::string label = {});

  NodeKind kind() const { return static_cast<NodeKind>(spec_.index()); }
  const NodeSpec& spec() const { return spec_; }
  template <class T>
  const T& as() const {
    return std::get<T>(spec_);
  }
  const std::vector<NodePtr>& children() const { return children_; }
  const NodePtr& child(std::size_t i = 0) const { return children_.at(i); }
  /// Free-form name for dumps; never part of the signature.
  const std::string& label() const { return label_; }

 private:
  NodeSpec spec_;
  std::vector<NodePtr> children_;
  std::string label_;
};

// Builders. None of them validate; use validate_plan.
NodePtr scan(std::string source, std::vector<ColumnDef> columns);
NodePtr filter(NodePtr in, std::string column, Cmp cmp, Value constant);
NodePtr filter_ratio(NodePtr in, std::string column, std::string divisor, Cmp cmp, double constant);
NodePtr filter_columns(NodePtr in, std::string column, Cmp cmp, std::string rhs_column);
NodePtr map_udf(NodePtr in, UdfSpec udf, std::vector<std::string> inputs, std::vector<std::string> outputs);
NodePtr group_agg(NodePtr in, std::vector<std::string> keys, std::vector<AggSpec> aggs);
NodePtr group_udaf(NodePtr in, std::vector<std::string> keys, UdfSpec udf, std::string input,
                   std::string output);
NodePtr join(NodePtr left, NodePtr right, std::vector<std::pair<std::string, std::string>> keys);
NodePtr pair_gen(NodePtr in, PairGenSpec spec);
NodePtr argmax_per_group(NodePtr in, std::vector<std::string> keys, std::string value);
NodePtr global_agg(NodePtr in, AggSpec agg);
NodePtr time_window(NodePtr in, TimeWindowSpec spec);
NodePtr project(NodePtr in, std::vector<std::pair<std::string, std::string>> columns);
NodePtr distinct(NodePtr in);
NodePtr top_k(NodePtr in, std::size_t k, std::string order, bool descending = true);
NodePtr view_scan(std::string view_key, std::shared_ptr<const Table> table);
NodePtr with_label(const NodePtr& node, std::string label);
/// Same node with different children.
NodePtr with_children(const NodePtr& node, std::vector<NodePtr> children);

struct QueryPlan {
  NodePtr sink;
  std::string name;

  /// Distinct nodes, children before parents, in deterministic order.
  std::vector<NodePtr> nodes() const;
};

std::vector<NodePtr> topo_nodes(const NodePtr& sink);

/// A lifted numeric filter constant. `node` indexes the filter in canonical post-order.
struct ParamSlot {
  std::size_t node{0};
  Cmp cmp{Cmp::Gt};
  double constant{0};

  bool operator==(const ParamSlot&) const = default;
};

struct PlanSignature {
  std::string text;
  std::vector<ParamSlot> slots;

  /// Hash of text and slots, as 16 hex digits.
  std::string key() const;
  bool operator==(const PlanSignature&) const = default;
};

/// Structural text with numeric filter constants replaced by '?'. Join inputs are
/// ordered by their own text so swapping them does not change the signature.
PlanSignature canonicalize(const NodePtr& node);
inline PlanSignature canonicalize(const QueryPlan& plan) { return canonicalize(plan.sink); }

/// Output columns of a node; throws PlanError when a requirement does not hold.
std::vector<ColumnDef> output_columns(const NodePtr& node);

/// One node per line, children indented under their parent; shared nodes are
/// printed once and referenced by #id afterwards.
std::string dump_plan(const QueryPlan& plan);

struct Diagnostic {
  std::string node;  // "#<id> <kind>"
  std::string message;
};

/// Every unsatisfied source, column or type requirement. Empty means valid.
std::vector<Diagnostic> validate_plan(const QueryPlan& plan, const Catalog& catalog);
/// Check against declared schemas only, without a catalog.
std::vector<Diagnostic> validate_structure(const QueryPlan& plan);

}  // namespace evobench::engine
