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

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evobench/plan.hpp"

namespace evobench::workload {

inline constexpr int kAnalysts = 8;
inline constexpr int kVersions = 4;

/// Numeric workload parameters.
///
/// Analyst thresholds are keyed "a<analyst>.<name>" (e.g. "a1.x1"); a version may
/// override one with "a<analyst>.v<version>.<name>", and the override carries over to
/// later versions. Shared interpretation knobs use bare names (e.g. "grid_resolution").
class ParamSet {
 public:
  ParamSet() = default;
  explicit ParamSet(std::map<std::string, double> values);

  /// Throws ParameterError when absent.
  double get(const std::string& name) const;
  /// Versioned lookup: a<a>.v<version>.name, then earlier versions, then a<a>.name.
  double get(int analyst, int version, const std::string& name) const;
  bool has(const std::string& name) const { return values_.count(name) > 0; }
  void set(const std::string& name, double value);
  const std::map<std::string, double>& values() const { return values_; }

  /// "name = number" lines; throws ValidationError for a non-finite value.
  static ParamSet parse(const std::string& text);
  static ParamSet load(const std::filesystem::path& path);
  std::string to_text() const;

  bool operator==(const ParamSet&) const = default;

 private:
  std::map<std::string, double> values_;
};

/// Shipped calibration for the default generated dataset. config/params.conf holds
/// the same values.
ParamSet default_params();
std::filesystem::path default_params_path();

struct RevisionDelta {
  bool p{false};
  bool l{false};
  bool u{false};
  bool g{false};

  bool empty() const { return !(p || l || u || g); }
  /// "{P,L,G}" style, "{}" when empty.
  std::string to_string() const;
  static RevisionDelta parse(const std::string& text);
  bool operator==(const RevisionDelta&) const = default;
};

/// Throws ValidationError for ids out of range and ParameterError for a missing value.
engine::QueryPlan build_query(int analyst, int version, const ParamSet& params);

/// Compares two versions along the four revision dimensions:
///  P  a filter with the same structural signature in both plans has different constants;
///  L  the set of distinct (source, column set) scans differs;
///  U  the multiset of UDF ids differs (helper arithmetic excluded);
///  G  the set of sub-goals differs (see sub_goals).
RevisionDelta classify_delta(const engine::QueryPlan& prev, const engine::QueryPlan& next);

/// Structural signatures of the sub-goals: from the sink, descend through unary nodes
/// to the first join and collect the inputs of that join and of joins nested directly
/// under it. Scans and projections of scans are lookups, not sub-goals. A plan with
/// no such input has the sink itself as its only sub-goal.
std::vector<std::string> sub_goals(const engine::QueryPlan& plan);

/// Revision dimensions for the transitions v1->v2, v2->v3, v3->v4 of every analyst.
const std::array<std::array<RevisionDelta, 3>, kAnalysts>& expected_deltas();

}  // namespace evobench::workload
