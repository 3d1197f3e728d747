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
#include <unordered_map>

#include "evobench/plan.hpp"
#include "evobench/udf.hpp"
#include "evobench/value.hpp"

namespace evobench {
class Catalog;
}

namespace evobench::engine {

inline constexpr std::int64_t kMonthSeconds = 30LL * 86400;

struct ExecOptions {
  /// "Last N months" windows end here. Never taken from the wall clock.
  std::int64_t reference_time{1356998400};
  /// nullptr selects udf::default_lexicons().
  const udf::LexiconSet* lexicons{nullptr};
  /// Keep every node's output in ExecResult::intermediates for view capture.
  bool retain_intermediates{false};
};

struct ExecStats {
  double wall_seconds{0};
  std::uint64_t rows_read{0};
  std::uint64_t bytes_read{0};
  std::uint64_t nodes_executed{0};
  std::uint64_t views_read{0};
};

struct ExecResult {
  ResultTable result;
  ExecStats stats;
  std::unordered_map<const Node*, std::shared_ptr<const Table>> intermediates;
  std::unordered_map<const Node*, double> node_seconds;
};

/// Executes nodes in dependency order with full materialization. Throws
/// CatalogError for unavailable sources or columns and PlanError for an invalid plan.
ExecResult execute_plan(const QueryPlan& plan, const Catalog& catalog, const ExecOptions& options = {});

/// Applies one non-scan operator to already computed inputs.
Table apply_node(const Node& node, const std::vector<const Table*>& inputs, const ExecOptions& options);

}  // namespace evobench::engine
