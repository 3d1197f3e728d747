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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "evobench/catalog.hpp"
#include "evobench/datagen.hpp"
#include "evobench/engine.hpp"
#include "evobench/metrics.hpp"
#include "evobench/views.hpp"
#include "evobench/workload.hpp"

namespace evobench::driver {

enum class Methodology { QueryEvolution, UserEvolution, DataEvolution };

std::string_view to_string(Methodology m);
Methodology methodology_from_string(std::string_view name);

struct RunPlan {
  Methodology methodology{Methodology::QueryEvolution};
  /// Query evolution: the analyst whose four versions run.
  int analyst{1};
  /// User evolution: every analyst exactly once.
  std::vector<int> order{1, 2, 3, 4, 5, 6, 7, 8};
  /// Data evolution: the log whose columns arrive incrementally.
  std::string source{datagen::kTwitter};
  Backend backend{Backend::Raw};
  views::Policy views{views::Policy::All};
  std::uint64_t lru_budget_bytes{views::kDefaultLruBudget};
  std::uint64_t seed{42};
  /// Generation sizes; `gen.seed` is replaced by `seed`.
  datagen::GenConfig gen{datagen::default_config()};
  /// Logs are generated here unless all three files already exist.
  std::filesystem::path data_dir;
  /// Catalog and view storage.
  std::filesystem::path work_dir;
  /// All reports and the run manifest go here.
  std::filesystem::path out_dir;
  std::filesystem::path params_path;
  std::filesystem::path cost_path;
  /// Write report files. Tests switch this off.
  bool emit{true};

  /// Throws ValidationError when the selection does not fit the methodology.
  void validate() const;
};

struct MetricComparison {
  std::string metric;
  double first{0};
  double second{0};

  double delta() const { return second - first; }
  /// second / first; 0 when first is 0.
  double ratio() const { return first != 0 ? second / first : 0.0; }
};

struct RunOutcome {
  /// Query and user evolution: {cold, warm}. Data evolution: step1..step4.
  std::vector<metrics::MetricsReport> reports;
  /// Cold and warm results identical for every query (always true for data evolution).
  bool equal{true};
  std::vector<std::string> mismatches;
  /// Query and user evolution: cold vs warm. Data evolution: reset pass vs stateful pass.
  std::vector<MetricComparison> summary;
  /// Data evolution: columns in order of arrival (initial subset first) and the step 3 subset.
  std::vector<std::string> column_order;
  std::vector<std::string> revisit_columns;
  std::filesystem::path out_dir;
};

/// Catalog, view store and configuration shared by the queries of one run.
class Harness {
 public:
  explicit Harness(const RunPlan& plan);

  Catalog& catalog() { return catalog_; }
  views::ViewStore& views() { return views_; }
  const workload::ParamSet& params() const { return params_; }
  const datagen::GeneratedFiles& files() const { return files_; }

  /// Drops every registered source, every view and the catalog counters.
  void reset_state();
  /// Registers `columns` of a source (all columns when empty) and records the arrival.
  void register_source(const std::string& source, const std::vector<std::string>& columns,
                       metrics::MetricsReport& report);
  void register_all(metrics::MetricsReport& report);
  /// Makes more columns of a registered source available and records the arrival.
  void extend(const std::string& source, const std::vector<std::string>& columns, metrics::MetricsReport& report);
  /// Rewrites against the view store, executes, captures views and records the query.
  /// Returns the result digest.
  std::string run_query(const engine::QueryPlan& plan, metrics::MetricsReport& report);

  metrics::MetricsReport new_report(const std::string& label) const;
  /// Sets storage, elapsed time and dollars.
  void finish(metrics::MetricsReport& report, double elapsed_seconds) const;

 private:
  RunPlan plan_;
  datagen::GeneratedFiles files_;
  Catalog catalog_;
  views::ViewStore views_;
  workload::ParamSet params_;
  metrics::CostModel cost_;
  std::string run_id_;
};

/// Generates the three logs into `dir` unless all of them are already present.
datagen::GeneratedFiles prepare_data(const datagen::GenConfig& cfg, const std::filesystem::path& dir);

RunOutcome run_query_evolution(const RunPlan& plan);
RunOutcome run_user_evolution(const RunPlan& plan);
RunOutcome run_data_evolution(const RunPlan& plan);
RunOutcome run(const RunPlan& plan);

/// A full-scan aggregate over the given columns: one non-null count per column.
engine::QueryPlan column_probe(const std::string& source, const std::vector<std::string>& columns);

/// Seeded order of a source's columns; the first half is the initial request.
std::vector<std::string> column_arrival_order(const std::string& source, std::uint64_t seed);

/// Human-readable verdict and summary table.
std::string format_outcome(const RunPlan& plan, const RunOutcome& outcome);

}  // namespace evobench::driver
