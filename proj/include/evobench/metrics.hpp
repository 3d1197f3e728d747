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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace evobench::metrics {

/// Hours per storage billing month.
inline constexpr double kHoursPerMonth = 730.0;

enum class Bucket { Response, Tuning, Arrival };

struct QueryTiming {
  std::string query;  // e.g. "a1.v2"
  double response_seconds{0};
  double tuning_seconds{0};
  std::uint64_t rows{0};
  std::uint64_t reuse_hits{0};
  std::uint64_t views_captured{0};
  std::string digest;

  bool operator==(const QueryTiming&) const = default;
};

struct ArrivalTiming {
  std::string source;
  std::vector<std::string> columns;
  double seconds{0};
  std::uint64_t bytes_loaded{0};
  std::uint64_t bytes_parsed{0};

  bool operator==(const ArrivalTiming&) const = default;
};

struct RunInfo {
  std::uint64_t seed{0};
  std::string backend;
  std::string views_policy;
  std::string methodology;
  std::string label;      // e.g. "cold", "warm", "step2"
  std::string timestamp;  // ISO-8601 UTC

  bool operator==(const RunInfo&) const = default;
};

struct CostModel {
  double machine_rate{0.10};   // dollars per machine-hour
  double storage_rate{0.023};  // dollars per GB-month
  double n_machines{1};
  /// Negative: bill storage for the run's own elapsed time.
  double storage_accrual_hours{-1};

  /// Throws ValidationError for negative rates or machine count.
  void validate() const;
  /// Keys machine_rate, storage_rate, n_machines, storage_accrual_hours; absent keys keep defaults.
  static CostModel parse(const std::string& text);
  static CostModel load(const std::filesystem::path& path);
};

std::filesystem::path default_cost_path();

struct Dollars {
  double machine{0};
  double storage{0};
  double total{0};

  bool operator==(const Dollars&) const = default;
};

struct MetricsReport {
  RunInfo info;
  std::vector<QueryTiming> queries;
  std::vector<ArrivalTiming> arrivals;
  double response_seconds{0};
  double tuning_seconds{0};
  double data_arrival_seconds{0};
  std::uint64_t storage_base_bytes{0};
  std::uint64_t storage_view_bytes{0};
  std::uint64_t storage_total_bytes{0};
  std::uint64_t reuse_hits{0};
  std::uint64_t bytes_loaded{0};
  /// Run wall time, used as the default storage accrual window.
  double elapsed_seconds{0};
  Dollars dollars;

  /// Adds seconds to one bucket. Throws ValidationError for negative or non-finite seconds.
  void account(Bucket bucket, double seconds);
  /// Records a query and accounts its response and tuning time.
  void add_query(QueryTiming query);
  /// Records a registration or column extension and accounts its time.
  void add_arrival(ArrivalTiming arrival);
  void set_storage(std::uint64_t base_bytes, std::uint64_t view_bytes);
  /// Fills `dollars` from the current totals.
  void price(const CostModel& model);

  /// Throws ValidationError for a negative value, a storage or dollar total that is not the
  /// sum of its parts, or a time total below the sum of its listed queries or arrivals
  /// (time accounted directly need not belong to a listed item).
  void check_totals() const;

  bool operator==(const MetricsReport&) const = default;
};

Dollars dollar_cost(const MetricsReport& report, const CostModel& model);

/// Copy with every timing field (seconds, timestamps, timing-derived dollars) zeroed.
MetricsReport mask_timing(const MetricsReport& report);

enum class Format { Json, Csv, Svg };
Format format_from_string(std::string_view name);

std::string to_json(const MetricsReport& report);
/// Throws ValidationError for malformed input.
MetricsReport report_from_json(const std::string& text);
/// A JSON array of reports, or a single report object.
std::string to_json(const std::vector<MetricsReport>& reports);
std::vector<MetricsReport> reports_from_json(const std::string& text);

/// Column order of the summary CSV: the five metric groups, then run metadata.
const std::vector<std::string>& csv_header();
/// Header line plus one line per report.
std::string to_csv(const std::vector<MetricsReport>& reports);
/// Grouped bar chart: one series per report, one bar per metric, each normalized to
/// the largest value of that metric. Raw values are in data-values attributes.
std::string to_svg(const std::vector<MetricsReport>& reports);

/// Writes the reports in one format; returns bytes written.
std::uint64_t emit(const std::vector<MetricsReport>& reports, Format format, std::ostream& out);

/// EVOBENCH_REPORT_DIR when set, otherwise `fallback`.
std::filesystem::path report_dir(const std::filesystem::path& fallback);

/// Writes <stem>.json, <stem>.csv and <stem>.svg into `dir`; returns bytes written.
std::uint64_t emit_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir,
                          const std::string& stem);

std::string utc_timestamp();

}  // namespace evobench::metrics
