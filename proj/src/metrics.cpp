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

#include "evobench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"
#include "json.hpp"

#ifndef EVOBENCH_CONFIG_DIR
#define EVOBENCH_CONFIG_DIR "config"
#endif

namespace evobench::metrics {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kBytesPerGiB = 1073741824.0;

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void require_non_negative(double v, const char* what) {
  if (!(v >= 0) || !std::isfinite(v)) {
    throw ValidationError(std::string(what) + " must be finite and >= 0, got " + num(v));
  }
}

double listed_sum(const std::vector<QueryTiming>& qs, double QueryTiming::*field) {
  double s = 0;
  for (const auto& q : qs) s += q.*field;
  return s;
}

bool below(double total, double parts) { return total < parts - 1e-9 * (1.0 + std::abs(parts)); }

}  // namespace

void CostModel::validate() const {
  require_non_negative(machine_rate, "machine_rate");
  require_non_negative(storage_rate, "storage_rate");
  require_non_negative(n_machines, "n_machines");
  if (!std::isfinite(storage_accrual_hours)) throw ValidationError("storage_accrual_hours must be finite");
}

CostModel CostModel::parse(const std::string& text) {
  CostModel m;
  for (const auto& [key, value] : parse_kv_numbers(text)) {
    if (key == "machine_rate") {
      m.machine_rate = value;
    } else if (key == "storage_rate") {
      m.storage_rate = value;
    } else if (key == "n_machines") {
      m.n_machines = value;
    } else if (key == "storage_accrual_hours") {
      m.storage_accrual_hours = value;
    } else {
      throw ValidationError("unknown cost model key '" + key + "'");
    }
  }
  m.validate();
  return m;
}

CostModel CostModel::load(const fs::path& path) { return parse(read_text_file(path)); }

fs::path default_cost_path() {
  if (const char* env = std::getenv("EVOBENCH_CONFIG_DIR")) return fs::path(env) / "cost.conf";
  return fs::path(EVOBENCH_CONFIG_DIR) / "cost.conf";
}

void MetricsReport::account(Bucket bucket, double seconds) {
  require_non_negative(seconds, "accounted seconds");
  switch (bucket) {
    case Bucket::Response: response_seconds += seconds; break;
    case Bucket::Tuning: tuning_seconds += seconds; break;
    case Bucket::Arrival: data_arrival_seconds += seconds; break;
  }
}

void MetricsReport::add_query(QueryTiming query) {
  account(Bucket::Response, query.response_seconds);
  account(Bucket::Tuning, query.tuning_seconds);
  reuse_hits += query.reuse_hits;
  queries.push_back(std::move(query));
}

void MetricsReport::add_arrival(ArrivalTiming arrival) {
  account(Bucket::Arrival, arrival.seconds);
  bytes_loaded += arrival.bytes_loaded;
  arrivals.push_back(std::move(arrival));
}

void MetricsReport::set_storage(std::uint64_t base_bytes, std::uint64_t view_bytes) {
  storage_base_bytes = base_bytes;
  storage_view_bytes = view_bytes;
  storage_total_bytes = base_bytes + view_bytes;
}

Dollars dollar_cost(const MetricsReport& r, const CostModel& model) {
  const double accrual = model.storage_accrual_hours >= 0 ? model.storage_accrual_hours : r.elapsed_seconds / 3600.0;
  Dollars d;
  d.machine = model.n_machines * model.machine_rate *
              ((r.response_seconds + r.tuning_seconds + r.data_arrival_seconds) / 3600.0);
  d.storage = model.storage_rate * ((static_cast<double>(r.storage_total_bytes) / kBytesPerGiB) * (accrual / kHoursPerMonth));
  d.total = d.machine + d.storage;
  return d;
}

void MetricsReport::price(const CostModel& model) {
  model.validate();
  dollars = dollar_cost(*this, model);
}

void MetricsReport::check_totals() const {
  require_non_negative(response_seconds, "response_seconds");
  require_non_negative(tuning_seconds, "tuning_seconds");
  require_non_negative(data_arrival_seconds, "data_arrival_seconds");
  require_non_negative(elapsed_seconds, "elapsed_seconds");
  require_non_negative(dollars.machine, "machine dollars");
  require_non_negative(dollars.storage, "storage dollars");
  if (storage_total_bytes != storage_base_bytes + storage_view_bytes) {
    throw ValidationError("storage total is not base + views");
  }
  if (dollars.total != dollars.machine + dollars.storage) {
    throw ValidationError("dollar total is not machine + storage");
  }
  if (below(response_seconds, listed_sum(queries, &QueryTiming::response_seconds))) {
    throw ValidationError("response total is below the sum of its queries");
  }
  if (below(tuning_seconds, listed_sum(queries, &QueryTiming::tuning_seconds))) {
    throw ValidationError("tuning total is below the sum of its queries");
  }
  double arrival = 0;
  std::uint64_t loaded = 0;
  for (const auto& a : arrivals) {
    require_non_negative(a.seconds, "arrival seconds");
    arrival += a.seconds;
    loaded += a.bytes_loaded;
  }
  if (below(data_arrival_seconds, arrival)) throw ValidationError("arrival total is below the sum of its arrivals");
  if (bytes_loaded < loaded) throw ValidationError("bytes_loaded is below the sum of its arrivals");
  std::uint64_t hits = 0;
  for (const auto& q : queries) {
    require_non_negative(q.response_seconds, "query response seconds");
    require_non_negative(q.tuning_seconds, "query tuning seconds");
    hits += q.reuse_hits;
  }
  if (reuse_hits < hits) throw ValidationError("reuse_hits is below the sum of its queries");
}

MetricsReport mask_timing(const MetricsReport& report) {
  MetricsReport m = report;
  m.response_seconds = m.tuning_seconds = m.data_arrival_seconds = m.elapsed_seconds = 0;
  m.info.timestamp.clear();
  m.dollars = {};
  for (auto& q : m.queries) q.response_seconds = q.tuning_seconds = 0;
  for (auto& a : m.arrivals) a.seconds = 0;
  return m;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json info_json(const RunInfo& i) {
  return {{"seed", i.seed},           {"backend", i.backend}, {"views_policy", i.views_policy},
          {"methodology", i.methodology}, {"label", i.label},     {"timestamp", i.timestamp}};
}

json report_json(const MetricsReport& r) {
  json queries = json::array();
  for (const auto& q : r.queries) {
    queries.push_back({{"query", q.query},
                       {"response_seconds", q.response_seconds},
                       {"tuning_seconds", q.tuning_seconds},
                       {"rows", q.rows},
                       {"reuse_hits", q.reuse_hits},
                       {"views_captured", q.views_captured},
                       {"digest", q.digest}});
  }
  json arrivals = json::array();
  for (const auto& a : r.arrivals) {
    arrivals.push_back({{"source", a.source},
                        {"columns", a.columns},
                        {"seconds", a.seconds},
                        {"bytes_loaded", a.bytes_loaded},
                        {"bytes_parsed", a.bytes_parsed}});
  }
  return {{"run", info_json(r.info)},
          {"response_seconds", r.response_seconds},
          {"tuning_seconds", r.tuning_seconds},
          {"data_arrival_seconds", r.data_arrival_seconds},
          {"storage_bytes", {{"base", r.storage_base_bytes}, {"views", r.storage_view_bytes}, {"total", r.storage_total_bytes}}},
          {"dollars", {{"machine", r.dollars.machine}, {"storage", r.dollars.storage}, {"total", r.dollars.total}}},
          {"reuse_hits", r.reuse_hits},
          {"bytes_loaded", r.bytes_loaded},
          {"elapsed_seconds", r.elapsed_seconds},
          {"queries", queries},
          {"arrivals", arrivals}};
}

MetricsReport report_of(const json& j) {
  MetricsReport r;
  const auto& run = j.at("run");
  r.info.seed = run.at("seed").get<std::uint64_t>();
  r.info.backend = run.at("backend").get<std::string>();
  r.info.views_policy = run.at("views_policy").get<std::string>();
  r.info.methodology = run.at("methodology").get<std::string>();
  r.info.label = run.at("label").get<std::string>();
  r.info.timestamp = run.at("timestamp").get<std::string>();
  r.response_seconds = j.at("response_seconds").get<double>();
  r.tuning_seconds = j.at("tuning_seconds").get<double>();
  r.data_arrival_seconds = j.at("data_arrival_seconds").get<double>();
  const auto& st = j.at("storage_bytes");
  r.storage_base_bytes = st.at("base").get<std::uint64_t>();
  r.storage_view_bytes = st.at("views").get<std::uint64_t>();
  r.storage_total_bytes = st.at("total").get<std::uint64_t>();
  const auto& d = j.at("dollars");
  r.dollars.machine = d.at("machine").get<double>();
  r.dollars.storage = d.at("storage").get<double>();
  r.dollars.total = d.at("total").get<double>();
  r.reuse_hits = j.at("reuse_hits").get<std::uint64_t>();
  r.bytes_loaded = j.at("bytes_loaded").get<std::uint64_t>();
  r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
  for (const auto& q : j.at("queries")) {
    QueryTiming t;
    t.query = q.at("query").get<std::string>();
    t.response_seconds = q.at("response_seconds").get<double>();
    t.tuning_seconds = q.at("tuning_seconds").get<double>();
    t.rows = q.at("rows").get<std::uint64_t>();
    t.reuse_hits = q.at("reuse_hits").get<std::uint64_t>();
    t.views_captured = q.at("views_captured").get<std::uint64_t>();
    t.digest = q.at("digest").get<std::string>();
    r.queries.push_back(std::move(t));
  }
  for (const auto& a : j.at("arrivals")) {
    ArrivalTiming t;
    t.source = a.at("source").get<std::string>();
    t.columns = a.at("columns").get<std::vector<std::string>>();
    t.seconds = a.at("seconds").get<double>();
    t.bytes_loaded = a.at("bytes_loaded").get<std::uint64_t>();
    t.bytes_parsed = a.at("bytes_parsed").get<std::uint64_t>();
    r.arrivals.push_back(std::move(t));
  }
  return r;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace

Format format_from_string(std::string_view name) {
  if (name == "json") return Format::Json;
  if (name == "csv") return Format::Csv;
  if (name == "svg") return Format::Svg;
  throw ValidationError("unknown report format '" + std::string(name) + "' (expected json, csv or svg)");
}

std::string to_json(const MetricsReport& report) { return report_json(report).dump(2) + "\n"; }

std::string to_json(const std::vector<MetricsReport>& reports) {
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

MetricsReport report_from_json(const std::string& text) {
  try {
    return report_of(parse_json(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

std::vector<MetricsReport> reports_from_json(const std::string& text) {
  const json j = parse_json(text);
  std::vector<MetricsReport> out;
  try {
    if (j.is_array()) {
      for (const auto& r : j) out.push_back(report_of(r));
    } else {
      out.push_back(report_of(j));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV and SVG

const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h = {
      "response_seconds", "tuning_seconds",  "data_arrival_seconds", "storage_base_bytes",
      "storage_view_bytes", "storage_total_bytes", "dollars_machine",  "dollars_storage",
      "dollars_total",    "label",           "methodology",          "backend",
      "views_policy",     "seed",            "reuse_hits",           "bytes_loaded",
      "queries",          "timestamp"};
  return h;
}

std::string to_csv(const std::vector<MetricsReport>& reports) {
  std::string out;
  const auto& h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) out += (i ? "," : "") + h[i];
  out += "\n";
  for (const auto& r : reports) {
    const std::vector<std::string> cells = {num(r.response_seconds),
                                            num(r.tuning_seconds),
                                            num(r.data_arrival_seconds),
                                            std::to_string(r.storage_base_bytes),
                                            std::to_string(r.storage_view_bytes),
                                            std::to_string(r.storage_total_bytes),
                                            num(r.dollars.machine),
                                            num(r.dollars.storage),
                                            num(r.dollars.total),
                                            r.info.label,
                                            r.info.methodology,
                                            r.info.backend,
                                            r.info.views_policy,
                                            std::to_string(r.info.seed),
                                            std::to_string(r.reuse_hits),
                                            std::to_string(r.bytes_loaded),
                                            std::to_string(r.queries.size()),
                                            r.info.timestamp};
    for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    out += "\n";
  }
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::vector<double> five(const MetricsReport& r) {
  return {r.response_seconds, r.tuning_seconds, r.data_arrival_seconds, static_cast<double>(r.storage_total_bytes),
          r.dollars.total};
}

}  // namespace

std::string to_svg(const std::vector<MetricsReport>& reports) {
  static const char* names[5] = {"response", "tuning", "arrival", "storage", "dollars"};
  static const char* colors[6] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948"};
  const double group_w = 140, chart_h = 200, left = 40, top = 30;
  const std::size_t n = std::max<std::size_t>(reports.size(), 1);
  const double bar_w = (group_w - 20) / static_cast<double>(n);
  std::vector<double> peak(5, 0);
  for (const auto& r : reports) {
    const auto v = five(r);
    for (int m = 0; m < 5; ++m) peak[m] = std::max(peak[m], v[m]);
  }
  std::ostringstream s;
  const double width = left + 5 * group_w + 20;
  const double height = top + chart_h + 60 + 16 * static_cast<double>(reports.size());
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
    << "\" data-metrics=\"response,tuning,arrival,storage,dollars\">\n";
  for (int m = 0; m < 5; ++m) {
    s << "  <text x=\"" << num(left + m * group_w + group_w / 2) << "\" y=\"" << num(top + chart_h + 16)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << names[m] << "</text>\n";
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto v = five(reports[i]);
    std::string values;
    for (int m = 0; m < 5; ++m) values += (m ? "," : "") + num(v[m]);
    const std::string label = reports[i].info.label.empty() ? "run" + std::to_string(i + 1) : reports[i].info.label;
    s << "  <g class=\"series\" data-label=\"" << xml_escape(label) << "\" data-values=\"" << values
      << "\" fill=\"" << colors[i % 6] << "\">\n";
    for (int m = 0; m < 5; ++m) {
      const double h = peak[m] > 0 ? chart_h * v[m] / peak[m] : 0;
      s << "    <rect x=\"" << num(left + m * group_w + 10 + static_cast<double>(i) * bar_w) << "\" y=\""
        << num(top + chart_h - h) << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h) << "\"/>\n";
    }
    s << "  </g>\n";
    s << "  <text x=\"" << num(left) << "\" y=\"" << num(top + chart_h + 40 + 16 * static_cast<double>(i))
      << "\" font-size=\"12\" fill=\"" << colors[i % 6] << "\">" << xml_escape(label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

std::uint64_t emit(const std::vector<MetricsReport>& reports, Format format, std::ostream& out) {
  for (const auto& r : reports) r.check_totals();
  std::string bytes;
  switch (format) {
    case Format::Json: bytes = reports.size() == 1 ? to_json(reports.front()) : to_json(reports); break;
    case Format::Csv: bytes = to_csv(reports); break;
    case Format::Svg: bytes = to_svg(reports); break;
  }
  out << bytes;
  if (!out) throw IoError("cannot write report");
  return bytes.size();
}

fs::path report_dir(const fs::path& fallback) {
  if (const char* env = std::getenv("EVOBENCH_REPORT_DIR"); env && *env) return fs::path(env);
  return fallback;
}

std::uint64_t emit_report(const std::vector<MetricsReport>& reports, const fs::path& dir, const std::string& stem) {
  fs::create_directories(dir);
  std::uint64_t total = 0;
  for (auto [format, ext] : {std::pair{Format::Json, ".json"}, {Format::Csv, ".csv"}, {Format::Svg, ".svg"}}) {
    const fs::path path = dir / (stem + ext);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    total += emit(reports, format, out);
  }
  return total;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace evobench::metrics
