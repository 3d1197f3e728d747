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

#include "evobench/catalog.hpp"

#include <chrono>
#include <cstring>
#include <fstream>
#include <mutex>
#include <set>

#include "json.hpp"

#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"

namespace evobench {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Backend backend) { return backend == Backend::Raw ? "raw" : "loaded"; }

Backend backend_from_string(std::string_view name) {
  if (name == "raw") return Backend::Raw;
  if (name == "loaded") return Backend::Loaded;
  throw ValidationError("unknown backend '" + std::string(name) + "' (expected raw|loaded)");
}

std::optional<ColumnDef> SourceSchema::column(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c;
  }
  return std::nullopt;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Value json_to_value(const json& j, ColumnType type, const std::string& path, std::size_t line,
                    const std::string& column) {
  if (j.is_null()) return Null{};
  auto bad = [&]() -> IngestionError {
    return IngestionError(path, line, "column '" + column + "' expects " + std::string(to_string(type)));
  };
  switch (type) {
    case ColumnType::Int:
      if (!j.is_number_integer()) throw bad();
      return Value(j.get<std::int64_t>());
    case ColumnType::Real:
      if (!j.is_number()) throw bad();
      return Value(j.get<double>());
    case ColumnType::Text:
    case ColumnType::Histogram:
      if (!j.is_string()) throw bad();
      return Value(j.get<std::string>());
    case ColumnType::Tokens: {
      if (j.is_string()) return Value(j.get<std::string>());
      if (!j.is_array()) throw bad();
      std::string joined;
      for (const auto& item : j) {
        if (!item.is_string()) throw bad();
        if (!joined.empty()) joined.push_back(' ');
        joined += item.get<std::string>();
      }
      return Value(std::move(joined));
    }
  }
  throw bad();
}

/// Parses one line keeping only the wanted top-level keys.
json parse_selected(const std::string& line, const std::set<std::string, std::less<>>& wanted,
                    const std::string& path, std::size_t lineno) {
  json::parser_callback_t keep = [&wanted](int depth, json::parse_event_t event, json& parsed) {
    if (depth == 1 && event == json::parse_event_t::key) {
      return wanted.count(parsed.get_ref<const std::string&>()) > 0;
    }
    return true;
  };
  json j = json::parse(line, keep, false);
  if (j.is_discarded() || !j.is_object()) {
    throw IngestionError(path, lineno, "malformed JSON record");
  }
  return j;
}

/// Keys of the first non-empty record; empty set for an empty file.
std::set<std::string> first_record_keys(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw IngestionError(file.string(), lineno, "malformed JSON record");
    }
    std::set<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.insert(it.key());
    return keys;
  }
  return {};
}

void check_columns_in_file(const fs::path& file, const std::vector<ColumnDef>& columns) {
  const auto keys = first_record_keys(file);
  if (keys.empty()) return;
  for (const auto& c : columns) {
    if (!keys.count(c.name)) {
      throw ValidationError("column '" + c.name + "' not present in " + file.string());
    }
  }
}

struct LoadResult {
  std::uint64_t rows{0};
  std::uint64_t bytes_parsed{0};
  std::uint64_t bytes_written{0};
};

/// Converts the given columns of a JSON-lines file into .col files under `dir`.
LoadResult load_columns(const fs::path& file, const std::vector<ColumnDef>& columns,
                        const fs::path& dir) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::set<std::string, std::less<>> wanted;
  for (const auto& c : columns) wanted.insert(c.name);
  std::vector<std::string> buffers(columns.size());
  LoadResult res;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    res.bytes_parsed += line.size() + 1;
    if (line.empty()) continue;
    json j = parse_selected(line, wanted, file.string(), lineno);
    for (std::size_t i = 0; i < columns.size(); ++i) {
      auto it = j.find(columns[i].name);
      const Value v = it == j.end() ? Value(Null{})
                                    : json_to_value(*it, columns[i].type, file.string(), lineno,
                                                    columns[i].name);
      encode_value(buffers[i], v);
    }
    ++res.rows;
  }
  fs::create_directories(dir);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const fs::path tmp = dir / (columns[i].name + ".col.tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write " + tmp.string());
      out.write(buffers[i].data(), static_cast<std::streamsize>(buffers[i].size()));
      if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, dir / (columns[i].name + ".col"));
    res.bytes_written += buffers[i].size();
  }
  return res;
}

}  // namespace

Catalog::Catalog(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

fs::path Catalog::source_dir(std::string_view source) const { return dir_ / std::string(source); }

void Catalog::write_manifest(const SourceSchema& schema) const {
  json m;
  m["source"] = schema.source_name;
  m["file"] = schema.file.string();
  m["backend"] = std::string(to_string(schema.backend));
  m["state"] = schema.state == BackendState::Loaded ? "LOADED" : "DECLARED";
  m["rows"] = schema.row_count;
  json cols = json::array();
  for (const auto& c : schema.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
  m["columns"] = cols;
  write_text_file(source_dir(schema.source_name) / "manifest.json", m.dump(2) + "\n");
}

IngestionTiming Catalog::register_source(const std::string& name, const std::vector<ColumnDef>& columns,
                                         const fs::path& file, Backend backend) {
  std::unique_lock lock(mutex_);
  IngestionTiming timing;
  const auto start = Clock::now();
  if (name.empty() || name.find('/') != std::string::npos) throw ValidationError("bad source name");
  if (sources_.count(name)) throw ValidationError("source '" + name + "' already registered");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty() || !seen.insert(c.name).second) {
      throw ValidationError("duplicate or empty column name '" + c.name + "'");
    }
  }
  if (!fs::is_regular_file(file)) throw IoError("source file missing: " + file.string());
  check_columns_in_file(file, columns);

  SourceSchema schema;
  schema.source_name = name;
  schema.columns = columns;
  schema.file = fs::absolute(file);
  schema.backend = backend;
  schema.generation = next_generation_++;
  const fs::path sdir = source_dir(name);
  fs::remove_all(sdir);
  fs::create_directories(sdir);
  write_manifest(schema);
  timing.declare_seconds = seconds_since(start);

  if (backend == Backend::Loaded) {
    const auto load_start = Clock::now();
    LoadResult res;
    try {
      res = load_columns(schema.file, columns, sdir);
    } catch (...) {
      fs::remove_all(sdir);
      throw;
    }
    schema.state = BackendState::Loaded;
    schema.row_count = res.rows;
    write_manifest(schema);
    timing.load_seconds = seconds_since(load_start);
    timing.bytes_loaded = res.bytes_written;
    timing.bytes_parsed = res.bytes_parsed;
    for (const auto& c : columns) timing.columns_loaded.push_back(c.name);
  }
  counters_.bytes_loaded += timing.bytes_loaded;
  counters_.bytes_parsed += timing.bytes_parsed;
  counters_.registrations += 1;
  sources_.emplace(name, std::move(schema));
  return timing;
}

IngestionTiming Catalog::extend_columns(const std::string& name, const std::vector<ColumnDef>& new_columns) {
  std::unique_lock lock(mutex_);
  IngestionTiming timing;
  const auto start = Clock::now();
  auto it = sources_.find(name);
  if (it == sources_.end()) throw CatalogError("source '" + name + "' is not registered");
  SourceSchema& schema = it->second;
  std::set<std::string> seen;
  for (const auto& c : new_columns) {
    if (schema.column(c.name) || !seen.insert(c.name).second) {
      throw ValidationError("column '" + c.name + "' is already available in '" + name + "'");
    }
  }
  check_columns_in_file(schema.file, new_columns);
  timing.declare_seconds = seconds_since(start);
  if (schema.backend == Backend::Loaded) {
    const auto load_start = Clock::now();
    const LoadResult res = load_columns(schema.file, new_columns, source_dir(name));
    timing.load_seconds = seconds_since(load_start);
    timing.bytes_loaded = res.bytes_written;
    timing.bytes_parsed = res.bytes_parsed;
    for (const auto& c : new_columns) timing.columns_loaded.push_back(c.name);
  }
  schema.columns.insert(schema.columns.end(), new_columns.begin(), new_columns.end());
  write_manifest(schema);
  counters_.bytes_loaded += timing.bytes_loaded;
  counters_.bytes_parsed += timing.bytes_parsed;
  return timing;
}

void Catalog::reset() {
  std::unique_lock lock(mutex_);
  for (const auto& [name, schema] : sources_) fs::remove_all(source_dir(name));
  sources_.clear();
  counters_ = {};
  bytes_scanned_ = 0;
}

std::vector<std::string> Catalog::list_sources() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> names;
  for (const auto& [k, v] : sources_) names.push_back(k);
  return names;
}

bool Catalog::has_source(std::string_view name) const {
  std::shared_lock lock(mutex_);
  return sources_.find(name) != sources_.end();
}

std::optional<SourceSchema> Catalog::describe(std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(name);
  if (it == sources_.end()) return std::nullopt;
  return it->second;
}

bool Catalog::column_available(std::string_view source, std::string_view column) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(source);
  return it != sources_.end() && it->second.column(column).has_value();
}

std::uint64_t Catalog::generation(std::string_view source) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(source);
  return it == sources_.end() ? 0 : it->second.generation;
}

Table Catalog::scan(std::string_view source, const std::vector<std::string>& columns,
                    ScanStats* stats) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(source);
  if (it == sources_.end()) throw CatalogError("source '" + std::string(source) + "' is not registered");
  std::vector<ColumnDef> defs;
  for (const auto& c : columns) {
    auto def = it->second.column(c);
    if (!def) {
      throw CatalogError("column '" + c + "' of '" + std::string(source) + "' is not available");
    }
    defs.push_back(*def);
  }
  ScanStats local;
  Table t = it->second.state == BackendState::Loaded ? scan_loaded(it->second, defs, local)
                                                     : scan_raw(it->second, defs, local);
  bytes_scanned_ += local.bytes_read;
  if (stats) {
    stats->rows_read += local.rows_read;
    stats->bytes_read += local.bytes_read;
  }
  return t;
}

Table Catalog::scan_raw(const SourceSchema& schema, const std::vector<ColumnDef>& columns,
                        ScanStats& stats) const {
  std::ifstream in(schema.file, std::ios::binary);
  if (!in) throw IoError("cannot open " + schema.file.string());
  std::set<std::string, std::less<>> wanted;
  for (const auto& c : columns) wanted.insert(c.name);
  Table t;
  t.columns = columns;
  std::string line;
  std::size_t lineno = 0;
  const std::string path = schema.file.string();
  while (std::getline(in, line)) {
    ++lineno;
    stats.bytes_read += line.size() + 1;
    if (line.empty()) continue;
    json j = parse_selected(line, wanted, path, lineno);
    Row row;
    row.reserve(columns.size());
    for (const auto& c : columns) {
      auto f = j.find(c.name);
      row.push_back(f == j.end() ? Value(Null{}) : json_to_value(*f, c.type, path, lineno, c.name));
    }
    t.rows.push_back(std::move(row));
  }
  stats.rows_read += t.rows.size();
  return t;
}

Table Catalog::scan_loaded(const SourceSchema& schema, const std::vector<ColumnDef>& columns,
                           ScanStats& stats) const {
  Table t;
  t.columns = columns;
  std::vector<std::vector<Value>> data;
  for (const auto& c : columns) {
    const fs::path p = source_dir(schema.source_name) / (c.name + ".col");
    std::string bytes = read_text_file(p);
    stats.bytes_read += bytes.size();
    data.push_back(decode_values(bytes, p.string()));
    if (data.back().size() != schema.row_count) throw IoError("row count mismatch in " + p.string());
  }
  t.rows.resize(schema.row_count);
  for (std::size_t r = 0; r < schema.row_count; ++r) {
    t.rows[r].reserve(columns.size());
    for (auto& col : data) t.rows[r].push_back(std::move(col[r]));
  }
  stats.rows_read += t.rows.size();
  return t;
}

CatalogCounters Catalog::counters() const {
  std::shared_lock lock(mutex_);
  CatalogCounters c = counters_;
  c.bytes_scanned = bytes_scanned_;
  return c;
}

std::uint64_t Catalog::base_storage_bytes() const {
  std::shared_lock lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& [name, schema] : sources_) {
    std::error_code ec;
    const auto sz = fs::file_size(schema.file, ec);
    if (!ec) total += sz;
    if (schema.state == BackendState::Loaded) {
      for (const auto& c : schema.columns) {
        const auto csz = fs::file_size(source_dir(name) / (c.name + ".col"), ec);
        if (!ec) total += csz;
      }
    }
  }
  return total;
}

std::uint64_t Catalog::column_file_bytes(std::string_view source, std::string_view column) const {
  std::shared_lock lock(mutex_);
  auto it = sources_.find(source);
  if (it == sources_.end() || it->second.state != BackendState::Loaded || !it->second.column(column)) {
    return 0;
  }
  std::error_code ec;
  const auto sz = fs::file_size(source_dir(source) / (std::string(column) + ".col"), ec);
  return ec ? 0 : sz;
}

}  // namespace evobench
