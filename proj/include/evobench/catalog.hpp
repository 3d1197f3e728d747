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
#include <atomic>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "evobench/value.hpp"

namespace evobench {

/// RAW queries the JSON file in place; LOADED converts columns to binary files first.
enum class Backend { Raw, Loaded };
enum class BackendState { Declared, Loaded };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);

struct SourceSchema {
  std::string source_name;
  std::vector<ColumnDef> columns;  // available columns, registration order
  std::filesystem::path file;
  Backend backend{Backend::Raw};
  BackendState state{BackendState::Declared};
  std::uint64_t row_count{0};   // known only once loaded
  std::uint64_t generation{0};  // changes whenever the source is (re)registered

  std::optional<ColumnDef> column(std::string_view name) const;
};

struct IngestionTiming {
  double declare_seconds{0};
  double load_seconds{0};
  std::vector<std::string> columns_loaded;
  /// Bytes written to columnar files by this operation.
  std::uint64_t bytes_loaded{0};
  /// Bytes of raw JSON read by this operation.
  std::uint64_t bytes_parsed{0};

  double total_seconds() const { return declare_seconds + load_seconds; }
};

struct ScanStats {
  std::uint64_t rows_read{0};
  std::uint64_t bytes_read{0};
};

/// Catalog-wide running counters; cleared by reset().
struct CatalogCounters {
  std::uint64_t bytes_loaded{0};
  std::uint64_t bytes_parsed{0};
  std::uint64_t bytes_scanned{0};
  std::uint64_t registrations{0};
};

/// Registered sources and their storage. Mutations are serialized; scans may run
/// concurrently between mutations.
///
/// Layout: <dir>/<source>/<column>.col plus <dir>/<source>/manifest.json.
/// A .col file is a sequence of values, each a tag byte (0 null, 1 int, 2 real,
/// 3 string) followed by an 8-byte little-endian payload for numbers or a
/// 4-byte little-endian length and the bytes for strings.
class Catalog {
 public:
  explicit Catalog(std::filesystem::path dir);

  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  /// Throws ValidationError for an unknown column or a re-registered name,
  /// IngestionError (with line number) for a malformed record, IoError for a missing file.
  IngestionTiming register_source(const std::string& name, const std::vector<ColumnDef>& columns,
                                  const std::filesystem::path& file, Backend backend);

  /// Makes additional columns available, extracting only those columns.
  IngestionTiming extend_columns(const std::string& name, const std::vector<ColumnDef>& new_columns);

  /// Drops every source, its columnar files and the counters.
  void reset();

  std::vector<std::string> list_sources() const;
  bool has_source(std::string_view name) const;
  std::optional<SourceSchema> describe(std::string_view name) const;
  bool column_available(std::string_view source, std::string_view column) const;
  std::uint64_t generation(std::string_view source) const;

  /// Reads the requested columns in the requested order. Throws CatalogError when
  /// the source or a column is not available.
  Table scan(std::string_view source, const std::vector<std::string>& columns,
             ScanStats* stats = nullptr) const;

  CatalogCounters counters() const;
  /// Raw files of registered sources plus their columnar copies.
  std::uint64_t base_storage_bytes() const;
  /// Size of one loaded column file; 0 when the column is not loaded.
  std::uint64_t column_file_bytes(std::string_view source, std::string_view column) const;

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path source_dir(std::string_view source) const;
  void write_manifest(const SourceSchema& schema) const;
  Table scan_raw(const SourceSchema& schema, const std::vector<ColumnDef>& columns,
                 ScanStats& stats) const;
  Table scan_loaded(const SourceSchema& schema, const std::vector<ColumnDef>& columns,
                    ScanStats& stats) const;

  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SourceSchema, std::less<>> sources_;
  CatalogCounters counters_;
  mutable std::atomic<std::uint64_t> bytes_scanned_{0};
  std::uint64_t next_generation_{1};
};

}  // namespace evobench
