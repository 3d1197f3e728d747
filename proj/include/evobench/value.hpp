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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace evobench {

/// Semantic column types. Token lists and histograms are carried as strings:
/// lists are space-joined tokens, histograms use the "key:count;..." form
/// produced by encode_histogram.
enum class ColumnType : std::uint8_t { Int, Real, Text, Tokens, Histogram };

std::string_view to_string(ColumnType type);
ColumnType column_type_from_string(std::string_view name);
bool is_numeric(ColumnType type);

struct Null {
  bool operator==(const Null&) const = default;
};

/// A single cell. Alternative order matters: it is the cross-type sort order.
class Value {
 public:
  using Storage = std::variant<Null, std::int64_t, double, std::string>;

  Value() = default;
  Value(Null) {}
  Value(std::int64_t v) : data_(v) {}
  Value(int v) : data_(static_cast<std::int64_t>(v)) {}
  Value(double v) : data_(v) {}
  Value(std::string v) : data_(std::move(v)) {}
  Value(const char* v) : data_(std::string(v)) {}

  bool is_null() const { return std::holds_alternative<Null>(data_); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
  bool is_real() const { return std::holds_alternative<double>(data_); }
  bool is_string() const { return std::holds_alternative<std::string>(data_); }
  bool is_numeric() const { return is_int() || is_real(); }

  std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
  double as_real() const { return std::get<double>(data_); }
  const std::string& as_string() const { return std::get<std::string>(data_); }
  /// Numeric value widened to double. Precondition: is_numeric().
  double to_double() const;

  const Storage& storage() const { return data_; }

  bool operator==(const Value& other) const { return data_ == other.data_; }
  /// Total order: null < numbers (compared by value, int before real on ties) < strings.
  bool operator<(const Value& other) const;

  std::string to_string() const;
  std::size_t hash() const;

 private:
  Storage data_;
};

using Row = std::vector<Value>;

struct RowHash {
  std::size_t operator()(const Row& row) const;
};

bool row_less(const Row& a, const Row& b);

struct ColumnDef {
  std::string name;
  ColumnType type{ColumnType::Text};

  bool operator==(const ColumnDef&) const = default;
};

/// Rectangular, row-major result.
struct Table {
  std::vector<ColumnDef> columns;
  std::vector<Row> rows;

  std::optional<std::size_t> column_index(std::string_view name) const;
  std::size_t require_column(std::string_view name) const;
  std::vector<std::string> column_names() const;
  std::size_t byte_size() const;
};

/// Result of executing a plan plus where it came from.
struct ResultTable {
  Table table;
  std::string plan_signature;
  std::uint64_t snapshot_id{0};
};

/// Rows sorted by the total order; used for multiset comparison.
std::vector<Row> sorted_rows(const Table& table);
/// Stable hex digest of the row multiset (column names included).
std::string multiset_digest(const Table& table);
bool same_multiset(const Table& a, const Table& b);

std::string encode_histogram(const std::map<std::string, std::int64_t>& bins);
std::map<std::string, std::int64_t> decode_histogram(std::string_view text);

/// Binary value stream: a tag byte (0 null, 1 int, 2 real, 3 string) followed by an
/// 8-byte little-endian payload for numbers or a 4-byte little-endian length and the
/// bytes for strings.
void encode_value(std::string& out, const Value& v);
/// Throws IoError naming `context` for a truncated or corrupt stream.
std::vector<Value> decode_values(std::string_view bytes, const std::string& context);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t value);

}  // namespace evobench
