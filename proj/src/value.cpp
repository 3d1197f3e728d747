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

#include "evobench/value.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>

#include "evobench/error.hpp"

namespace evobench {

std::string_view to_string(ColumnType type) {
  switch (type) {
    case ColumnType::Int:
      return "int";
    case ColumnType::Real:
      return "real";
    case ColumnType::Text:
      return "text";
    case ColumnType::Tokens:
      return "tokens";
    case ColumnType::Histogram:
      return "histogram";
  }
  return "text";
}

ColumnType column_type_from_string(std::string_view name) {
  if (name == "int") return ColumnType::Int;
  if (name == "real") return ColumnType::Real;
  if (name == "text") return ColumnType::Text;
  if (name == "tokens") return ColumnType::Tokens;
  if (name == "histogram") return ColumnType::Histogram;
  throw ValidationError("unknown column type '" + std::string(name) + "'");
}

bool is_numeric(ColumnType type) { return type == ColumnType::Int || type == ColumnType::Real; }

double Value::to_double() const {
  if (is_int()) return static_cast<double>(as_int());
  return as_real();
}

namespace {

int rank(const Value& v) {
  if (v.is_null()) return 0;
  if (v.is_numeric()) return 1;
  return 2;
}

}  // namespace

bool Value::operator<(const Value& other) const {
  const int ra = rank(*this);
  const int rb = rank(other);
  if (ra != rb) return ra < rb;
  if (ra == 0) return false;
  if (ra == 2) return as_string() < other.as_string();
  if (is_int() && other.is_int()) return as_int() < other.as_int();
  const double a = to_double();
  const double b = other.to_double();
  if (a != b) return a < b;
  // equal magnitude: int sorts first
  return is_int() && other.is_real();
}

std::string Value::to_string() const {
  if (is_null()) return "null";
  if (is_int()) return std::to_string(as_int());
  if (is_real()) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), as_real());
    return std::string(buf, res.ptr);
  }
  return as_string();
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xf];
    value >>= 4;
  }
  return out;
}

std::size_t Value::hash() const {
  switch (data_.index()) {
    case 0:
      return 0x9e3779b97f4a7c15ULL;
    case 1:
      return std::hash<std::int64_t>{}(as_int()) * 31 + 1;
    case 2:
      return std::hash<double>{}(as_real()) * 31 + 2;
    default:
      return std::hash<std::string>{}(as_string()) * 31 + 3;
  }
}

std::size_t RowHash::operator()(const Row& row) const {
  std::size_t h = 0xcbf29ce484222325ULL;
  for (const auto& v : row) h = (h ^ v.hash()) * 0x100000001b3ULL;
  return h;
}

bool row_less(const Row& a, const Row& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  auto idx = column_index(name);
  if (!idx) throw PlanError("column '" + std::string(name) + "' not in input");
  return *idx;
}

std::vector<std::string> Table::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

std::size_t Table::byte_size() const {
  std::size_t total = 0;
  for (const auto& row : rows) {
    for (const auto& v : row) {
      total += 1;
      if (v.is_numeric()) total += 8;
      if (v.is_string()) total += 4 + v.as_string().size();
    }
  }
  return total;
}

std::vector<Row> sorted_rows(const Table& table) {
  std::vector<Row> rows = table.rows;
  std::sort(rows.begin(), rows.end(), row_less);
  return rows;
}

namespace {

void append_value(std::string& out, const Value& v) {
  out.push_back(static_cast<char>('0' + v.storage().index()));
  if (v.is_int()) {
    out += std::to_string(v.as_int());
  } else if (v.is_real()) {
    double d = v.as_real();
    char bytes[sizeof d];
    std::memcpy(bytes, &d, sizeof d);
    out.append(bytes, sizeof d);
  } else if (v.is_string()) {
    out += std::to_string(v.as_string().size());
    out.push_back(':');
    out += v.as_string();
  }
  out.push_back('|');
}

}  // namespace

std::string multiset_digest(const Table& table) {
  std::string buf;
  for (const auto& c : table.columns) {
    buf += c.name;
    buf.push_back(',');
  }
  buf.push_back('\n');
  std::uint64_t h = fnv1a64(buf);
  for (const auto& row : sorted_rows(table)) {
    std::string line;
    for (const auto& v : row) append_value(line, v);
    line.push_back('\n');
    h = fnv1a64(line, h);
  }
  return to_hex(h) + "-" + std::to_string(table.rows.size());
}

bool same_multiset(const Table& a, const Table& b) {
  if (a.column_names() != b.column_names()) return false;
  return sorted_rows(a) == sorted_rows(b);
}

std::string encode_histogram(const std::map<std::string, std::int64_t>& bins) {
  std::string out;
  for (const auto& [key, count] : bins) {
    if (!out.empty()) out.push_back(';');
    out += key;
    out.push_back(':');
    out += std::to_string(count);
  }
  return out;
}

std::map<std::string, std::int64_t> decode_histogram(std::string_view text) {
  std::map<std::string, std::int64_t> bins;
  while (!text.empty()) {
    auto end = text.find(';');
    auto item = text.substr(0, end);
    auto colon = item.rfind(':');
    if (colon == std::string_view::npos) throw ValidationError("malformed histogram entry");
    std::int64_t count = 0;
    auto cnt = item.substr(colon + 1);
    auto res = std::from_chars(cnt.data(), cnt.data() + cnt.size(), count);
    if (res.ec != std::errc()) throw ValidationError("malformed histogram count");
    bins[std::string(item.substr(0, colon))] += count;
    if (end == std::string_view::npos) break;
    text.remove_prefix(end + 1);
  }
  return bins;
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

void encode_value(std::string& out, const Value& v) {
  if (v.is_null()) {
    out.push_back(0);
  } else if (v.is_int()) {
    out.push_back(1);
    put_u64(out, static_cast<std::uint64_t>(v.as_int()));
  } else if (v.is_real()) {
    out.push_back(2);
    std::uint64_t bits = 0;
    const double d = v.as_real();
    std::memcpy(&bits, &d, sizeof bits);
    put_u64(out, bits);
  } else {
    out.push_back(3);
    put_u32(out, static_cast<std::uint32_t>(v.as_string().size()));
    out += v.as_string();
  }
}

std::vector<Value> decode_values(std::string_view bytes, const std::string& context) {
  std::vector<Value> values;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const auto* end = p + bytes.size();
  auto need = [&](std::size_t n) {
    if (static_cast<std::size_t>(end - p) < n) throw IoError("truncated value stream in " + context);
  };
  while (p < end) {
    const unsigned char tag = *p++;
    switch (tag) {
      case 0:
        values.emplace_back(Null{});
        break;
      case 1:
        need(8);
        values.emplace_back(static_cast<std::int64_t>(get_u64(p)));
        p += 8;
        break;
      case 2: {
        need(8);
        const std::uint64_t bits = get_u64(p);
        double d = 0;
        std::memcpy(&d, &bits, sizeof d);
        values.emplace_back(d);
        p += 8;
        break;
      }
      case 3: {
        need(4);
        const std::uint32_t len = get_u32(p);
        p += 4;
        need(len);
        values.emplace_back(std::string(reinterpret_cast<const char*>(p), len));
        p += len;
        break;
      }
      default:
        throw IoError("bad value tag in " + context);
    }
  }
  return values;
}

}  // namespace evobench
