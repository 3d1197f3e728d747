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

#include "evobench/kvconfig.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "evobench/error.hpp"

namespace evobench {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::map<std::string, double> parse_kv_numbers(const std::string& text) {
  std::map<std::string, double> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("line " + std::to_string(lineno) + ": expected 'name = number'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    double number = 0;
    auto res = std::from_chars(val.data(), val.data() + val.size(), number);
    if (key.empty() || res.ec != std::errc() || res.ptr != val.data() + val.size()) {
      throw ValidationError("line " + std::to_string(lineno) + ": bad entry '" + line + "'");
    }
    out[key] = number;
  }
  return out;
}

std::map<std::string, double> read_kv_file(const std::filesystem::path& path) {
  return parse_kv_numbers(read_text_file(path));
}

std::string format_kv_numbers(const std::map<std::string, double>& values) {
  std::string out;
  for (const auto& [k, v] : values) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out += k + " = " + std::string(buf, res.ptr) + "\n";
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace evobench
