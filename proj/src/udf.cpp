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

#include "evobench/udf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"

#ifndef EVOBENCH_CONFIG_DIR
#define EVOBENCH_CONFIG_DIR "config"
#endif

namespace evobench::udf {

std::string fold_case(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokens.push_back(fold_case(text.substr(i, j - i)));
    i = j;
  }
  return tokens;
}

Lexicon::Lexicon(std::string name, const std::vector<std::pair<std::string, double>>& entries)
    : name_(std::move(name)) {
  for (const auto& [token, weight] : entries) {
    std::string folded = fold_case(token);
    if (folded.empty()) throw ValidationError("lexicon '" + name_ + "': empty token");
    if (!entries_.emplace(folded, weight).second) {
      throw ValidationError("lexicon '" + name_ + "': duplicate token '" + folded + "'");
    }
  }
}

Lexicon Lexicon::parse(std::string name, std::string_view text) {
  std::vector<std::pair<std::string, double>> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ValidationError("lexicon '" + name + "' line " + std::to_string(lineno) +
                            ": expected token<TAB>weight");
    }
    const std::string weight_text = line.substr(tab + 1);
    double weight = 0;
    auto res = std::from_chars(weight_text.data(), weight_text.data() + weight_text.size(), weight);
    if (res.ec != std::errc()) {
      throw ValidationError("lexicon '" + name + "' line " + std::to_string(lineno) +
                            ": bad weight");
    }
    entries.emplace_back(line.substr(0, tab), weight);
  }
  return Lexicon(std::move(name), entries);
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  return parse(path.stem().string(), read_text_file(path));
}

double Lexicon::weight(std::string_view token) const {
  auto it = entries_.find(token);
  return it == entries_.end() ? 0.0 : it->second;
}

bool Lexicon::contains(std::string_view token) const { return entries_.find(token) != entries_.end(); }

LexiconSet LexiconSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("lexicon directory missing: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".tsv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  LexiconSet set;
  for (const auto& f : files) set.add(Lexicon::load(f));
  return set;
}

void LexiconSet::add(Lexicon lexicon) {
  std::string name = lexicon.name();
  lexicons_.insert_or_assign(std::move(name), std::move(lexicon));
}

const Lexicon& LexiconSet::get(std::string_view name) const {
  auto it = lexicons_.find(name);
  if (it == lexicons_.end()) throw ValidationError("unknown lexicon '" + std::string(name) + "'");
  return it->second;
}

bool LexiconSet::has(std::string_view name) const { return lexicons_.find(name) != lexicons_.end(); }

std::vector<std::string> LexiconSet::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : lexicons_) out.push_back(k);
  return out;
}

std::filesystem::path default_lexicon_dir() {
  if (const char* env = std::getenv("EVOBENCH_CONFIG_DIR")) {
    return std::filesystem::path(env) / "lexicons";
  }
  return std::filesystem::path(EVOBENCH_CONFIG_DIR) / "lexicons";
}

const LexiconSet& default_lexicons() {
  static const LexiconSet set = LexiconSet::load_dir(default_lexicon_dir());
  return set;
}

double classify_text_score(std::string_view text, const Lexicon& lexicon) {
  double score = 0;
  for (const auto& token : tokenize(text)) score += lexicon.weight(token);
  return score;
}

double sentiment_score(std::string_view text, const Lexicon& signed_lexicon) {
  return classify_text_score(text, signed_lexicon);
}

bool classify_user_binary(const std::vector<std::string>& texts, const Lexicon& lexicon,
                          double min_hits) {
  double total = 0;
  for (const auto& t : texts) total += classify_text_score(t, lexicon);
  return total >= min_hits;
}

GridSpec::GridSpec(double resolution_degrees) : resolution_(resolution_degrees) {
  if (!(resolution_degrees > 0) || resolution_degrees > 360) {
    throw ValidationError("grid resolution must be in (0, 360]");
  }
  n_cols_ = static_cast<std::uint64_t>(std::ceil(360.0 / resolution_));
  n_rows_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(180.0 / resolution_)));
}

std::uint64_t grid_cell(double lat, double lon, const GridSpec& spec) {
  if (!(lat >= -90 && lat <= 90) || !(lon >= -180 && lon <= 180)) {
    throw DomainError("coordinate out of range");
  }
  auto row = static_cast<std::uint64_t>(std::floor((lat + 90.0) / spec.resolution()));
  auto col = static_cast<std::uint64_t>(std::floor((lon + 180.0) / spec.resolution()));
  row = std::min(row, spec.n_rows() - 1);
  col = std::min(col, spec.n_cols() - 1);
  return row * spec.n_cols() + col;
}

std::pair<std::uint64_t, std::uint64_t> grid_row_col(std::uint64_t cell, const GridSpec& spec) {
  return {cell / spec.n_cols(), cell % spec.n_cols()};
}

std::uint64_t grid_distance(std::uint64_t a, std::uint64_t b, const GridSpec& spec) {
  auto [ra, ca] = grid_row_col(a, spec);
  auto [rb, cb] = grid_row_col(b, spec);
  const std::uint64_t dr = ra > rb ? ra - rb : rb - ra;
  const std::uint64_t dc = ca > cb ? ca - cb : cb - ca;
  return std::max(dr, dc);
}

double menu_similarity(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  for (const auto& item : a) common += b.count(item);
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::vector<EntityScore> entity_sentiment(std::string_view text, const Lexicon& entities,
                                          const Lexicon& signed_lexicon, std::size_t window) {
  const auto tokens = tokenize(text);
  std::map<std::string, double> scores;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!entities.contains(tokens[i])) continue;
    const std::size_t lo = i >= window ? i - window : 0;
    const std::size_t hi = std::min(tokens.size() - 1, i + window);
    double s = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) s += signed_lexicon.weight(tokens[j]);
    }
    scores[tokens[i]] += s;
  }
  std::vector<EntityScore> out;
  out.reserve(scores.size());
  for (const auto& [e, s] : scores) out.push_back({e, s});
  return out;
}

double histogram_intersection(const std::map<std::string, std::int64_t>& a,
                              const std::map<std::string, std::int64_t>& b) {
  double ta = 0;
  double tb = 0;
  for (const auto& [k, v] : a) ta += static_cast<double>(v);
  for (const auto& [k, v] : b) tb += static_cast<double>(v);
  if (ta <= 0 || tb <= 0) return 0.0;
  double overlap = 0;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end()) {
      overlap += std::min(static_cast<double>(v) / ta, static_cast<double>(it->second) / tb);
    }
  }
  return std::min(1.0, overlap);
}

}  // namespace evobench::udf
