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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evobench::udf {

/// Bag-of-words weights. Tokens are stored case-folded.
class Lexicon {
 public:
  Lexicon() = default;
  /// Throws ValidationError on an empty or duplicate token.
  Lexicon(std::string name, const std::vector<std::pair<std::string, double>>& entries);

  /// "token<TAB>weight" per line; '#' lines and blank lines ignored.
  static Lexicon parse(std::string name, std::string_view text);
  static Lexicon load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  const std::map<std::string, double, std::less<>>& entries() const { return entries_; }
  /// 0 for tokens not in the lexicon. `token` must already be lower case.
  double weight(std::string_view token) const;
  bool contains(std::string_view token) const;

 private:
  std::string name_;
  std::map<std::string, double, std::less<>> entries_;
};

/// Named lexicons, loaded from a directory of `<name>.tsv` files.
class LexiconSet {
 public:
  static LexiconSet load_dir(const std::filesystem::path& dir);

  void add(Lexicon lexicon);
  /// Throws ValidationError for an unknown name.
  const Lexicon& get(std::string_view name) const;
  bool has(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Lexicon, std::less<>> lexicons_;
};

/// Directory holding the shipped lexicons (config/lexicons in the source tree).
std::filesystem::path default_lexicon_dir();
const LexiconSet& default_lexicons();

std::string fold_case(std::string_view text);
/// Whitespace tokenization of case-folded text.
std::vector<std::string> tokenize(std::string_view text);

/// Sum of lexicon weights over whitespace tokens (misses weigh 0).
double classify_text_score(std::string_view text, const Lexicon& lexicon);
/// Same token sum with a signed lexicon.
double sentiment_score(std::string_view text, const Lexicon& signed_lexicon);
/// True iff the summed score over all texts reaches min_hits.
bool classify_user_binary(const std::vector<std::string>& texts, const Lexicon& lexicon,
                          double min_hits);

struct GridSpec {
  explicit GridSpec(double resolution_degrees);

  double resolution() const { return resolution_; }
  std::uint64_t n_cols() const { return n_cols_; }
  std::uint64_t n_rows() const { return n_rows_; }

 private:
  double resolution_;
  std::uint64_t n_cols_;
  std::uint64_t n_rows_;
};

/// Row-major cell number; north/east edges clamp into the last row/column.
/// Throws DomainError for coordinates outside [-90,90] x [-180,180].
std::uint64_t grid_cell(double lat, double lon, const GridSpec& spec);
std::pair<std::uint64_t, std::uint64_t> grid_row_col(std::uint64_t cell, const GridSpec& spec);
/// Chebyshev distance between two cells measured in cells.
std::uint64_t grid_distance(std::uint64_t a, std::uint64_t b, const GridSpec& spec);

/// Jaccard similarity; two empty menus score 0.
double menu_similarity(const std::set<std::string>& a, const std::set<std::string>& b);

struct EntityScore {
  std::string entity;
  double score{0};

  bool operator==(const EntityScore&) const = default;
};

/// Entities are entity-lexicon tokens in the text, one entry per distinct entity
/// ordered by entity. Each occurrence contributes the signed sum of sentiment
/// tokens within +-window positions (excluding itself).
std::vector<EntityScore> entity_sentiment(std::string_view text, const Lexicon& entities,
                                          const Lexicon& signed_lexicon, std::size_t window);

/// Overlap of two histograms after normalizing each to unit mass, in [0,1].
double histogram_intersection(const std::map<std::string, std::int64_t>& a,
                              const std::map<std::string, std::int64_t>& b);

}  // namespace evobench::udf
