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

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "evobench/error.hpp"
#include "evobench/udf.hpp"

using namespace evobench;
using namespace evobench::udf;

namespace {

Lexicon wine() { return Lexicon("wine", {{"merlot", 1}, {"cabernet", 1}, {"vineyard", 1}, {"chardonnay", 1}}); }
Lexicon signs() { return Lexicon("signs", {{"good", 1}, {"bad", -1}}); }

/// Brute-force token scan: split on spaces by hand and look every token up.
double oracle_score(const std::string& text, const std::vector<std::pair<std::string, double>>& lex) {
  double total = 0;
  std::string tok;
  auto flush = [&] {
    std::string lower;
    for (char c : tok) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& [t, w] : lex) {
      if (t == lower) total += w;
    }
    tok.clear();
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      tok += c;
    }
  }
  flush();
  return total;
}

}  // namespace

TEST_CASE("classify_text_score examples") {
  CHECK(classify_text_score("", wine()) == 0);
  CHECK(classify_text_score("i love merlot and cabernet", wine()) ==
        oracle_score("i love merlot and cabernet", {{"merlot", 1}, {"cabernet", 1}}));
  CHECK(classify_text_score("i love merlot and cabernet", wine()) == 2);
  CHECK(classify_text_score("Merlot", wine()) == 1);
}

TEST_CASE("classify_text_score agrees with a brute-force scan on random texts") {
  const std::vector<std::pair<std::string, double>> entries{{"merlot", 1.5}, {"ipa", 2}, {"pinot", 0.25}};
  const Lexicon lex("mixed", entries);
  const std::vector<std::string> vocab{"Merlot", "ipa", "IPA", "pinot", "the", "a", "wine", "x"};
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const int n = static_cast<int>(rng() % 12);
    for (int k = 0; k < n; ++k) text += (k ? (rng() % 3 ? " " : "  ") : "") + vocab[rng() % vocab.size()];
    CHECK(classify_text_score(text, lex) == doctest::Approx(oracle_score(text, entries)));
  }
}

TEST_CASE("classify_text_score is additive over concatenation") {
  const std::string a = "merlot at the vineyard", b = "cabernet or water";
  CHECK(classify_text_score(a + " " + b, wine()) == classify_text_score(a, wine()) + classify_text_score(b, wine()));
}

TEST_CASE("lexicon entry order never changes scores") {
  const Lexicon fwd("l", {{"a", 1}, {"b", -2}, {"c", 0.5}});
  const Lexicon rev("l", {{"c", 0.5}, {"b", -2}, {"a", 1}});
  for (const char* t : {"a b c", "c c a", "", "b"}) CHECK(sentiment_score(t, fwd) == sentiment_score(t, rev));
}

TEST_CASE("lexicon validation and parsing") {
  CHECK_THROWS_AS(Lexicon("x", {{"", 1}}), ValidationError);
  CHECK_THROWS_AS(Lexicon("x", {{"a", 1}, {"A", 2}}), ValidationError);
  const auto lex = Lexicon::parse("p", "# header\nGood\t1\n\nbad\t-1\n");
  CHECK(lex.weight("good") == 1);
  CHECK(lex.weight("bad") == -1);
  CHECK(lex.weight("none") == 0);
  CHECK_THROWS_AS(Lexicon::parse("p", "good 1\n"), ValidationError);
}

TEST_CASE("sentiment_score examples") {
  CHECK(sentiment_score("", signs()) == 0);
  CHECK(sentiment_score("good good bad", signs()) == 1);
  CHECK(sentiment_score("bad", signs()) == -1);
}

TEST_CASE("classify_user_binary examples") {
  CHECK_FALSE(classify_user_binary({}, wine(), 1));
  CHECK(classify_user_binary({"merlot tonight", "no wine", "cabernet and chardonnay"}, wine(), 3));
  CHECK_FALSE(classify_user_binary({"merlot tonight", "cabernet"}, wine(), 3));
  CHECK(classify_user_binary({}, wine(), 0));
  CHECK(classify_user_binary({"nothing here"}, wine(), 0));
}

TEST_CASE("grid_cell examples") {
  CHECK(grid_cell(-90, -180, GridSpec(1)) == 0);
  CHECK(grid_cell(0, 0, GridSpec(1)) == 90 * 360 + 180);
  // Two columns and one row at 180 degrees: floor(90/180) = 0, floor(180/180) = 1.
  const GridSpec coarse(180);
  CHECK(coarse.n_cols() == 2);
  CHECK(coarse.n_rows() == 1);
  CHECK(grid_cell(0, 0, coarse) == 1);
}

TEST_CASE("grid_cell matches the row-major formula and clamps edges") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
  for (double res : {0.25, 1.0, 7.0, 45.0, 360.0}) {
    const GridSpec g(res);
    const auto cols = static_cast<std::uint64_t>(std::ceil(360.0 / res));
    const auto rows = static_cast<std::uint64_t>(std::ceil(180.0 / res));
    for (int i = 0; i < 200; ++i) {
      const double a = lat(rng), o = lon(rng);
      auto r = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor((a + 90) / res)), rows - 1);
      auto c = std::min<std::uint64_t>(static_cast<std::uint64_t>(std::floor((o + 180) / res)), cols - 1);
      CHECK(grid_cell(a, o, g) == r * cols + c);
    }
    CHECK(grid_cell(90, 180, g) == rows * cols - 1);
  }
  CHECK_THROWS_AS(grid_cell(90.5, 0, GridSpec(1)), DomainError);
  CHECK_THROWS_AS(grid_cell(0, -181, GridSpec(1)), DomainError);
  CHECK_THROWS_AS(GridSpec(0), ValidationError);
  CHECK_THROWS_AS(GridSpec(361), ValidationError);
}

TEST_CASE("grid cells are a bijection with row/col pairs") {
  const GridSpec g(30);
  std::set<std::uint64_t> seen;
  for (std::uint64_t r = 0; r < g.n_rows(); ++r) {
    for (std::uint64_t c = 0; c < g.n_cols(); ++c) {
      const double lat = -90 + (static_cast<double>(r) + 0.5) * 30, lon = -180 + (static_cast<double>(c) + 0.5) * 30;
      const auto cell = grid_cell(lat, lon, g);
      CHECK(seen.insert(cell).second);
      CHECK(grid_row_col(cell, g) == std::make_pair(r, c));
    }
  }
  CHECK(seen.size() == g.n_rows() * g.n_cols());
  CHECK(grid_distance(grid_cell(-75, -165, g), grid_cell(15, -105, g), g) == 3);
}

TEST_CASE("menu_similarity examples and properties") {
  CHECK(menu_similarity({"a", "b"}, {"a", "b"}) == 1.0);
  CHECK(menu_similarity({"a"}, {"b"}) == 0.0);
  CHECK(menu_similarity({"a", "b"}, {"b", "c"}) == doctest::Approx(1.0 / 3.0));
  CHECK(menu_similarity({}, {}) == 0.0);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    std::set<std::string> a, b;
    for (int k = 0; k < 6; ++k) {
      if (rng() % 2) a.insert(std::string(1, static_cast<char>('a' + rng() % 8)));
      if (rng() % 2) b.insert(std::string(1, static_cast<char>('a' + rng() % 8)));
    }
    const double s = menu_similarity(a, b);
    CHECK(s == menu_similarity(b, a));
    CHECK(s >= 0);
    CHECK(s <= 1);
  }
}

TEST_CASE("entity_sentiment examples") {
  const Lexicon entities("e", {{"service", 1}, {"food", 1}});
  CHECK(entity_sentiment("nothing to see", entities, signs(), 2).empty());
  const auto one = entity_sentiment("service good", entities, signs(), 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == EntityScore{"service", 1});
  const auto twice = entity_sentiment("good service then bad service", entities, signs(), 1);
  REQUIRE(twice.size() == 1);
  CHECK(twice[0].entity == "service");
  CHECK(twice[0].score == 0);  // +1 from the first occurrence, -1 from the second
  const auto two = entity_sentiment("food bad x x x service good", entities, signs(), 1);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == EntityScore{"food", -1});
  CHECK(two[1] == EntityScore{"service", 1});
  CHECK(entity_sentiment("good service good", entities, signs(), 0)[0].score == 0);
}

TEST_CASE("entity_sentiment agrees with a windowed brute-force scan") {
  const Lexicon entities("e", {{"service", 1}, {"staff", 1}});
  const std::vector<std::string> vocab{"service", "staff", "good", "bad", "the", "was"};
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    std::vector<std::string> toks;
    const int n = static_cast<int>(rng() % 10);
    for (int k = 0; k < n; ++k) toks.push_back(vocab[rng() % vocab.size()]);
    std::string text;
    for (const auto& t : toks) text += (text.empty() ? "" : " ") + t;
    const std::size_t window = rng() % 3;
    std::map<std::string, double> want;
    for (std::size_t p = 0; p < toks.size(); ++p) {
      if (toks[p] != "service" && toks[p] != "staff") continue;
      double s = 0;
      for (std::size_t q = 0; q < toks.size(); ++q) {
        const std::size_t d = p > q ? p - q : q - p;
        if (q == p || d > window) continue;
        if (toks[q] == "good") s += 1;
        if (toks[q] == "bad") s -= 1;
      }
      want[toks[p]] += s;
    }
    const auto got = entity_sentiment(text, entities, signs(), window);
    REQUIRE(got.size() == want.size());
    std::size_t k = 0;
    for (const auto& [e, s] : want) {
      CHECK(got[k].entity == e);
      CHECK(got[k].score == s);
      ++k;
    }
  }
}

TEST_CASE("histogram_intersection is normalized overlap") {
  CHECK(histogram_intersection({{"a", 2}, {"b", 2}}, {{"a", 1}, {"b", 1}}) == doctest::Approx(1.0));
  CHECK(histogram_intersection({{"a", 1}}, {{"b", 1}}) == 0.0);
  CHECK(histogram_intersection({{"a", 3}, {"b", 1}}, {{"a", 1}, {"b", 1}}) == doctest::Approx(0.75));
  CHECK(histogram_intersection({}, {{"a", 1}}) == 0.0);
}

TEST_CASE("shipped lexicons are all present") {
  const auto& set = default_lexicons();
  for (const char* name : {"wine", "food", "beer", "beer_word", "luxury", "sports", "affluence", "sentiment", "entities"}) {
    CHECK_MESSAGE(set.has(name), name);
  }
  CHECK(set.get("wine").contains("merlot"));
  CHECK(set.get("sentiment").weight("bad") < 0);
  CHECK_THROWS_AS(set.get("nope"), ValidationError);
}
