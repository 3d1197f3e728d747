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

#include "evobench/workload.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>
#include <set>

#include "evobench/datagen.hpp"
#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"

#ifndef EVOBENCH_CONFIG_DIR
#define EVOBENCH_CONFIG_DIR "config"
#endif

namespace evobench::workload {

using namespace evobench::engine;

ParamSet::ParamSet(std::map<std::string, double> values) : values_(std::move(values)) {
  for (const auto& [k, v] : values_) {
    if (!std::isfinite(v)) throw ValidationError("parameter '" + k + "' is not finite");
  }
}

double ParamSet::get(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ParameterError(name);
  return it->second;
}

double ParamSet::get(int analyst, int version, const std::string& name) const {
  const std::string prefix = "a" + std::to_string(analyst) + ".";
  for (int v = version; v >= 1; --v) {
    auto it = values_.find(prefix + "v" + std::to_string(v) + "." + name);
    if (it != values_.end()) return it->second;
  }
  return get(prefix + name);
}

void ParamSet::set(const std::string& name, double value) {
  if (!std::isfinite(value)) throw ValidationError("parameter '" + name + "' is not finite");
  values_[name] = value;
}

ParamSet ParamSet::parse(const std::string& text) { return ParamSet(parse_kv_numbers(text)); }

ParamSet ParamSet::load(const std::filesystem::path& path) { return ParamSet(read_kv_file(path)); }

std::string ParamSet::to_text() const { return format_kv_numbers(values_); }

std::filesystem::path default_params_path() {
  if (const char* env = std::getenv("EVOBENCH_CONFIG_DIR")) return std::filesystem::path(env) / "params.conf";
  return std::filesystem::path(EVOBENCH_CONFIG_DIR) / "params.conf";
}

ParamSet default_params() {
  return ParamSet({
      // shared interpretation knobs
      {"grid_resolution", 0.25},
      {"local_lat_min", 37.3},
      {"local_lat_max", 38.1},
      {"local_lon_min", -122.7},
      {"local_lon_max", -121.9},
      {"much_lower_ratio", 0.5},
      {"sufficiently_far_cells", 1},
      {"significant_overlap_fraction", 0.2},
      {"recent_window_months", 1},
      {"affluence_min_hits", 2},
      {"sports_min_hits", 2},
      {"entity_window", 2},
      // analyst 1
      {"a1.x1", 3},
      {"a1.v2.x1", 2},
      {"a1.x2", 3},
      {"a1.x3", 0},
      {"a1.v3.x1", 1},
      {"a1.v3.x2", 2},
      {"a1.x4", 10},
      {"a1.x5", 0},
      {"a1.x6", 0},
      {"a1.v4.x2", 1},
      // analyst 2
      {"a2.x1", 0.3},
      {"a2.x2", 1},
      {"a2.v3.x2", 0},
      {"a2.x3", 2},
      {"a2.x4", 2},
      {"a2.v4.x3", 1},
      {"a2.x5", 2},
      {"a2.x6", 0.5},
      // analyst 3
      {"a3.x1", 2},
      {"a3.x2", 0},
      {"a3.x3", 1},
      {"a3.x4", 0},
      {"a3.v3.x2", 1},
      {"a3.x5", 1},
      // analyst 4
      {"a4.x1", 1},
      {"a4.x2", 1},
      {"a4.x3", 0},
      {"a4.x4", 0},
      {"a4.x5", 100},
      {"a4.x6", 0},
      {"a4.x7", 0},
      // analyst 5
      {"a5.x1", 1},
      {"a5.x2", 1},
      {"a5.x3", 0},
      {"a5.x4", 0},
      {"a5.v4.x4", 0.05},
      {"a5.x5", 0},
      {"a5.x6", 5},
      // analyst 6
      {"a6.x1", 6},
      {"a6.x2", 0.5},
      {"a6.v3.x2", 0.8},
      {"a6.x3", 6},
      {"a6.x4", 0.5},
      {"a6.v4.x4", 0.8},
      {"a6.x5", 1},
      // analyst 7
      {"a7.x1", 0},
      {"a7.x2", 0},
      {"a7.x3", 5},
      {"a7.x4", 20},
      {"a7.x5", 1},
      {"a7.x6", 5},
      {"a7.x7", 0.5},
      {"a7.x8", 0},
      // analyst 8
      {"a8.x1", 0},
      {"a8.x2", 0},
      {"a8.x3", 1},
      {"a8.x4", 0},
      {"a8.v4.x4", 1},
      {"a8.x5", 2},
  });
}

// ---------------------------------------------------------------------------
// Plan builders

namespace {

const char* const T = datagen::kTwitter;
const char* const F = datagen::kFoursquare;
const char* const L = datagen::kLandmarks;

NodePtr src(const std::string& source, const std::vector<std::string>& names) {
  const auto& schema = datagen::schema_for(source);
  std::vector<ColumnDef> cols;
  for (const auto& n : names) {
    auto it = std::find_if(schema.begin(), schema.end(), [&](const ColumnDef& c) { return c.name == n; });
    if (it == schema.end()) throw ValidationError("source '" + source + "' has no column '" + n + "'");
    cols.push_back(*it);
  }
  return scan(source, cols);
}

AggSpec count_as(std::string out) { return {AggFunc::Count, "", std::move(out)}; }
AggSpec sum_of(std::string in, std::string out) { return {AggFunc::Sum, std::move(in), std::move(out)}; }
AggSpec avg_of(std::string in, std::string out) { return {AggFunc::Avg, std::move(in), std::move(out)}; }
AggSpec max_of(std::string in, std::string out) { return {AggFunc::Max, std::move(in), std::move(out)}; }
AggSpec hist_of(std::string in, std::string out) { return {AggFunc::Histogram, std::move(in), std::move(out)}; }

UdfSpec classify(std::string lexicon) { return {UdfKind::ClassifyScore, std::move(lexicon), "", 0}; }
UdfSpec classify_user(std::string lexicon, double min_hits) {
  return {UdfKind::ClassifyUser, std::move(lexicon), "", min_hits};
}
UdfSpec grid(double res) { return {UdfKind::GridCell, "", "", res}; }

using Keys = std::vector<std::pair<std::string, std::string>>;

/// Context for one (analyst, version) build.
struct Ctx {
  int analyst;
  int version;
  const ParamSet& params;

  double x(const std::string& name) const { return params.get(analyst, version, name); }
  double named(const std::string& name) const { return params.get(name); }
};

/// Friendship strength: directed messages counted in both directions.
NodePtr friend_pairs() {
  PairGenSpec p;
  p.mode = PairMode::Edge;
  p.a = "user_id";
  p.b = "dest_user_id";
  p.symmetric = true;
  return pair_gen(src(T, {"user_id", "dest_user_id"}), p);
}

/// Checkins at restaurants, with the landmark columns listed.
NodePtr restaurant_checkins(const std::vector<std::string>& landmark_cols) {
  return filter(join(src(F, {"user_id", "venue_id"}), src(L, landmark_cols), {{"venue_id", "venue_id"}}),
                "venue_type", Cmp::Eq, Value("restaurant"));
}

NodePtr analyst1(const Ctx& c) {
  const int v = c.version;
  auto wine = group_agg(map_udf(src(T, {"user_id", "text", "lat", "lon"}), classify("wine"), {"text"}, {"wine_score"}),
                        {"user_id"},
                        {sum_of("wine_score", "wine_score"), count_as("tweet_count"), avg_of("lat", "lat"),
                         avg_of("lon", "lon")});
  auto a = filter(wine, "wine_score", Cmp::Gt, c.x("x1"));
  auto b = filter(friend_pairs(), "strength", Cmp::Gt, c.x("x2"));
  auto affluent = group_udaf(src(T, {"user_id", "text"}), {"user_id"},
                             classify_user("affluence", c.named("affluence_min_hits")), "text", "affluent");
  auto cc = filter(affluent, "affluent", Cmp::Eq, Value(1));
  NodePtr spine = join(join(a, b, {{"user_id", "u1"}}), cc, {{"user_id", "user_id"}});
  if (v == 1) return spine;

  auto wine_bar = filter(join(src(F, {"user_id", "venue_id"}), src(L, {"venue_id", "venue_type"}),
                              {{"venue_id", "venue_id"}}),
                         "venue_type", Cmp::Eq, Value("wine-bar"));
  auto checkins = group_agg(wine_bar, {"user_id"}, {count_as("checkin_count")});
  auto d = filter(checkins, "checkin_count", Cmp::Gt, c.x("x3"));
  spine = join(spine, d, {{"user_id", "user_id"}});
  if (v == 2) return spine;

  spine = filter(spine, "lat", Cmp::Ge, c.named("local_lat_min"));
  spine = filter(spine, "lat", Cmp::Le, c.named("local_lat_max"));
  spine = filter(spine, "lon", Cmp::Ge, c.named("local_lon_min"));
  spine = filter(spine, "lon", Cmp::Le, c.named("local_lon_max"));
  spine = filter(spine, "tweet_count", Cmp::Gt, c.x("x4"));
  if (v == 3) return spine;

  auto friend_checkins = filter(join(b, checkins, {{"u2", "user_id"}}), "checkin_count", Cmp::Gt, c.x("x5"));
  auto e = filter(group_agg(friend_checkins, {"u1"}, {count_as("friend_count")}), "friend_count", Cmp::Gt,
                  c.x("x6"));
  return join(spine, e, {{"user_id", "u1"}});
}

NodePtr analyst2(const Ctx& c) {
  const int v = c.version;
  auto rc = restaurant_checkins({"venue_id", "venue_type", "subtype", "zip", "rating"});
  auto counts = group_agg(rc, {"user_id"}, {count_as("rcount")});
  auto normalized = filter_ratio(global_agg(counts, max_of("rcount", "max_rcount")), "rcount", "max_rcount",
                                 Cmp::Gt, c.x("x1"));
  NodePtr spine = normalized;
  if (v == 1) return spine;

  auto food = filter(group_agg(map_udf(src(T, {"user_id", "text"}), classify("food"), {"text"}, {"food_score"}),
                               {"user_id"}, {sum_of("food_score", "food_score")}),
                     "food_score", Cmp::Gt, c.x("x2"));
  spine = join(spine, food, {{"user_id", "user_id"}});
  if (v == 2) return spine;

  auto per_type = filter(group_agg(rc, {"user_id", "subtype"}, {count_as("type_visits")}), "type_visits", Cmp::Ge,
                         c.x("x4"));
  auto types = filter(group_agg(per_type, {"user_id"}, {count_as("n_types")}), "n_types", Cmp::Ge, c.x("x3"));
  spine = join(spine, types, {{"user_id", "user_id"}});
  if (v == 3) return spine;

  // share of low-rated checkins below x6  <=>  share of the others above 1 - x6
  auto high = group_agg(filter(rc, "rating", Cmp::Ge, c.x("x5")), {"user_id"}, {count_as("high_count")});
  return filter_ratio(join(spine, high, {{"user_id", "user_id"}}), "high_count", "rcount", Cmp::Gt,
                      1.0 - c.x("x6"));
}

NodePtr analyst3(const Ctx& c) {
  const int v = c.version;
  auto rc = restaurant_checkins({"venue_id", "venue_type", "subtype", "zip", "rating"});
  NodePtr friends;
  if (v == 1) {
    friends = filter(friend_pairs(), "strength", Cmp::Gt, c.x("x1"));
  } else {
    auto strong = filter(friend_pairs(), "strength", Cmp::Gt, c.x("x3"));
    auto home = project(argmax_per_group(group_agg(rc, {"user_id", "zip"}, {count_as("zip_checkins")}),
                                         {"user_id"}, "zip_checkins"),
                        {{"user_id", "user_id"}, {"zip", "home_zip"}});
    auto h1 = project(home, {{"user_id", "u1"}, {"home_zip", "zip1"}});
    auto h2 = project(home, {{"user_id", "u2"}, {"home_zip", "zip2"}});
    auto same_area = filter_columns(join(join(strong, h1, {{"u1", "u1"}}), h2, {{"u2", "u2"}}), "zip1", Cmp::Eq,
                                    "zip2");
    auto m1 = project(strong, {{"u1", "u1"}, {"u2", "m"}});
    auto m2 = project(strong, {{"u1", "u2"}, {"u2", "m"}});
    auto common = filter_columns(join(m1, m2, {{"m", "m"}}), "u1", Cmp::Ne, "u2");
    auto mutual = filter(group_agg(common, {"u1", "u2"}, {count_as("mutual")}), "mutual", Cmp::Gt, c.x("x4"));
    friends = join(same_area, mutual, {{"u1", "u1"}, {"u2", "u2"}});
  }
  auto visits = filter(group_agg(join(friends, rc, {{"u2", "user_id"}}), {"u1", "venue_id"}, {count_as("visits")}),
                       "visits", Cmp::Gt, c.x("x2"));
  if (v <= 2) return visits;

  auto subtypes = src(L, {"venue_id", "subtype"});
  auto fav = project(join(argmax_per_group(group_agg(rc, {"user_id", "venue_id"}, {count_as("fav_checkins")}),
                                           {"user_id"}, "fav_checkins"),
                          subtypes, {{"venue_id", "venue_id"}}),
                     {{"user_id", "u1"}, {"subtype", "fav_subtype"}});
  auto same_type = filter_columns(join(join(visits, subtypes, {{"venue_id", "venue_id"}}), fav, {{"u1", "u1"}}),
                                  "subtype", Cmp::Eq, "fav_subtype");
  if (v == 3) return same_type;

  PairGenSpec co;
  co.mode = PairMode::CoOccur;
  co.a = "user_id";
  co.b = "venue_id";
  co.out_a = "r1";
  co.out_b = "r2";
  co.out_count = "co_visitors";
  auto similar = filter(pair_gen(rc, co), "co_visitors", Cmp::Gt, c.x("x5"));
  return join(same_type, similar, {{"venue_id", "r1"}});
}

NodePtr analyst4(const Ctx& c) {
  const int v = c.version;
  const double res = c.named("grid_resolution");
  auto checkins = src(F, {"user_id", "venue_id", "lat", "lon", "comment_text"});
  auto beer = filter(group_agg(map_udf(checkins, classify("beer_word"), {"comment_text"}, {"beer_mentions"}),
                               {"user_id"},
                               {sum_of("beer_mentions", "beer_count"), avg_of("lat", "lat"), avg_of("lon", "lon")}),
                     "beer_count", Cmp::Gt, c.x("x1"));
  if (v == 1) return beer;
  if (v == 2) {
    return filter(group_agg(map_udf(beer, grid(res), {"lat", "lon"}, {"cell"}), {"cell"}, {count_as("n_users")}),
                  "n_users", Cmp::Gt, c.x("x2"));
  }

  auto sports = filter(group_udaf(src(T, {"user_id", "text"}), {"user_id"},
                                  classify_user("sports", c.named("sports_min_hits")), "text", "sports_fan"),
                       "sports_fan", Cmp::Eq, Value(1));
  auto tweet_beer =
      filter(group_agg(map_udf(src(T, {"user_id", "text"}), classify("beer"), {"text"}, {"tweet_beer"}),
                       {"user_id"}, {sum_of("tweet_beer", "beer_score")}),
             "beer_score", Cmp::Gt, c.x("x3"));
  auto users = join(join(beer, sports, {{"user_id", "user_id"}}), tweet_beer, {{"user_id", "user_id"}});
  auto user_cells = filter(group_agg(map_udf(users, grid(res), {"lat", "lon"}, {"cell"}), {"cell"},
                                     {count_as("n_users")}),
                           "n_users", Cmp::Gt, c.x("x4"));
  auto places = src(L, {"venue_id", "name", "venue_type", "lat", "lon"});
  auto bars = filter(places, "venue_type", Cmp::Eq, Value("sports bar"));
  auto bar_cells = filter(group_agg(map_udf(bars, grid(res), {"lat", "lon"}, {"cell"}), {"cell"},
                                    {count_as("n_bars")}),
                          "n_bars", Cmp::Lt, c.x("x5"));
  auto cells = join(user_cells, bar_cells, {{"cell", "cell"}});
  if (v == 3) return cells;

  auto visited = filter(join(project(checkins, {{"venue_id", "venue_id"}}), places, {{"venue_id", "venue_id"}}),
                        "venue_type", Cmp::Eq, Value("sports bar"));
  auto popular = filter(group_agg(visited, {"venue_id"},
                                  {count_as("bar_checkins"), avg_of("lat", "lat"), avg_of("lon", "lon")}),
                        "bar_checkins", Cmp::Gt, c.x("x6"));
  auto popular_cells =
      group_agg(map_udf(popular, grid(res), {"lat", "lon"}, {"cell"}), {"cell"}, {count_as("n_popular_bars")});
  return filter_ratio(join(cells, popular_cells, {{"cell", "cell"}}), "n_users", "n_popular_bars", Cmp::Gt,
                      c.x("x7"));
}

NodePtr analyst5(const Ctx& c) {
  const int v = c.version;
  auto rc = restaurant_checkins({"venue_id", "venue_type"});
  PairGenSpec co;
  co.mode = PairMode::CoOccur;
  co.a = "user_id";
  co.b = "venue_id";
  co.out_a = "r1";
  co.out_b = "r2";
  co.out_count = "co_visitors";
  auto similar = filter(pair_gen(rc, co), "co_visitors", Cmp::Gt, c.x("x1"));
  if (v == 1) return similar;

  auto friends = filter(friend_pairs(), "strength", Cmp::Gt, c.x("x2"));
  auto first = project(rc, {{"user_id", "u1"}, {"venue_id", "r1"}});
  auto second = project(rc, {{"user_id", "u2"}, {"venue_id", "r2"}});
  auto visits = filter_columns(join(join(friends, first, {{"u1", "u1"}}), second, {{"u2", "u2"}}), "r1", Cmp::Ne,
                               "r2");
  auto friend_similar = filter(group_agg(visits, {"r1", "r2"}, {count_as("friend_visits")}), "friend_visits",
                               Cmp::Gt, c.x("x3"));
  NodePtr pairs = join(similar, friend_similar, {{"r1", "r1"}, {"r2", "r2"}});
  if (v == 2) return pairs;

  auto menus = src(L, {"venue_id", "venue_type", "subtype", "zip", "menu_items"});
  auto m1 = project(menus, {{"venue_id", "r1"}, {"subtype", "subtype1"}, {"zip", "zip1"}, {"menu_items", "menu1"}});
  auto m2 = project(menus, {{"venue_id", "r2"}, {"subtype", "subtype2"}, {"zip", "zip2"}, {"menu_items", "menu2"}});
  NodePtr enriched = join(join(pairs, m1, {{"r1", "r1"}}), m2, {{"r2", "r2"}});
  enriched = filter_columns(enriched, "zip1", Cmp::Eq, "zip2");
  enriched = filter_columns(enriched, "subtype1", Cmp::Eq, "subtype2");
  auto menu_pairs = filter(map_udf(enriched, UdfSpec{UdfKind::MenuSimilarity, "", "", 0}, {"menu1", "menu2"},
                                   {"menu_similarity"}),
                           "menu_similarity", Cmp::Gt, c.x("x4"));
  if (v == 3) return menu_pairs;

  auto user_visits = group_agg(rc, {"user_id", "venue_id"}, {count_as("visits")});
  auto loyal = project(filter(user_visits, "visits", Cmp::Gt, c.x("x5")),
                       {{"user_id", "user_id"}, {"venue_id", "r1"}, {"visits", "r1_visits"}});
  auto rare = project(filter(user_visits, "visits", Cmp::Lt, c.x("x6")),
                      {{"user_id", "user_id"}, {"venue_id", "r2"}, {"visits", "r2_visits"}});
  return join(join(menu_pairs, loyal, {{"r1", "r1"}}), rare, {{"r2", "r2"}, {"user_id", "user_id"}});
}

NodePtr analyst6(const Ctx& c) {
  const int v = c.version;
  auto restaurants = filter(src(L, {"venue_id", "venue_type", "subtype", "zip"}), "venue_type", Cmp::Eq,
                            Value("restaurant"));
  auto counts = group_agg(src(F, {"venue_id"}), {"venue_id"}, {count_as("checkins")});
  auto rc = join(restaurants, counts, {{"venue_id", "venue_id"}});
  auto p1 = project(rc, {{"venue_id", "r1"}, {"subtype", "subtype"}, {"zip", "zip"}, {"checkins", "c1"}});
  auto p2 = project(rc, {{"venue_id", "r2"}, {"subtype", "subtype"}, {"zip", "zip"}, {"checkins", "c2"}});
  NodePtr pairs = filter_ratio(join(p1, p2, {{"zip", "zip"}, {"subtype", "subtype"}}), "c2", "c1", Cmp::Lt,
                               c.named("much_lower_ratio"));
  if (v == 1) return pairs;

  const int recent = static_cast<int>(c.named("recent_window_months"));
  auto visits = join(src(F, {"user_id", "venue_id", "timestamp"}), restaurants, {{"venue_id", "venue_id"}});
  TimeWindowSpec tw;
  tw.keys = {"venue_id"};
  tw.timestamp = "timestamp";
  tw.history_months = static_cast<int>(c.x("x1"));
  tw.recent_months = recent;
  auto declining = filter_ratio(time_window(visits, tw), "recent_count", "hist_avg", Cmp::Lt, c.x("x2"));
  NodePtr spine = join(pairs, declining, {{"r2", "venue_id"}});
  if (v == 2) return spine;

  TimeWindowSpec utw;
  utw.keys = {"user_id", "venue_id"};
  utw.timestamp = "timestamp";
  utw.history_months = static_cast<int>(c.x("x3"));
  utw.recent_months = recent;
  utw.out_recent = "user_recent";
  utw.out_hist = "user_hist_avg";
  auto lapsed = filter_ratio(time_window(visits, utw), "user_recent", "user_hist_avg", Cmp::Lt, c.x("x4"));
  spine = join(spine, lapsed, {{"r2", "venue_id"}});
  if (v == 3) return spine;

  auto by_zip = filter(group_agg(visits, {"user_id", "zip"}, {count_as("zip_visits")}), "zip_visits", Cmp::Gt,
                       c.x("x5"));
  return join(spine, by_zip, {{"user_id", "user_id"}, {"zip", "zip"}});
}

NodePtr analyst7(const Ctx& c) {
  const int v = c.version;
  auto scored = map_udf(filter(src(L, {"venue_id", "venue_type", "zip", "comments"}), "venue_type", Cmp::Eq,
                               Value("restaurant")),
                        UdfSpec{UdfKind::Sentiment, "sentiment", "", 0}, {"comments"}, {"sentiment"});
  auto good = project(filter(scored, "sentiment", Cmp::Gt, c.x("x1")),
                      {{"venue_id", "good_id"}, {"zip", "zip"}, {"sentiment", "good_sentiment"}});
  auto bad = project(filter(scored, "sentiment", Cmp::Lt, c.x("x2")),
                     {{"venue_id", "bad_id"}, {"zip", "zip"}, {"sentiment", "bad_sentiment"}});
  NodePtr spine = join(good, bad, {{"zip", "zip"}});
  if (v == 1) return spine;

  auto checkins = src(F, {"user_id", "venue_id", "comment_text"});
  auto counts = group_agg(checkins, {"venue_id"}, {count_as("checkins")});
  auto popular = project(filter(counts, "checkins", Cmp::Gt, c.x("x3")),
                         {{"venue_id", "good_id"}, {"checkins", "good_checkins"}});
  auto unpopular = project(filter(counts, "checkins", Cmp::Lt, c.x("x4")),
                           {{"venue_id", "bad_id"}, {"checkins", "bad_checkins"}});
  spine = join(join(spine, popular, {{"good_id", "good_id"}}), unpopular, {{"bad_id", "bad_id"}});
  if (v == 2) return spine;

  auto per_user = group_agg(checkins, {"user_id", "venue_id"}, {count_as("visits")});
  auto singles = group_agg(filter(per_user, "visits", Cmp::Eq, Value(1)), {"venue_id"}, {count_as("singles")});
  auto multis = group_agg(filter(per_user, "visits", Cmp::Gt, c.x("x5")), {"venue_id"}, {count_as("multis")});
  auto repeat = join(singles, multis, {{"venue_id", "venue_id"}});
  auto good_repeat = project(filter_ratio(repeat, "singles", "multis", Cmp::Lt, c.x("x6")),
                             {{"venue_id", "good_id"}, {"singles", "good_singles"}, {"multis", "good_multis"}});
  auto bad_repeat = project(filter_ratio(repeat, "singles", "multis", Cmp::Gt, c.x("x7")),
                            {{"venue_id", "bad_id"}, {"singles", "bad_singles"}, {"multis", "bad_multis"}});
  spine = join(join(spine, good_repeat, {{"good_id", "good_id"}}), bad_repeat, {{"bad_id", "bad_id"}});
  if (v == 3) return spine;

  auto entities = map_udf(checkins, UdfSpec{UdfKind::EntitySentiment, "entities", "sentiment", c.named("entity_window")},
                          {"comment_text"}, {"entity", "entity_score"});
  auto liked = project(filter(group_agg(entities, {"venue_id", "entity"}, {sum_of("entity_score", "entity_sentiment")}),
                              "entity_sentiment", Cmp::Gt, c.x("x8")),
                       {{"venue_id", "good_id"}, {"entity", "entity"}, {"entity_sentiment", "entity_sentiment"}});
  return join(spine, liked, {{"good_id", "good_id"}});
}

NodePtr analyst8(const Ctx& c) {
  const int v = c.version;
  const double res = c.named("grid_resolution");
  auto luxury = filter(group_agg(filter(map_udf(src(T, {"user_id", "text"}), classify("luxury"), {"text"},
                                                {"luxury_score"}),
                                        "luxury_score", Cmp::Gt, Value(0.0)),
                                 {"user_id"}, {count_as("luxury_tweets")}),
                       "luxury_tweets", Cmp::Gt, c.x("x1"));
  if (v == 1) return luxury;

  auto places = src(L, {"venue_id", "venue_type", "subtype", "lat", "lon"});
  auto rc = filter(join(src(F, {"user_id", "venue_id"}), places, {{"venue_id", "venue_id"}}), "venue_type", Cmp::Eq,
                   Value("restaurant"));
  auto frequent = filter(group_agg(rc, {"user_id", "venue_id"}, {count_as("user_checkins")}), "user_checkins",
                         Cmp::Gt, c.x("x2"));
  auto patrons = join(frequent, luxury, {{"user_id", "user_id"}});
  auto favoured = filter(group_agg(patrons, {"venue_id"}, {sum_of("user_checkins", "total_checkins")}),
                         "total_checkins", Cmp::Gt, c.x("x3"));
  if (v == 2) return favoured;

  auto located = map_udf(join(favoured, places, {{"venue_id", "venue_id"}}), grid(res), {"lat", "lon"}, {"cell"});
  auto dense = filter(group_agg(located, {"cell"}, {count_as("n_restaurants")}), "n_restaurants", Cmp::Gt,
                      c.x("x4"));
  auto cell_hist = group_agg(located, {"cell"}, {hist_of("subtype", "cell_histogram")});
  auto cells = join(dense, cell_hist, {{"cell", "cell"}});
  if (v == 3) return cells;

  auto home = map_udf(group_agg(src(F, {"user_id", "lat", "lon"}), {"user_id"},
                                {avg_of("lat", "lat"), avg_of("lon", "lon")}),
                      grid(res), {"lat", "lon"}, {"user_cell"});
  auto user_hist = group_agg(join(rc, luxury, {{"user_id", "user_id"}}), {"user_id"},
                             {hist_of("subtype", "user_histogram")});
  auto users = join(project(home, {{"user_id", "user_id"}, {"user_cell", "user_cell"}}), user_hist,
                    {{"user_id", "user_id"}});
  auto pairs = map_udf(join(users, cells, {}), UdfSpec{UdfKind::GridDistance, "", "", res}, {"user_cell", "cell"},
                       {"distance"});
  auto far = filter(pairs, "distance", Cmp::Ge, c.named("sufficiently_far_cells"));
  auto matched = filter(map_udf(far, UdfSpec{UdfKind::HistogramOverlap, "", "", 0},
                                {"user_histogram", "cell_histogram"}, {"overlap"}),
                        "overlap", Cmp::Ge, c.named("significant_overlap_fraction"));
  auto hotels = project(map_udf(filter(filter(src(L, {"venue_id", "venue_type", "lat", "lon", "rating"}),
                                              "venue_type", Cmp::Eq, Value("hotel")),
                                       "rating", Cmp::Gt, c.x("x5")),
                                grid(res), {"lat", "lon"}, {"cell"}),
                        {{"venue_id", "hotel_id"}, {"cell", "cell"}, {"rating", "hotel_rating"}});
  return join(matched, hotels, {{"cell", "cell"}});
}

}  // namespace

QueryPlan build_query(int analyst, int version, const ParamSet& params) {
  if (analyst < 1 || analyst > kAnalysts) {
    throw ValidationError("analyst must be in [1, " + std::to_string(kAnalysts) + "], got " + std::to_string(analyst));
  }
  if (version < 1 || version > kVersions) {
    throw ValidationError("version must be in [1, " + std::to_string(kVersions) + "], got " + std::to_string(version));
  }
  const Ctx c{analyst, version, params};
  NodePtr sink;
  switch (analyst) {
    case 1: sink = analyst1(c); break;
    case 2: sink = analyst2(c); break;
    case 3: sink = analyst3(c); break;
    case 4: sink = analyst4(c); break;
    case 5: sink = analyst5(c); break;
    case 6: sink = analyst6(c); break;
    case 7: sink = analyst7(c); break;
    default: sink = analyst8(c); break;
  }
  return QueryPlan{sink, "a" + std::to_string(analyst) + ".v" + std::to_string(version)};
}

// ---------------------------------------------------------------------------
// Revision classification

std::string RevisionDelta::to_string() const {
  std::string out = "{";
  auto add = [&](bool on, char c) {
    if (!on) return;
    if (out.size() > 1) out += ",";
    out += c;
  };
  add(p, 'P');
  add(l, 'L');
  add(u, 'U');
  add(g, 'G');
  return out + "}";
}

RevisionDelta RevisionDelta::parse(const std::string& text) {
  if (text.size() < 2 || text.front() != '{' || text.back() != '}') {
    throw ValidationError("bad revision delta '" + text + "'");
  }
  RevisionDelta d;
  for (char c : std::string_view(text).substr(1, text.size() - 2)) {
    switch (c) {
      case 'P': d.p = true; break;
      case 'L': d.l = true; break;
      case 'U': d.u = true; break;
      case 'G': d.g = true; break;
      case ',': case ' ': break;
      default: throw ValidationError("bad revision delta '" + text + "'");
    }
  }
  return d;
}

namespace {

struct Canonical {
  std::unordered_map<const Node*, std::string> text;

  const std::string& of(const NodePtr& n) {
    auto it = text.find(n.get());
    if (it == text.end()) it = text.emplace(n.get(), canonicalize(n).text).first;
    return it->second;
  }
};

std::map<std::string, std::set<double>> filter_constants(const QueryPlan& plan, Canonical& canon) {
  std::map<std::string, std::set<double>> out;
  for (const auto& n : plan.nodes()) {
    if (n->kind() != NodeKind::Filter) continue;
    const auto& f = n->as<FilterSpec>();
    if (f.lifted()) out[canon.of(n)].insert(f.constant.to_double());
  }
  return out;
}

std::set<std::string> scan_shapes(const QueryPlan& plan) {
  std::set<std::string> out;
  for (const auto& n : plan.nodes()) {
    if (n->kind() != NodeKind::Scan) continue;
    const auto& s = n->as<ScanSpec>();
    std::vector<std::string> cols;
    for (const auto& c : s.columns) cols.push_back(c.name);
    std::sort(cols.begin(), cols.end());
    std::string key = s.source + ":";
    for (const auto& c : cols) key += c + ",";
    out.insert(key);
  }
  return out;
}

std::multiset<std::string> udf_ids(const QueryPlan& plan, Canonical& canon) {
  std::map<std::string, std::string> by_node;
  for (const auto& n : plan.nodes()) {
    const UdfSpec* u = nullptr;
    if (n->kind() == NodeKind::MapUdf) u = &n->as<MapUdfSpec>().udf;
    if (n->kind() == NodeKind::GroupUdaf) u = &n->as<GroupUdafSpec>().udf;
    if (u && !u->builtin()) by_node.emplace(canon.of(n), u->id());
  }
  std::multiset<std::string> out;
  for (const auto& [k, id] : by_node) out.insert(id);
  return out;
}

bool is_lookup(const NodePtr& n) {
  if (n->kind() == NodeKind::Scan) return true;
  return n->kind() == NodeKind::Project && n->child()->kind() == NodeKind::Scan;
}

std::vector<std::string> sub_goals_impl(const QueryPlan& plan, Canonical& canon) {
  NodePtr n = plan.sink;
  while (n->kind() != NodeKind::Join && n->children().size() == 1) n = n->child();
  std::set<std::string> goals;
  if (n->kind() == NodeKind::Join) {
    std::vector<NodePtr> stack{n};
    while (!stack.empty()) {
      NodePtr j = stack.back();
      stack.pop_back();
      for (const auto& in : j->children()) {
        if (in->kind() == NodeKind::Join) {
          stack.push_back(in);
        } else if (!is_lookup(in)) {
          goals.insert(canon.of(in));
        }
      }
    }
  }
  if (goals.empty()) goals.insert(canon.of(plan.sink));
  return {goals.begin(), goals.end()};
}

}  // namespace

std::vector<std::string> sub_goals(const QueryPlan& plan) {
  Canonical canon;
  return sub_goals_impl(plan, canon);
}

RevisionDelta classify_delta(const QueryPlan& prev, const QueryPlan& next) {
  Canonical canon;
  RevisionDelta d;
  const auto fa = filter_constants(prev, canon);
  const auto fb = filter_constants(next, canon);
  for (const auto& [sig, constants] : fa) {
    auto it = fb.find(sig);
    if (it != fb.end() && it->second != constants) d.p = true;
  }
  d.l = scan_shapes(prev) != scan_shapes(next);
  d.u = udf_ids(prev, canon) != udf_ids(next, canon);
  d.g = sub_goals_impl(prev, canon) != sub_goals_impl(next, canon);
  return d;
}

const std::array<std::array<RevisionDelta, 3>, kAnalysts>& expected_deltas() {
  static const auto table = [] {
    const char* rows[kAnalysts][3] = {
        {"{P,L,G}", "{P}", "{P,G}"},   {"{L,U,G}", "{P,G}", "{P,G}"}, {"{P,G}", "{P,L,G}", "{G}"},
        {"{U,G}", "{L,U,G}", "{U,G}"}, {"{L,G}", "{L,U}", "{P,G}"},   {"{L,G}", "{P,G}", "{P,G}"},
        {"{L,G}", "{G}", "{U,G}"},     {"{L,G}", "{U,G}", "{P,L,U,G}"},
    };
    std::array<std::array<RevisionDelta, 3>, kAnalysts> out{};
    for (int a = 0; a < kAnalysts; ++a) {
      for (int t = 0; t < 3; ++t) out[a][t] = RevisionDelta::parse(rows[a][t]);
    }
    return out;
  }();
  return table;
}

}  // namespace evobench::workload
