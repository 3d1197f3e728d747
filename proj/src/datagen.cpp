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

#include "evobench/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>

#include "json.hpp"

#include "evobench/error.hpp"

namespace evobench::datagen {

using nlohmann::ordered_json;

const std::vector<ColumnDef>& twitter_schema() {
  static const std::vector<ColumnDef> schema = {
      {"tweet_id", ColumnType::Int},       {"timestamp", ColumnType::Int},
      {"user_id", ColumnType::Int},        {"dest_user_id", ColumnType::Int},
      {"text", ColumnType::Text},          {"lat", ColumnType::Real},
      {"lon", ColumnType::Real},           {"lang", ColumnType::Text},
      {"retweet_count", ColumnType::Int},  {"hashtag_list", ColumnType::Tokens},
      {"client", ColumnType::Text},        {"follower_count", ColumnType::Int},
  };
  return schema;
}

const std::vector<ColumnDef>& foursquare_schema() {
  static const std::vector<ColumnDef> schema = {
      {"checkin_id", ColumnType::Int}, {"timestamp", ColumnType::Int},
      {"user_id", ColumnType::Int},    {"venue_id", ColumnType::Int},
      {"venue_name", ColumnType::Text}, {"lat", ColumnType::Real},
      {"lon", ColumnType::Real},       {"comment_text", ColumnType::Text},
  };
  return schema;
}

const std::vector<ColumnDef>& landmarks_schema() {
  static const std::vector<ColumnDef> schema = {
      {"venue_id", ColumnType::Int},      {"name", ColumnType::Text},
      {"venue_type", ColumnType::Text},   {"subtype", ColumnType::Text},
      {"lat", ColumnType::Real},          {"lon", ColumnType::Real},
      {"zip", ColumnType::Text},          {"rating", ColumnType::Real},
      {"menu_items", ColumnType::Tokens}, {"comments", ColumnType::Tokens},
  };
  return schema;
}

const std::vector<ColumnDef>& schema_for(const std::string& source) {
  if (source == kTwitter) return twitter_schema();
  if (source == kFoursquare) return foursquare_schema();
  if (source == kLandmarks) return landmarks_schema();
  throw ValidationError("unknown source '" + source + "'");
}

std::string file_name_for(const std::string& source) {
  schema_for(source);
  return source + ".jsonl";
}

const std::vector<std::string>& venue_types() {
  static const std::vector<std::string> types = {"restaurant", "wine-bar", "sports bar", "hotel",
                                                 "theater",    "bar",      "cafe",       "other"};
  return types;
}

const std::vector<std::string>& restaurant_subtypes() {
  static const std::vector<std::string> subtypes = {"italian", "mexican", "thai",     "sushi",
                                                    "french",  "american", "indian", "chinese"};
  return subtypes;
}

std::filesystem::path GeneratedFiles::for_source(const std::string& source) const {
  if (source == kTwitter) return twitter;
  if (source == kFoursquare) return foursquare;
  if (source == kLandmarks) return landmarks;
  throw ValidationError("unknown source '" + source + "'");
}

GenConfig default_config() { return GenConfig{}; }

void GenConfig::validate() const {
  if (n_users == 0 && (n_tweets > 0 || n_checkins > 0)) {
    throw ValidationError("n_users must be >= 1 when tweets or checkins are generated");
  }
  if (n_venues == 0 && n_checkins > 0) {
    throw ValidationError("n_venues must be >= 1 when checkins are generated");
  }
  if (start_time > end_time) throw ValidationError("start_time must not exceed end_time");
  const auto& r = region;
  if (!(r.lat_min >= -90 && r.lat_max <= 90 && r.lat_min <= r.lat_max && r.lon_min >= -180 &&
        r.lon_max <= 180 && r.lon_min <= r.lon_max)) {
    throw ValidationError("region bounds outside [-90,90]x[-180,180]");
  }
  if (!(decay_fraction >= 0 && decay_fraction <= 1)) {
    throw ValidationError("decay_fraction must be in [0,1]");
  }
}

namespace {

// std distributions are not specified bit-for-bit across standard libraries, so
// every draw is derived from the raw mt19937_64 stream, which is.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed * 0x9e3779b97f4a7c15ULL ^ stream) {}

  std::uint64_t next() { return engine_(); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % n;
  }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  bool chance(double p) { return uniform() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

 private:
  std::mt19937_64 engine_;
};

class WeightedPicker {
 public:
  explicit WeightedPicker(const std::vector<double>& weights) {
    double acc = 0;
    cumulative_.reserve(weights.size());
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
  }

  std::size_t pick(Rng& rng) const {
    const double x = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
    if (it == cumulative_.end()) --it;
    return static_cast<std::size_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

double round_to(double v, double step) { return std::round(v / step) * step; }

const std::vector<std::string> kFiller = {
    "the", "a", "today", "just", "really", "with", "friends", "city", "weekend", "morning",
    "night", "downtown", "walk", "coffee", "work", "home", "new", "time", "lol", "then"};

const std::vector<std::string> kWine = {"cabernet", "vineyard", "merlot", "chardonnay", "pinot",
                                        "sommelier", "winery", "riesling"};
const std::vector<std::string> kFood = {"delicious", "tasty", "brunch", "dinner", "foodie",
                                        "yummy", "pasta", "tacos", "ramen"};
const std::vector<std::string> kBeer = {"beer", "ipa", "lager", "stout", "brewery", "pint", "ale"};
const std::vector<std::string> kLuxury = {"rolex", "yacht", "caviar", "champagne", "gucci",
                                          "penthouse", "ferrari"};
const std::vector<std::string> kSports = {"game",  "playoffs", "touchdown", "jersey",
                                          "stadium", "niners", "giants", "warriors"};
const std::vector<std::string> kAffluence = {"investor", "yacht", "penthouse", "portfolio",
                                             "golf", "firstclass", "vineyard"};
const std::vector<std::string> kPositive = {"good", "great", "amazing", "love", "friendly", "fresh"};
const std::vector<std::string> kNegative = {"bad", "awful", "terrible", "slow", "rude", "stale"};
const std::vector<std::string> kEntities = {"service", "food", "staff", "menu",
                                            "price", "ambiance", "dessert", "wine"};
const std::vector<std::string> kHashtags = {"#sf", "#food", "#wine", "#nba", "#travel", "#beer"};
const std::vector<std::string> kLangs = {"en", "en", "en", "en", "en", "en", "en", "en", "es", "fr"};
const std::vector<std::string> kClients = {"web", "iphone", "android"};
const std::vector<std::string> kNameWords = {"golden", "blue", "corner", "harbor", "union",
                                             "mission", "north", "sunset", "little", "royal"};

const std::vector<std::string>& menu_vocab(const std::string& subtype) {
  static const std::map<std::string, std::vector<std::string>> vocab = {
      {"italian", {"pizza", "lasagna", "risotto", "gnocchi", "tiramisu", "bruschetta", "espresso",
                   "carbonara", "salad", "gelato"}},
      {"mexican", {"tacos", "burrito", "quesadilla", "guacamole", "churros", "enchilada", "horchata",
                   "nachos", "salad", "flan"}},
      {"thai", {"padthai", "curry", "satay", "tomyum", "springroll", "mango", "jasmine", "larb",
                "salad", "noodles"}},
      {"sushi", {"nigiri", "sashimi", "maki", "miso", "edamame", "tempura", "udon", "sake", "salad",
                 "mochi"}},
      {"french", {"croissant", "baguette", "escargot", "ratatouille", "souffle", "crepe", "brie",
                  "macaron", "salad", "bouillabaisse"}},
      {"american", {"burger", "fries", "steak", "milkshake", "wings", "ribs", "hotdog", "cornbread",
                    "salad", "pie"}},
      {"indian", {"naan", "tikka", "biryani", "samosa", "dal", "paneer", "lassi", "korma", "salad",
                  "chutney"}},
      {"chinese", {"dumplings", "chowmein", "wonton", "kungpao", "dimsum", "friedrice", "bao",
                   "mapo", "salad", "tea"}},
      {"bar", {"ipa", "lager", "stout", "nachos", "wings", "fries"}},
      {"wine", {"cabernet", "merlot", "chardonnay", "cheese", "charcuterie", "olives"}},
  };
  return vocab.at(subtype);
}

struct User {
  double home_lat{0};
  double home_lon{0};
  std::size_t home_zip{0};
  double activity{1};
  bool wine{false}, food{false}, beer{false}, sports{false}, luxury{false}, affluent{false};
  std::vector<std::uint64_t> neighbors;  // indices
  std::vector<std::size_t> favorites;    // venue indices
};

struct Venue {
  std::string type;
  std::string subtype;
  std::string name;
  std::size_t zip{0};
  double lat{0};
  double lon{0};
  double quality{0};
  double popularity{1};
  bool decays{false};
};

struct World {
  std::vector<User> users;
  std::vector<Venue> venues;
  std::vector<std::pair<double, double>> zip_centers;
  WeightedPicker user_picker{{1.0}};
};

std::string zip_code(std::size_t zip) { return std::to_string(94100 + zip); }

World build_world(const GenConfig& cfg) {
  World w;
  Rng rng(cfg.seed, 1);
  const auto& r = cfg.region;
  const std::size_t n_zips = std::max<std::size_t>(1, static_cast<std::size_t>(cfg.n_venues / 50));
  const double lat_pad = (r.lat_max - r.lat_min) * 0.1;
  const double lon_pad = (r.lon_max - r.lon_min) * 0.1;
  for (std::size_t z = 0; z < n_zips; ++z) {
    w.zip_centers.emplace_back(rng.uniform(r.lat_min + lat_pad, r.lat_max - lat_pad),
                               rng.uniform(r.lon_min + lon_pad, r.lon_max - lon_pad));
  }
  auto near = [&](std::size_t zip, double spread, double& lat, double& lon) {
    lat = std::clamp(w.zip_centers[zip].first + rng.uniform(-spread, spread), r.lat_min, r.lat_max);
    lon = std::clamp(w.zip_centers[zip].second + rng.uniform(-spread, spread), r.lon_min, r.lon_max);
  };

  // venues: the first eight cover every type so any generation with >= 8 venues has them all
  static const std::vector<double> type_weights = {0.45, 0.08, 0.09, 0.08, 0.05, 0.10, 0.10, 0.05};
  WeightedPicker type_picker(type_weights);
  const auto& types = venue_types();
  w.venues.resize(cfg.n_venues);
  for (std::size_t i = 0; i < cfg.n_venues; ++i) {
    Venue& v = w.venues[i];
    v.type = i < types.size() ? types[i] : types[type_picker.pick(rng)];
    v.subtype = v.type == "restaurant" ? rng.pick(restaurant_subtypes()) : std::string("none");
    v.zip = i < n_zips ? i : static_cast<std::size_t>(rng.below(n_zips));
    near(v.zip, 0.04, v.lat, v.lon);
    v.quality = rng.uniform(-1.0, 1.0);
    v.popularity = 1.0 / std::pow(static_cast<double>(rng.below(50) + 1), 0.9);
    v.decays = v.type == "restaurant" && rng.chance(cfg.decay_fraction);
    v.name = rng.pick(kNameWords) + " " + (v.type == "restaurant" ? v.subtype : v.type) + " " +
             std::to_string(i + 1);
  }

  // users and a preferential-attachment social graph with a same-zip bias
  w.users.resize(cfg.n_users);
  std::vector<double> activity;
  std::vector<std::vector<std::size_t>> by_zip(n_zips);
  for (std::size_t i = 0; i < cfg.n_users; ++i) {
    User& u = w.users[i];
    u.home_zip = static_cast<std::size_t>(rng.below(n_zips));
    near(u.home_zip, 0.02, u.home_lat, u.home_lon);
    const double a = rng.uniform();
    u.activity = 1.0 + 9.0 * a * a * a;
    u.wine = rng.chance(0.35);
    u.food = rng.chance(0.45);
    u.beer = rng.chance(0.4);
    u.sports = rng.chance(0.4);
    u.luxury = rng.chance(0.3);
    u.affluent = rng.chance(0.35);
    activity.push_back(u.activity);
    by_zip[u.home_zip].push_back(i);
  }
  std::vector<double> degree(cfg.n_users, 1.0);
  auto connect = [&](std::size_t a, std::size_t b) {
    if (a == b) return;
    auto& na = w.users[a].neighbors;
    if (std::find(na.begin(), na.end(), b) != na.end()) return;
    na.push_back(b);
    w.users[b].neighbors.push_back(a);
    degree[a] += 1;
    degree[b] += 1;
  };
  for (std::size_t i = 1; i < cfg.n_users; ++i) {
    const std::size_t m = std::min<std::size_t>(3, i);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& zip_peers = by_zip[w.users[i].home_zip];
      if (rng.chance(0.5) && zip_peers.size() > 1) {
        connect(i, zip_peers[rng.below(zip_peers.size())]);
      } else {
        std::vector<double> prefix(degree.begin(), degree.begin() + static_cast<std::ptrdiff_t>(i));
        connect(i, WeightedPicker(prefix).pick(rng));
      }
    }
  }
  if (!activity.empty()) w.user_picker = WeightedPicker(activity);

  // favourite venues, biased to the home zip and to matching interests
  if (!w.venues.empty()) {
    for (auto& u : w.users) {
      std::vector<double> weights(w.venues.size());
      for (std::size_t j = 0; j < w.venues.size(); ++j) {
        const Venue& v = w.venues[j];
        double wt = v.popularity * (v.zip == u.home_zip ? 6.0 : 1.0);
        if (v.type == "restaurant") wt *= u.food ? 3.0 : 1.5;
        if (v.type == "wine-bar" && u.wine) wt *= 4.0;
        if ((v.type == "sports bar" || v.type == "bar") && (u.beer || u.sports)) wt *= 3.0;
        if (v.type == "hotel" && u.luxury) wt *= 2.0;
        weights[j] = wt;
      }
      WeightedPicker picker(weights);
      const std::size_t n_fav = 6 + static_cast<std::size_t>(rng.below(10));
      for (std::size_t k = 0; k < n_fav; ++k) u.favorites.push_back(picker.pick(rng));
    }
  }
  return w;
}

void add_tokens(Rng& rng, std::vector<std::string>& out, const std::vector<std::string>& vocab,
                double p) {
  if (rng.chance(p)) out.push_back(rng.pick(vocab));
}

std::string join(const std::vector<std::string>& tokens) {
  std::string s;
  for (const auto& t : tokens) {
    if (!s.empty()) s.push_back(' ');
    s += t;
  }
  return s;
}

std::string tweet_text(Rng& rng, const User& u) {
  std::vector<std::string> tokens;
  const std::size_t n_filler = 3 + static_cast<std::size_t>(rng.below(5));
  for (std::size_t i = 0; i < n_filler; ++i) tokens.push_back(rng.pick(kFiller));
  add_tokens(rng, tokens, kWine, u.wine ? 0.45 : 0.03);
  add_tokens(rng, tokens, kFood, u.food ? 0.45 : 0.05);
  add_tokens(rng, tokens, kBeer, u.beer ? 0.4 : 0.03);
  add_tokens(rng, tokens, kSports, u.sports ? 0.45 : 0.04);
  add_tokens(rng, tokens, kLuxury, u.luxury ? 0.35 : 0.02);
  add_tokens(rng, tokens, kAffluence, u.affluent ? 0.35 : 0.02);
  add_tokens(rng, tokens, kPositive, 0.2);
  add_tokens(rng, tokens, kNegative, 0.08);
  // shuffle deterministically
  for (std::size_t i = tokens.size(); i > 1; --i) std::swap(tokens[i - 1], tokens[rng.below(i)]);
  return join(tokens);
}

std::vector<std::string> opinion_tokens(Rng& rng, double quality) {
  std::vector<std::string> tokens;
  tokens.push_back(rng.pick(kEntities));
  const double p_pos = 0.5 + 0.45 * quality;
  tokens.push_back(rng.chance(p_pos) ? rng.pick(kPositive) : rng.pick(kNegative));
  if (rng.chance(0.5)) tokens.push_back(rng.pick(kFiller));
  return tokens;
}

std::string opinion(Rng& rng, double quality) { return join(opinion_tokens(rng, quality)); }

void write_line(std::ostream& out, const ordered_json& record) {
  out << record.dump() << '\n';
  if (!out) throw IoError("write to output sink failed");
}

std::int64_t uniform_time(Rng& rng, const GenConfig& cfg) {
  return rng.between(cfg.start_time, cfg.end_time);
}

}  // namespace

std::uint64_t gen_twitter(const GenConfig& cfg, std::ostream& out) {
  cfg.validate();
  if (cfg.n_tweets == 0) return 0;
  const World w = build_world(cfg);
  Rng rng(cfg.seed, 2);
  for (std::uint64_t i = 0; i < cfg.n_tweets; ++i) {
    const std::size_t ui = w.user_picker.pick(rng);
    const User& u = w.users[ui];
    ordered_json rec;
    rec["tweet_id"] = static_cast<std::int64_t>(i + 1);
    rec["timestamp"] = uniform_time(rng, cfg);
    rec["user_id"] = static_cast<std::int64_t>(ui + 1);
    if (!u.neighbors.empty() && rng.chance(0.45)) {
      // earlier neighbours are stronger ties
      std::vector<double> ties;
      for (std::size_t k = 0; k < u.neighbors.size(); ++k) ties.push_back(1.0 / static_cast<double>(k + 1));
      rec["dest_user_id"] = static_cast<std::int64_t>(u.neighbors[WeightedPicker(ties).pick(rng)] + 1);
    } else {
      rec["dest_user_id"] = nullptr;
    }
    rec["text"] = tweet_text(rng, u);
    if (rng.chance(0.6)) {
      rec["lat"] = round_to(u.home_lat + rng.uniform(-0.01, 0.01), 1e-6);
      rec["lon"] = round_to(u.home_lon + rng.uniform(-0.01, 0.01), 1e-6);
    } else {
      rec["lat"] = nullptr;
      rec["lon"] = nullptr;
    }
    rec["lang"] = rng.pick(kLangs);
    const double rt = rng.uniform();
    rec["retweet_count"] = static_cast<std::int64_t>(std::floor(40.0 * rt * rt * rt));
    ordered_json tags = ordered_json::array();
    const std::uint64_t n_tags = rng.below(3);
    for (std::uint64_t k = 0; k < n_tags; ++k) tags.push_back(rng.pick(kHashtags));
    rec["hashtag_list"] = tags;
    rec["client"] = rng.pick(kClients);
    rec["follower_count"] = static_cast<std::int64_t>(u.neighbors.size() * 37 + (ui * 7919) % 101);
    write_line(out, rec);
  }
  return cfg.n_tweets;
}

std::uint64_t gen_foursquare(const GenConfig& cfg, std::ostream& out) {
  cfg.validate();
  if (cfg.n_checkins == 0) return 0;
  const World w = build_world(cfg);
  Rng rng(cfg.seed, 3);
  const std::int64_t decay_start = std::max<std::int64_t>(cfg.start_time, cfg.end_time - 60LL * 86400);
  for (std::uint64_t i = 0; i < cfg.n_checkins; ++i) {
    const std::size_t ui = w.user_picker.pick(rng);
    const User& u = w.users[ui];
    std::size_t vi = 0;
    if (!u.favorites.empty() && rng.chance(0.8)) {
      std::vector<double> pref;
      for (std::size_t k = 0; k < u.favorites.size(); ++k) pref.push_back(1.0 / std::sqrt(static_cast<double>(k + 1)));
      vi = u.favorites[WeightedPicker(pref).pick(rng)];
    } else {
      vi = static_cast<std::size_t>(rng.below(w.venues.size()));
    }
    const Venue& v = w.venues[vi];
    std::int64_t ts = uniform_time(rng, cfg);
    if (v.decays && ts >= decay_start && decay_start > cfg.start_time && rng.chance(0.9)) {
      ts = rng.between(cfg.start_time, decay_start - 1);
    }
    std::vector<std::string> tokens;
    const std::size_t n_filler = 1 + static_cast<std::size_t>(rng.below(3));
    for (std::size_t k = 0; k < n_filler; ++k) tokens.push_back(rng.pick(kFiller));
    if (rng.chance(u.beer ? 0.55 : 0.05)) tokens.push_back("beer");
    add_tokens(rng, tokens, kFood, u.food ? 0.4 : 0.1);
    if (rng.chance(0.7)) {
      for (auto& t : opinion_tokens(rng, v.quality)) tokens.push_back(std::move(t));
    }
    ordered_json rec;
    rec["checkin_id"] = static_cast<std::int64_t>(i + 1);
    rec["timestamp"] = ts;
    rec["user_id"] = static_cast<std::int64_t>(ui + 1);
    rec["venue_id"] = static_cast<std::int64_t>(vi + 1);
    rec["venue_name"] = v.name;
    rec["lat"] = round_to(v.lat + rng.uniform(-0.0005, 0.0005), 1e-6);
    rec["lon"] = round_to(v.lon + rng.uniform(-0.0005, 0.0005), 1e-6);
    rec["comment_text"] = join(tokens);
    write_line(out, rec);
  }
  return cfg.n_checkins;
}

std::uint64_t gen_landmarks(const GenConfig& cfg, std::ostream& out) {
  cfg.validate();
  if (cfg.n_venues == 0) return 0;
  const World w = build_world(cfg);
  Rng rng(cfg.seed, 4);
  for (std::size_t i = 0; i < w.venues.size(); ++i) {
    const Venue& v = w.venues[i];
    ordered_json rec;
    rec["venue_id"] = static_cast<std::int64_t>(i + 1);
    rec["name"] = v.name;
    rec["venue_type"] = v.type;
    rec["subtype"] = v.subtype;
    rec["lat"] = round_to(v.lat, 1e-6);
    rec["lon"] = round_to(v.lon, 1e-6);
    rec["zip"] = zip_code(v.zip);
    double rating = 3.0 + 1.6 * v.quality + rng.uniform(-0.5, 0.5);
    if (v.type == "hotel" && v.quality > 0) rating += 0.8;
    rec["rating"] = round_to(std::clamp(rating, 0.0, 5.0), 0.1);
    ordered_json menu = ordered_json::array();
    std::vector<std::string> vocab;
    if (v.type == "restaurant") {
      vocab = menu_vocab(v.subtype);
    } else if (v.type == "sports bar" || v.type == "bar") {
      vocab = menu_vocab("bar");
    } else if (v.type == "wine-bar") {
      vocab = menu_vocab("wine");
    }
    if (!vocab.empty()) {
      const std::size_t n_items = std::min<std::size_t>(vocab.size(), 4 + rng.below(5));
      for (std::size_t k = vocab.size(); k > 1; --k) std::swap(vocab[k - 1], vocab[rng.below(k)]);
      std::vector<std::string> items(vocab.begin(), vocab.begin() + static_cast<std::ptrdiff_t>(n_items));
      std::sort(items.begin(), items.end());
      for (const auto& it : items) menu.push_back(it);
    }
    rec["menu_items"] = menu;
    ordered_json comments = ordered_json::array();
    const std::uint64_t n_comments = 2 + rng.below(4);
    for (std::uint64_t k = 0; k < n_comments; ++k) comments.push_back(opinion(rng, v.quality));
    rec["comments"] = comments;
    write_line(out, rec);
  }
  return w.venues.size();
}

GeneratedFiles generate_all(const GenConfig& cfg, const std::filesystem::path& dir) {
  cfg.validate();
  std::filesystem::create_directories(dir);
  GeneratedFiles files{dir / file_name_for(kTwitter), dir / file_name_for(kFoursquare),
                       dir / file_name_for(kLandmarks)};
  auto run = [](const std::filesystem::path& path, auto&& gen) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    gen(out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  };
  run(files.twitter, [&](std::ostream& o) { gen_twitter(cfg, o); });
  run(files.foursquare, [&](std::ostream& o) { gen_foursquare(cfg, o); });
  run(files.landmarks, [&](std::ostream& o) { gen_landmarks(cfg, o); });
  return files;
}

}  // namespace evobench::datagen
