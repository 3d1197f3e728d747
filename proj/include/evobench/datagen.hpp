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
#include <iosfwd>
#include <string>
#include <vector>

#include "evobench/value.hpp"

namespace evobench::datagen {

struct RegionBounds {
  double lat_min{37.2};
  double lat_max{38.2};
  double lon_min{-122.8};
  double lon_max{-121.8};
};

struct GenConfig {
  std::uint64_t seed{42};
  std::uint64_t n_users{200};
  std::uint64_t n_venues{500};
  std::uint64_t n_tweets{10000};
  std::uint64_t n_checkins{5000};
  std::int64_t start_time{1325376000};  // 2012-01-01T00:00:00Z
  std::int64_t end_time{1356998400};    // 2013-01-01T00:00:00Z
  RegionBounds region{};
  /// Fraction of venues whose checkin rate drops over the last two months.
  double decay_fraction{0.15};

  /// Throws ValidationError when the invariants do not hold.
  void validate() const;
};

/// The shipped default generation (seed 42; 10k tweets, 5k checkins, 500 venues, 200 users).
GenConfig default_config();

inline constexpr const char* kTwitter = "twitter";
inline constexpr const char* kFoursquare = "foursquare";
inline constexpr const char* kLandmarks = "landmarks";

/// Declared columns of each log in file order.
const std::vector<ColumnDef>& twitter_schema();
const std::vector<ColumnDef>& foursquare_schema();
const std::vector<ColumnDef>& landmarks_schema();
/// Schema by source name; throws ValidationError for an unknown source.
const std::vector<ColumnDef>& schema_for(const std::string& source);
std::string file_name_for(const std::string& source);

/// Closed set of venue types. The restaurant sub-type lives in `subtype`.
const std::vector<std::string>& venue_types();
const std::vector<std::string>& restaurant_subtypes();

/// Each generator writes newline-delimited JSON and returns the record count.
/// Output bytes are a pure function of the config.
std::uint64_t gen_twitter(const GenConfig& cfg, std::ostream& out);
std::uint64_t gen_foursquare(const GenConfig& cfg, std::ostream& out);
std::uint64_t gen_landmarks(const GenConfig& cfg, std::ostream& out);

struct GeneratedFiles {
  std::filesystem::path twitter;
  std::filesystem::path foursquare;
  std::filesystem::path landmarks;

  std::filesystem::path for_source(const std::string& source) const;
};

/// Generates all three logs into `dir` (twitter.jsonl, foursquare.jsonl, landmarks.jsonl).
GeneratedFiles generate_all(const GenConfig& cfg, const std::filesystem::path& dir);

}  // namespace evobench::datagen
