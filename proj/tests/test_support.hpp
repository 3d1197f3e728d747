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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <unistd.h>

#include "evobench/catalog.hpp"
#include "evobench/datagen.hpp"
#include "evobench/kvconfig.hpp"

namespace evotest {

namespace fs = std::filesystem;

/// Fresh directory under the system temp dir; removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    static std::atomic<unsigned> counter{0};
    path_ = fs::temp_directory_path() /
            ("evobench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline fs::path write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  evobench::write_text_file(path, text);
  return path;
}

/// The default generated dataset, created once per test process.
inline const evobench::datagen::GeneratedFiles& default_files() {
  static TempDir dir("default-data");
  static const auto files = evobench::datagen::generate_all(evobench::datagen::default_config(), dir.path());
  return files;
}

inline void register_default(evobench::Catalog& catalog, evobench::Backend backend) {
  using namespace evobench::datagen;
  for (const char* s : {kTwitter, kFoursquare, kLandmarks}) {
    catalog.register_source(s, schema_for(s), default_files().for_source(s), backend);
  }
}

/// A catalog over the default dataset, shared read-only by tests in one process.
inline const evobench::Catalog& default_catalog(evobench::Backend backend = evobench::Backend::Loaded) {
  static std::mutex m;
  static TempDir raw_dir("default-raw");
  static TempDir loaded_dir("default-loaded");
  static std::unique_ptr<evobench::Catalog> raw;
  static std::unique_ptr<evobench::Catalog> loaded;
  std::lock_guard lock(m);
  auto& slot = backend == evobench::Backend::Raw ? raw : loaded;
  if (!slot) {
    slot = std::make_unique<evobench::Catalog>(backend == evobench::Backend::Raw ? raw_dir.path() : loaded_dir.path());
    register_default(*slot, backend);
  }
  return *slot;
}

}  // namespace evotest
