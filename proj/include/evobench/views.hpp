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
#include <list>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "evobench/engine.hpp"
#include "evobench/plan.hpp"

namespace evobench {
class Catalog;
}

namespace evobench::views {

/// ALL keeps every intermediate; LRU keeps them within a byte budget; NONE keeps nothing.
enum class Policy { None, All, Lru };

std::string_view to_string(Policy policy);
Policy policy_from_string(std::string_view name);

inline constexpr std::uint64_t kDefaultLruBudget = 64ULL << 20;

struct ViewEntry {
  std::string key;
  engine::PlanSignature signature;
  /// Generation of every source the subplan scans, at capture time.
  std::map<std::string, std::uint64_t> generations;
  std::vector<ColumnDef> columns;
  std::filesystem::path path;
  std::uint64_t rows{0};
  std::uint64_t size_bytes{0};
  double materialization_seconds{0};
  std::string run_id;
};

enum class Decision { Computed, ReusedExact, ReusedSubsumed, Covered };
std::string_view to_string(Decision decision);

struct NodeDecision {
  std::string node;  // "#<id> <kind>" in the original plan
  Decision decision{Decision::Computed};
  std::string view_key;
};

struct RewriteReport {
  /// One entry per node of the original plan. Covered nodes lie below a reused node.
  std::vector<NodeDecision> decisions;
  std::uint64_t hits{0};
  std::uint64_t non_scan_nodes{0};
  /// Non-scan nodes that were reused or lie below a reused node.
  std::uint64_t non_scan_reused{0};
  std::uint64_t bytes_avoided{0};

  /// Share of non-scan nodes not recomputed, in [0,1].
  double coverage() const {
    return non_scan_nodes ? static_cast<double>(non_scan_reused) / static_cast<double>(non_scan_nodes) : 0.0;
  }
};

struct Rewrite {
  engine::QueryPlan plan;
  RewriteReport report;
  /// Node of the rewritten plan -> node of the original plan computing the same rows.
  /// View scans have no origin.
  std::unordered_map<const engine::Node*, engine::NodePtr> origin;
};

struct CaptureResult {
  std::vector<ViewEntry> added;
  std::uint64_t bytes_written{0};
  double seconds{0};
};

/// Opportunistic view store rooted at <catalog_dir>/views. Each entry lives in
/// <key>/ as data.bin (value stream, row-major) and manifest.json.
class ViewStore {
 public:
  ViewStore(std::filesystem::path dir, Policy policy, std::uint64_t lru_budget_bytes = kDefaultLruBudget);

  ViewStore(const ViewStore&) = delete;
  ViewStore& operator=(const ViewStore&) = delete;

  Policy policy() const { return policy_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Replaces the largest matching subplans with view scans. Never fails: an
  /// unreadable or stale entry is simply not used.
  Rewrite rewrite(const engine::QueryPlan& plan, const Catalog& catalog);

  /// Persists the intermediates of an execution retained with retain_intermediates.
  /// Throws IoError when a view cannot be written.
  CaptureResult capture(const Rewrite& executed, const engine::ExecResult& result, const Catalog& catalog,
                        const std::string& run_id);
  /// Capture for a plan that was executed without rewriting.
  CaptureResult capture(const engine::QueryPlan& plan, const engine::ExecResult& result, const Catalog& catalog,
                        const std::string& run_id);

  std::uint64_t storage_footprint() const;
  std::size_t size() const;
  std::vector<ViewEntry> entries() const;
  void reset();

  /// Entry key for a signature over a catalog snapshot.
  static std::string entry_key(const engine::PlanSignature& signature,
                               const std::map<std::string, std::uint64_t>& generations);

 private:
  std::shared_ptr<const Table> load(const ViewEntry& entry) const;
  void touch(const std::string& key);
  void evict_to_budget();
  void remove_entry(const std::string& key);

  std::filesystem::path dir_;
  Policy policy_;
  std::uint64_t budget_;
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, ViewEntry> entries_;
  /// Entry keys grouped by signature text, for subsumption lookups.
  std::unordered_map<std::string, std::vector<std::string>> by_text_;
  std::list<std::string> lru_;
};

}  // namespace evobench::views
