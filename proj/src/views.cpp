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

#include "evobench/views.hpp"

#include <algorithm>
#include <chrono>
#include <cstring>
#include <functional>
#include <fstream>
#include <mutex>
#include <set>

#include "evobench/catalog.hpp"
#include "evobench/error.hpp"
#include "evobench/kvconfig.hpp"
#include "json.hpp"

namespace evobench::views {

using namespace evobench::engine;
using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(Policy policy) {
  switch (policy) {
    case Policy::None: return "none";
    case Policy::All: return "all";
    case Policy::Lru: return "lru";
  }
  return "none";
}

Policy policy_from_string(std::string_view name) {
  if (name == "none" || name == "off") return Policy::None;
  if (name == "all" || name == "on") return Policy::All;
  if (name == "lru") return Policy::Lru;
  throw ValidationError("unknown views policy '" + std::string(name) + "' (expected none, all or lru)");
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::Computed: return "computed";
    case Decision::ReusedExact: return "reused-exact";
    case Decision::ReusedSubsumed: return "reused-subsumed";
    case Decision::Covered: return "covered";
  }
  return "computed";
}

namespace {

using Clock = std::chrono::steady_clock;

std::string exact_double(double d) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &d, sizeof bits);
  return to_hex(bits);
}

/// Signatures and snapshot generations per node, computed once per call.
class NodeInfo {
 public:
  explicit NodeInfo(const Catalog& catalog) : catalog_(catalog) {}

  const PlanSignature& signature(const NodePtr& n) {
    auto it = sigs_.find(n.get());
    if (it == sigs_.end()) it = sigs_.emplace(n.get(), canonicalize(n)).first;
    return it->second;
  }

  /// Empty when some scanned source is not registered.
  const std::optional<std::map<std::string, std::uint64_t>>& generations(const NodePtr& n) {
    auto it = gens_.find(n.get());
    if (it != gens_.end()) return it->second;
    std::map<std::string, std::uint64_t> out;
    bool ok = true;
    for (const auto& m : topo_nodes(n)) {
      if (m->kind() != NodeKind::Scan) continue;
      const auto& source = m->as<ScanSpec>().source;
      const std::uint64_t g = catalog_.has_source(source) ? catalog_.generation(source) : 0;
      if (g == 0) ok = false;
      out[source] = g;
    }
    std::optional<std::map<std::string, std::uint64_t>> res;
    if (ok) res = std::move(out);
    return gens_.emplace(n.get(), std::move(res)).first->second;
  }

 private:
  const Catalog& catalog_;
  std::unordered_map<const Node*, PlanSignature> sigs_;
  std::unordered_map<const Node*, std::optional<std::map<std::string, std::uint64_t>>> gens_;
};

/// Columns of `table` arranged like `want`; nullptr when the names differ.
std::shared_ptr<const Table> arrange(const std::shared_ptr<const Table>& table, const std::vector<ColumnDef>& want) {
  if (table->columns.size() != want.size()) return nullptr;
  std::vector<std::size_t> idx;
  bool identity = true;
  for (std::size_t i = 0; i < want.size(); ++i) {
    auto j = table->column_index(want[i].name);
    if (!j) return nullptr;
    idx.push_back(*j);
    identity = identity && *j == i;
  }
  if (identity) return table;
  auto out = std::make_shared<Table>();
  for (std::size_t j : idx) out->columns.push_back(table->columns[j]);
  out->rows.reserve(table->rows.size());
  for (const auto& row : table->rows) {
    Row r;
    r.reserve(idx.size());
    for (std::size_t j : idx) r.push_back(row[j]);
    out->rows.push_back(std::move(r));
  }
  return out;
}

bool subsumes(Cmp cmp, double stored, double wanted) {
  switch (cmp) {
    case Cmp::Gt:
    case Cmp::Ge: return stored <= wanted;
    case Cmp::Lt:
    case Cmp::Le: return stored >= wanted;
    default: return false;
  }
}

void write_atomic(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

json manifest_json(const ViewEntry& e) {
  json slots = json::array();
  for (const auto& s : e.signature.slots) {
    slots.push_back({{"node", s.node}, {"cmp", std::string(to_string(s.cmp))}, {"constant", s.constant}});
  }
  json cols = json::array();
  for (const auto& c : e.columns) cols.push_back({{"name", c.name}, {"type", std::string(to_string(c.type))}});
  return {{"key", e.key},
          {"signature", e.signature.text},
          {"slots", slots},
          {"generations", e.generations},
          {"columns", cols},
          {"rows", e.rows},
          {"size_bytes", e.size_bytes},
          {"materialization_seconds", e.materialization_seconds},
          {"run_id", e.run_id}};
}

}  // namespace

ViewStore::ViewStore(fs::path dir, Policy policy, std::uint64_t lru_budget_bytes)
    : dir_(std::move(dir)), policy_(policy), budget_(lru_budget_bytes) {
  // Generations restart with each catalog, so entries from an earlier process are unusable.
  std::error_code ec;
  fs::remove_all(dir_, ec);
  fs::create_directories(dir_);
}

std::string ViewStore::entry_key(const PlanSignature& signature,
                                 const std::map<std::string, std::uint64_t>& generations) {
  std::string text = signature.text;
  for (const auto& s : signature.slots) {
    text += "|" + std::to_string(s.node) + std::string(to_string(s.cmp)) + exact_double(s.constant);
  }
  for (const auto& [source, gen] : generations) text += "|" + source + "@" + std::to_string(gen);
  return to_hex(fnv1a64(text));
}

std::shared_ptr<const Table> ViewStore::load(const ViewEntry& entry) const {
  const fs::path data = entry.path / "data.bin";
  const auto values = decode_values(read_text_file(data), data.string());
  const std::size_t width = entry.columns.size();
  auto table = std::make_shared<Table>();
  table->columns = entry.columns;
  if (width == 0) {
    table->rows.assign(entry.rows, Row{});
    return table;
  }
  if (values.size() != width * entry.rows) throw IoError("view data does not match its manifest: " + data.string());
  table->rows.reserve(entry.rows);
  for (std::size_t i = 0; i < values.size(); i += width) {
    table->rows.emplace_back(values.begin() + static_cast<std::ptrdiff_t>(i),
                             values.begin() + static_cast<std::ptrdiff_t>(i + width));
  }
  return table;
}

void ViewStore::touch(const std::string& key) {
  if (policy_ != Policy::Lru) return;
  lru_.remove(key);
  lru_.push_back(key);
}

void ViewStore::remove_entry(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) return;
  std::error_code ec;
  fs::remove_all(it->second.path, ec);
  auto& keys = by_text_[it->second.signature.text];
  keys.erase(std::remove(keys.begin(), keys.end(), key), keys.end());
  lru_.remove(key);
  entries_.erase(it);
}

void ViewStore::evict_to_budget() {
  if (policy_ != Policy::Lru) return;
  std::uint64_t total = 0;
  for (const auto& [k, e] : entries_) total += e.size_bytes;
  while (total > budget_ && !lru_.empty()) {
    const std::string victim = lru_.front();
    total -= entries_.at(victim).size_bytes;
    remove_entry(victim);
  }
}

Rewrite ViewStore::rewrite(const QueryPlan& plan, const Catalog& catalog) {
  std::unique_lock lock(mutex_);
  Rewrite rw;
  NodeInfo info(catalog);
  std::unordered_map<const Node*, NodePtr> memo;
  std::unordered_map<const Node*, std::pair<Decision, std::string>> reused;

  auto serve = [&](const NodePtr& n, const ViewEntry& e) -> NodePtr {
    try {
      auto table = arrange(load(e), output_columns(n));
      if (!table) return nullptr;
      touch(e.key);
      rw.report.bytes_avoided += e.size_bytes;
      return view_scan(e.key, table);
    } catch (const Error&) {
      return nullptr;
    }
  };

  std::function<NodePtr(const NodePtr&)> visit = [&](const NodePtr& n) -> NodePtr {
    if (auto it = memo.find(n.get()); it != memo.end()) return it->second;
    NodePtr out;
    if (n->kind() != NodeKind::Scan && n->kind() != NodeKind::ViewScan && policy_ != Policy::None) {
      const auto& gens = info.generations(n);
      if (gens) {
        const PlanSignature& sig = info.signature(n);
        if (auto it = entries_.find(entry_key(sig, *gens)); it != entries_.end()) {
          out = serve(n, it->second);
          if (out) reused[n.get()] = {Decision::ReusedExact, it->first};
        }
        if (!out && n->kind() == NodeKind::Filter && n->as<FilterSpec>().lifted() && !sig.slots.empty()) {
          const ParamSlot& own = sig.slots.back();
          const ViewEntry* best = nullptr;
          for (const auto& key : by_text_[sig.text]) {
            const ViewEntry& e = entries_.at(key);
            if (e.generations != *gens || e.signature.slots.size() != sig.slots.size()) continue;
            if (!std::equal(sig.slots.begin(), sig.slots.end() - 1, e.signature.slots.begin())) continue;
            const ParamSlot& theirs = e.signature.slots.back();
            if (theirs.node != own.node || theirs.cmp != own.cmp) continue;
            if (!subsumes(own.cmp, theirs.constant, own.constant)) continue;
            if (!best || e.rows < best->rows) best = &e;
          }
          if (best) {
            if (auto vs = serve(n, *best)) {
              out = with_children(n, {vs});
              rw.origin[out.get()] = n;
              reused[n.get()] = {Decision::ReusedSubsumed, best->key};
            }
          }
        }
      }
    }
    if (!out) {
      std::vector<NodePtr> kids;
      bool changed = false;
      for (const auto& c : n->children()) {
        kids.push_back(visit(c));
        changed = changed || kids.back() != c;
      }
      out = changed ? with_children(n, std::move(kids)) : n;
      rw.origin[out.get()] = n;
    }
    memo.emplace(n.get(), out);
    return out;
  };

  rw.plan = QueryPlan{visit(plan.sink), plan.name};

  std::set<const Node*> computed;
  for (const auto& m : rw.plan.nodes()) {
    auto it = rw.origin.find(m.get());
    if (it != rw.origin.end()) computed.insert(it->second.get());
  }
  const auto original = plan.nodes();
  for (std::size_t i = 0; i < original.size(); ++i) {
    const Node* n = original[i].get();
    NodeDecision d;
    d.node = "#" + std::to_string(i) + " " + std::string(to_string(n->kind()));
    if (auto it = reused.find(n); it != reused.end()) {
      d.decision = it->second.first;
      d.view_key = it->second.second;
      ++rw.report.hits;
    } else if (computed.count(n)) {
      d.decision = Decision::Computed;
    } else {
      d.decision = Decision::Covered;
    }
    if (n->kind() != NodeKind::Scan) {
      ++rw.report.non_scan_nodes;
      if (d.decision != Decision::Computed) ++rw.report.non_scan_reused;
    }
    rw.report.decisions.push_back(std::move(d));
  }
  return rw;
}

CaptureResult ViewStore::capture(const QueryPlan& plan, const ExecResult& result, const Catalog& catalog,
                                 const std::string& run_id) {
  Rewrite identity;
  identity.plan = plan;
  for (const auto& n : plan.nodes()) identity.origin[n.get()] = n;
  return capture(identity, result, catalog, run_id);
}

CaptureResult ViewStore::capture(const Rewrite& executed, const ExecResult& result, const Catalog& catalog,
                                 const std::string& run_id) {
  CaptureResult out;
  if (policy_ == Policy::None) return out;
  std::unique_lock lock(mutex_);
  const auto start = Clock::now();
  NodeInfo info(catalog);
  for (const auto& n : executed.plan.nodes()) {
    if (n->kind() == NodeKind::Scan || n->kind() == NodeKind::ViewScan) continue;
    auto orig = executed.origin.find(n.get());
    auto data = result.intermediates.find(n.get());
    if (orig == executed.origin.end() || data == result.intermediates.end() || !data->second) continue;
    const auto& gens = info.generations(orig->second);
    if (!gens) continue;
    const PlanSignature& sig = info.signature(orig->second);
    const std::string key = entry_key(sig, *gens);
    if (entries_.count(key)) {
      touch(key);
      continue;
    }
    const auto t0 = Clock::now();
    const Table& table = *data->second;
    std::string bytes;
    for (const auto& row : table.rows) {
      for (const auto& v : row) encode_value(bytes, v);
    }
    ViewEntry e;
    e.key = key;
    e.signature = sig;
    e.generations = *gens;
    e.columns = table.columns;
    e.path = dir_ / key;
    e.rows = table.rows.size();
    e.size_bytes = bytes.size();
    e.run_id = run_id;
    fs::create_directories(e.path);
    write_atomic(e.path / "data.bin", bytes);
    e.materialization_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    write_atomic(e.path / "manifest.json", manifest_json(e).dump(2) + "\n");
    out.bytes_written += e.size_bytes;
    by_text_[sig.text].push_back(key);
    lru_.push_back(key);
    out.added.push_back(e);
    entries_.emplace(key, std::move(e));
  }
  evict_to_budget();
  out.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return out;
}

std::uint64_t ViewStore::storage_footprint() const {
  std::shared_lock lock(mutex_);
  std::uint64_t total = 0;
  for (const auto& [k, e] : entries_) total += e.size_bytes;
  return total;
}

std::size_t ViewStore::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<ViewEntry> ViewStore::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<ViewEntry> out;
  for (const auto& [k, e] : entries_) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const ViewEntry& a, const ViewEntry& b) { return a.key < b.key; });
  return out;
}

void ViewStore::reset() {
  std::unique_lock lock(mutex_);
  std::error_code ec;
  fs::remove_all(dir_, ec);
  fs::create_directories(dir_);
  entries_.clear();
  by_text_.clear();
  lru_.clear();
}

}  // namespace evobench::views
