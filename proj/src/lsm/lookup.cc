// Copyright 2026 The dlsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsm/lookup.h"

#include <algorithm>

namespace dlsm {

namespace {

bool Covers(const SstSummary& s, std::string_view key) {
  return key >= s.min_key && key <= s.max_key;
}

Result<std::optional<VersionedValue>> LookupTable(const SstHandle& h,
                                                  std::string_view key,
                                                  const TableOpener& open) {
  DLSM_ASSIGN_OR_RETURN(std::shared_ptr<TableReader> t, open(h));
  return t->Get(key);
}

}  // namespace

Result<std::optional<VersionedValue>> TreeLookup(
    const LevelMetadata& levels, std::span<const Memtable* const> memtables,
    std::string_view key, const TableOpener& open) {
  for (const Memtable* mt : memtables) {
    if (auto v = mt->Get(key)) return v;
  }
  for (const auto& h : levels.levels[0]) {
    if (!Covers(h.summary, key)) continue;
    DLSM_ASSIGN_OR_RETURN(auto v, LookupTable(h, key, open));
    if (v) return v;
  }
  for (size_t l = 1; l < levels.levels.size(); ++l) {
    const auto& files = levels.levels[l];
    auto it = std::lower_bound(files.begin(), files.end(), key,
                               [](const SstHandle& h, std::string_view k) {
                                 return std::string_view(h.summary.max_key) < k;
                               });
    if (it == files.end() || !Covers(it->summary, key)) continue;
    DLSM_ASSIGN_OR_RETURN(auto v, LookupTable(*it, key, open));
    if (v) return v;
  }
  return std::optional<VersionedValue>();
}

Result<std::optional<std::string>> RangeGet(
    const LevelMetadata& levels, std::span<const Memtable* const> memtables,
    std::string_view key, const TableOpener& open) {
  DLSM_ASSIGN_OR_RETURN(auto v, TreeLookup(levels, memtables, key, open));
  if (!v || v->is_tombstone()) return std::optional<std::string>();
  return std::optional<std::string>(std::move(v->value));
}

Result<std::vector<KeyValue>> TreeScan(
    const LevelMetadata& levels, std::vector<std::vector<Entry>> memtables,
    std::string_view lower, std::string_view upper, size_t limit,
    const TableOpener& open) {
  std::vector<std::unique_ptr<EntryIterator>> children;
  for (auto& m : memtables) {
    children.push_back(std::make_unique<VectorIterator>(std::move(m)));
  }
  for (const auto& files : levels.levels) {
    for (const auto& h : files) {
      if (h.summary.max_key < lower) continue;
      if (!upper.empty() && std::string_view(h.summary.min_key) >= upper) {
        continue;
      }
      DLSM_ASSIGN_OR_RETURN(std::shared_ptr<TableReader> t, open(h));
      children.push_back(t->NewIterator());
    }
  }
  MergingIterator it(std::move(children));
  it.Seek(lower);
  std::vector<KeyValue> out;
  std::string last_key;
  bool have_last = false;
  while (it.Valid() && out.size() < limit) {
    const Entry& e = it.entry();
    if (!upper.empty() && std::string_view(e.key) >= upper) break;
    if (!have_last || e.key != last_key) {
      last_key = e.key;
      have_last = true;
      if (!e.is_tombstone()) out.emplace_back(e.key, e.value);
    }
    it.Next();
  }
  DLSM_RETURN_IF_ERROR(it.status());
  return out;
}

}  // namespace dlsm
