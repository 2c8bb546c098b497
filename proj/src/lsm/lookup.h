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

#ifndef DLSM_LSM_LOOKUP_H_
#define DLSM_LSM_LOOKUP_H_

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lsm/memtable.h"
#include "lsm/sstable.h"
#include "lsm/version.h"

namespace dlsm {

using TableOpener =
    std::function<Result<std::shared_ptr<TableReader>>(const SstHandle&)>;

// Newest version of key across memtables (newest first) and the levels:
// memtables, then L0 newest first, then L1 and deeper.
Result<std::optional<VersionedValue>> TreeLookup(
    const LevelMetadata& levels,
    std::span<const Memtable* const> memtables, std::string_view key,
    const TableOpener& open);

// Visible value of key; tombstones read as absent.
Result<std::optional<std::string>> RangeGet(
    const LevelMetadata& levels,
    std::span<const Memtable* const> memtables, std::string_view key,
    const TableOpener& open);

using KeyValue = std::pair<std::string, std::string>;

// Visible key/value pairs with lower <= key < upper (empty upper is
// unbounded), at most limit of them. Memtable contents are passed as
// sorted entry snapshots, newest first.
Result<std::vector<KeyValue>> TreeScan(
    const LevelMetadata& levels, std::vector<std::vector<Entry>> memtables,
    std::string_view lower, std::string_view upper, size_t limit,
    const TableOpener& open);

}  // namespace dlsm

#endif  // DLSM_LSM_LOOKUP_H_
