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

#include "lsm/iterator.h"

#include <algorithm>

namespace dlsm {

void VectorIterator::Seek(std::string_view target) {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), target,
      [](const Entry& e, std::string_view k) { return std::string_view(e.key) < k; });
  pos_ = static_cast<size_t>(it - entries_.begin());
}

void MergingIterator::Seek(std::string_view target) {
  for (auto& c : children_) c->Seek(target);
  FindSmallest();
}

void MergingIterator::Next() {
  if (current_ == nullptr) return;
  current_->Next();
  FindSmallest();
}

void MergingIterator::FindSmallest() {
  current_ = nullptr;
  for (auto& c : children_) {
    if (!c->status().ok()) {
      status_ = c->status();
      current_ = nullptr;
      return;
    }
    if (!c->Valid()) continue;
    if (current_ == nullptr || EntryBefore(c->entry(), current_->entry())) {
      current_ = c.get();
    }
  }
}

}  // namespace dlsm
