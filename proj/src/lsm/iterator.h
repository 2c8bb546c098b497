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

#ifndef DLSM_LSM_ITERATOR_H_
#define DLSM_LSM_ITERATOR_H_

#include <memory>
#include <string_view>
#include <vector>

#include "lsm/types.h"

namespace dlsm {

// Forward cursor over entries in (key asc, seq desc) order.
class EntryIterator {
 public:
  virtual ~EntryIterator() = default;
  virtual void Seek(std::string_view target) = 0;
  virtual void Next() = 0;
  virtual bool Valid() const = 0;
  virtual const Entry& entry() const = 0;
  virtual const Status& status() const = 0;
};

class VectorIterator : public EntryIterator {
 public:
  explicit VectorIterator(std::vector<Entry> entries)
      : entries_(std::move(entries)) {}

  void Seek(std::string_view target) override;
  void Next() override { ++pos_; }
  bool Valid() const override { return pos_ < entries_.size(); }
  const Entry& entry() const override { return entries_[pos_]; }
  const Status& status() const override { return status_; }

 private:
  std::vector<Entry> entries_;
  size_t pos_ = 0;
  Status status_;
};

// Merges children into a single ordered stream. Children are listed newest
// first; all versions of every key are yielded.
class MergingIterator : public EntryIterator {
 public:
  explicit MergingIterator(std::vector<std::unique_ptr<EntryIterator>> children)
      : children_(std::move(children)) {}

  void Seek(std::string_view target) override;
  void Next() override;
  bool Valid() const override { return current_ != nullptr; }
  const Entry& entry() const override { return current_->entry(); }
  const Status& status() const override { return status_; }

 private:
  void FindSmallest();

  std::vector<std::unique_ptr<EntryIterator>> children_;
  EntryIterator* current_ = nullptr;
  Status status_;
};

}  // namespace dlsm

#endif  // DLSM_LSM_ITERATOR_H_
