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

#ifndef DLSM_TESTS_TEST_UTIL_H_
#define DLSM_TESTS_TEST_UTIL_H_

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lsm/sstable.h"
#include "lsm/types.h"

namespace dlsm::testing {

// Keys drawn from a small alphabet so random workloads collide often.
inline std::string RandomKey(std::mt19937_64& rng, int key_space) {
  std::uniform_int_distribution<int> d(0, key_space - 1);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "k%06d", d(rng));
  return buf;
}

inline std::string RandomValue(std::mt19937_64& rng, size_t max_len = 32) {
  std::uniform_int_distribution<size_t> len(0, max_len);
  std::uniform_int_distribution<int> ch('a', 'z');
  std::string v(len(rng), 'x');
  for (auto& c : v) c = static_cast<char>(ch(rng));
  return v;
}

// Sorted, duplicate-free run of entries with seqs drawn from `next_seq`.
inline std::vector<Entry> RandomRun(std::mt19937_64& rng, size_t n,
                                    int key_space, SeqNo* next_seq,
                                    double tombstone_fraction = 0.1) {
  std::map<std::string, Entry> by_key;
  std::bernoulli_distribution tomb(tombstone_fraction);
  for (size_t i = 0; i < n; ++i) {
    Entry e;
    e.key = RandomKey(rng, key_space);
    e.seq = (*next_seq)++;
    if (tomb(rng)) {
      e.type = ValueType::kTombstone;
    } else {
      e.value = RandomValue(rng);
    }
    by_key[e.key] = e;
  }
  std::vector<Entry> out;
  for (auto& [k, e] : by_key) out.push_back(std::move(e));
  return out;
}

// Oracle: newest version per key across any number of entry lists.
inline std::map<std::string, Entry> FoldNewest(
    const std::vector<std::vector<Entry>>& runs) {
  std::map<std::string, Entry> out;
  for (const auto& run : runs) {
    for (const auto& e : run) {
      auto it = out.find(e.key);
      if (it == out.end() || it->second.seq < e.seq) out[e.key] = e;
    }
  }
  return out;
}

}  // namespace dlsm::testing

#endif  // DLSM_TESTS_TEST_UTIL_H_
