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

#ifndef DLSM_LSM_BLOOM_H_
#define DLSM_LSM_BLOOM_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dlsm {

// Standard bloom filter with double hashing over Hash64. The encoded form is
// just the bit array; the probe count and bit count travel alongside it in
// the table's filter section.
class BloomFilter {
 public:
  BloomFilter() = default;
  BloomFilter(uint32_t num_bits, uint32_t num_probes, std::string bits);

  // Builds a filter sized at bits_per_key for the given keys.
  static BloomFilter Build(const std::vector<std::string_view>& keys,
                           int bits_per_key);

  static uint32_t BitsFor(size_t num_keys, int bits_per_key);
  static uint32_t ProbesFor(int bits_per_key);

  bool MayContain(std::string_view key) const;

  uint32_t num_bits() const { return num_bits_; }
  uint32_t num_probes() const { return num_probes_; }
  const std::string& bits() const { return bits_; }

  friend bool operator==(const BloomFilter&, const BloomFilter&) = default;

 private:
  void Add(std::string_view key);

  uint32_t num_bits_ = 0;
  uint32_t num_probes_ = 0;
  std::string bits_;
};

}  // namespace dlsm

#endif  // DLSM_LSM_BLOOM_H_
