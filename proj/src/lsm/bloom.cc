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

#include "lsm/bloom.h"

#include <algorithm>
#include <cmath>

#include "common/coding.h"

namespace dlsm {

BloomFilter::BloomFilter(uint32_t num_bits, uint32_t num_probes,
                         std::string bits)
    : num_bits_(num_bits), num_probes_(num_probes), bits_(std::move(bits)) {}

uint32_t BloomFilter::BitsFor(size_t num_keys, int bits_per_key) {
  uint64_t bits = static_cast<uint64_t>(num_keys) *
                  static_cast<uint64_t>(std::max(bits_per_key, 1));
  bits = std::max<uint64_t>(bits, 64);
  bits = (bits + 7) / 8 * 8;
  return static_cast<uint32_t>(bits);
}

uint32_t BloomFilter::ProbesFor(int bits_per_key) {
  // k = bits_per_key * ln 2 minimizes the false positive rate.
  auto k = static_cast<int>(std::lround(bits_per_key * 0.69314718056));
  return static_cast<uint32_t>(std::clamp(k, 1, 30));
}

BloomFilter BloomFilter::Build(const std::vector<std::string_view>& keys,
                               int bits_per_key) {
  uint32_t nbits = BitsFor(keys.size(), bits_per_key);
  BloomFilter f(nbits, ProbesFor(bits_per_key), std::string(nbits / 8, '\0'));
  for (auto k : keys) f.Add(k);
  return f;
}

void BloomFilter::Add(std::string_view key) {
  uint64_t h = Hash64(key);
  const uint64_t delta = Mix64(h) | 1;
  for (uint32_t i = 0; i < num_probes_; ++i) {
    uint64_t bit = h % num_bits_;
    bits_[bit / 8] = static_cast<char>(bits_[bit / 8] | (1 << (bit % 8)));
    h += delta;
  }
}

bool BloomFilter::MayContain(std::string_view key) const {
  if (num_bits_ == 0) return true;
  uint64_t h = Hash64(key);
  const uint64_t delta = Mix64(h) | 1;
  for (uint32_t i = 0; i < num_probes_; ++i) {
    uint64_t bit = h % num_bits_;
    if ((static_cast<unsigned char>(bits_[bit / 8]) & (1 << (bit % 8))) == 0) {
      return false;
    }
    h += delta;
  }
  return true;
}

}  // namespace dlsm
