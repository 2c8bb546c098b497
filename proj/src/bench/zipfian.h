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

#ifndef DLSM_BENCH_ZIPFIAN_H_
#define DLSM_BENCH_ZIPFIAN_H_

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dlsm {

// Uniform double in [0, 1) from the top 53 bits of one draw. Unlike
// std::uniform_real_distribution the mapping is fixed across libraries.
inline double UnitDouble(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Zipfian ranks over [0, n): P(rank = i) = (i + 1)^-theta / zeta(n, theta).
// Ranks below the head size are sampled by inverting the exact cumulative
// distribution. The remaining tail mass is sampled from the continuous
// power law over the tail, which differs from the discrete law only far
// from the hot keys.
class ZipfianGenerator {
 public:
  ZipfianGenerator(uint64_t n, double theta, uint64_t head = 1 << 16);

  uint64_t Next(std::mt19937_64& rng) const;

  // Exact probability of rank i.
  double Probability(uint64_t rank) const;
  // Probability the sampler assigns to rank i (equal to Probability for
  // head ranks).
  double SamplerProbability(uint64_t rank) const;

  uint64_t n() const { return n_; }
  double theta() const { return theta_; }
  double zeta() const { return zeta_; }

 private:
  uint64_t TailRank(double u) const;

  uint64_t n_;
  double theta_;
  double zeta_ = 0;
  std::vector<double> head_cdf_;
  double head_mass_ = 0;
  double tail_a_ = 0;  // (head + 0.5)^(1 - theta)
  double tail_b_ = 0;  // (n + 0.5)^(1 - theta)
};

// Key of item i: big-endian Mix64(i). Scrambles the popularity order over
// the key space, so hot items land in unrelated ranges.
std::string ItemKey(uint64_t item);

}  // namespace dlsm

#endif  // DLSM_BENCH_ZIPFIAN_H_
