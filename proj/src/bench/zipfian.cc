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

#include "bench/zipfian.h"

#include <algorithm>
#include <cmath>

#include "common/coding.h"

namespace dlsm {

ZipfianGenerator::ZipfianGenerator(uint64_t n, double theta, uint64_t head)
    : n_(std::max<uint64_t>(n, 1)), theta_(theta) {
  uint64_t h = std::min(n_, std::max<uint64_t>(head, 1));
  // Sum smallest terms first to limit rounding.
  long double zeta = 0;
  for (uint64_t i = n_; i > 0; --i) {
    zeta += std::pow(static_cast<long double>(i), -static_cast<long double>(theta));
  }
  zeta_ = static_cast<double>(zeta);
  head_cdf_.resize(h);
  long double acc = 0;
  for (uint64_t i = 0; i < h; ++i) {
    acc += std::pow(static_cast<long double>(i + 1),
                    -static_cast<long double>(theta)) / zeta;
    head_cdf_[i] = static_cast<double>(acc);
  }
  head_mass_ = head_cdf_.back();
  if (h == n_) {
    head_cdf_.back() = 1.0;
    head_mass_ = 1.0;
  }
  double e = 1.0 - theta_;
  tail_a_ = std::pow(static_cast<double>(h) + 0.5, e);
  tail_b_ = std::pow(static_cast<double>(n_) + 0.5, e);
}

uint64_t ZipfianGenerator::Next(std::mt19937_64& rng) const {
  double u = UnitDouble(rng);
  if (u < head_mass_) {
    auto it = std::upper_bound(head_cdf_.begin(), head_cdf_.end(), u);
    return std::min<uint64_t>(it - head_cdf_.begin(), head_cdf_.size() - 1);
  }
  return TailRank((u - head_mass_) / (1.0 - head_mass_));
}

uint64_t ZipfianGenerator::TailRank(double v) const {
  // Inverse CDF of x^-theta on [h + 0.5, n + 0.5); x is a 1-based rank.
  double x = std::pow(tail_a_ + v * (tail_b_ - tail_a_), 1.0 / (1.0 - theta_));
  auto rank = static_cast<uint64_t>(std::floor(x + 0.5));
  rank = std::clamp<uint64_t>(rank, head_cdf_.size() + 1, n_);
  return rank - 1;
}

double ZipfianGenerator::Probability(uint64_t rank) const {
  if (rank >= n_) return 0;
  return std::pow(static_cast<double>(rank + 1), -theta_) / zeta_;
}

double ZipfianGenerator::SamplerProbability(uint64_t rank) const {
  if (rank >= n_) return 0;
  if (rank < head_cdf_.size()) {
    return head_cdf_[rank] - (rank == 0 ? 0.0 : head_cdf_[rank - 1]);
  }
  double e = 1.0 - theta_;
  double lo = std::max(std::pow(static_cast<double>(rank) + 0.5, e), tail_a_);
  double hi = std::min(std::pow(static_cast<double>(rank) + 1.5, e), tail_b_);
  return (1.0 - head_mass_) * (hi - lo) / (tail_b_ - tail_a_);
}

std::string ItemKey(uint64_t item) {
  uint64_t h = Mix64(item);
  std::string k(8, '\0');
  for (int b = 0; b < 8; ++b) k[b] = static_cast<char>(h >> (56 - 8 * b));
  return k;
}

}  // namespace dlsm
