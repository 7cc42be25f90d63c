/*
 * Copyright 2026 The levshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "levshap/combinatorics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "levshap/errors.hpp"

namespace levshap {

namespace {

void check_weight_args(int n, int s, const char* who) {
  if (n < 2 || s < 1 || s > n - 1) {
    throw DomainError(std::string(who) + ": need n >= 2 and 1 <= s <= n-1 (n=" +
                      std::to_string(n) + ", s=" + std::to_string(s) + ")");
  }
}

// ln C(n, s) in long double. lgammal keeps the absolute error of the
// difference near 1e-19 * ln(n!), which is what makes w(s) accurate to 1e-12
// relative up to n = 1e4.
long double log_binomial_ld(int n, int s) {
  if (s == 0 || s == n) return 0.0L;
  return lgammal(static_cast<long double>(n) + 1.0L) -
         lgammal(static_cast<long double>(s) + 1.0L) -
         lgammal(static_cast<long double>(n - s) + 1.0L);
}

long double log_weight_ld(int n, int s) {
  return lgammal(static_cast<long double>(s)) +
         lgammal(static_cast<long double>(n - s)) -
         lgammal(static_cast<long double>(n) + 1.0L);
}

// Exact for results below 2^64; intermediate products use 128 bits.
std::uint64_t binomial_u64(int n, int k) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  unsigned __int128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return static_cast<std::uint64_t>(acc);
}

// Lexicographic unranking. `count` tracks C(r, k-1) where r = n-1-j is the
// number of elements after candidate j, updated incrementally so each step is
// one multiply and one exact divide.
template <class Int, class Wide>
SubsetMask unrank_impl(int n, int s, Int index, Int first_count) {
  SubsetMask mask(n);
  if (s == 0) return mask;
  int k = s;
  Int count = first_count;  // C(n-1, s-1)
  for (int j = 0; j < n && k > 0; ++j) {
    const int r = n - 1 - j;
    if (index < count) {
      mask.set(j);
      --k;
      if (k == 0) break;
      // C(r-1, k-1) from C(r, k): times k / r.
      count = static_cast<Int>(static_cast<Wide>(count) * k / r);
    } else {
      index -= count;
      // C(r-1, k-1) from C(r, k-1): times (r-k+1) / r.
      count = static_cast<Int>(static_cast<Wide>(count) * (r - k + 1) / r);
    }
  }
  return mask;
}

}  // namespace

BigInt binomial_exact(int n, int s) {
  if (s < 0 || n < 0 || s > n) return 0;
  if (s > n - s) s = n - s;
  BigInt acc = 1;
  for (int i = 1; i <= s; ++i) {
    acc *= n - s + i;
    acc /= i;
  }
  return acc;
}

double log_binomial(int n, int s) {
  if (n < 0 || s < 0 || s > n) {
    throw DomainError("log_binomial: need 0 <= s <= n");
  }
  return static_cast<double>(log_binomial_ld(n, s));
}

double log_shapley_weight(int n, int s) {
  check_weight_args(n, s, "shapley_weight");
  return static_cast<double>(log_weight_ld(n, s));
}

double shapley_weight(int n, int s) {
  check_weight_args(n, s, "shapley_weight");
  return static_cast<double>(expl(log_weight_ld(n, s)));
}

double log_leverage_score(int n, int s) {
  check_weight_args(n, s, "leverage_score");
  return static_cast<double>(-log_binomial_ld(n, s));
}

double leverage_score(int n, int s) {
  check_weight_args(n, s, "leverage_score");
  return static_cast<double>(expl(-log_binomial_ld(n, s)));
}

SetSizeProfile::SetSizeProfile(int n)
    : n_(n),
      log_binom_(static_cast<std::size_t>(n) + 1),
      log_weight_(static_cast<std::size_t>(n) + 1, 0.0) {
  if (n < 2) throw DomainError("SetSizeProfile: need n >= 2");
  for (int s = 0; s <= n; ++s) {
    log_binom_[static_cast<std::size_t>(s)] =
        static_cast<double>(log_binomial_ld(n, s));
  }
  for (int s = 1; s < n; ++s) {
    log_weight_[static_cast<std::size_t>(s)] =
        static_cast<double>(log_weight_ld(n, s));
  }
}

void SetSizeProfile::check_interior(int s) const {
  if (s < 1 || s > n_ - 1) {
    throw DomainError("SetSizeProfile: size " + std::to_string(s) +
                      " outside [1, n-1]");
  }
}

double SetSizeProfile::log_binomial(int s) const {
  if (s < 0 || s > n_) throw DomainError("SetSizeProfile: size outside [0, n]");
  return log_binom_[static_cast<std::size_t>(s)];
}

double SetSizeProfile::binomial(int s) const {
  return std::exp(log_binomial(s));
}

double SetSizeProfile::log_weight(int s) const {
  check_interior(s);
  return log_weight_[static_cast<std::size_t>(s)];
}

double SetSizeProfile::weight(int s) const { return std::exp(log_weight(s)); }

double SetSizeProfile::log_leverage(int s) const {
  check_interior(s);
  return -log_binom_[static_cast<std::size_t>(s)];
}

double SetSizeProfile::leverage(int s) const {
  return std::exp(log_leverage(s));
}

SubsetMask combo_unrank(int n, int s, const BigInt& index) {
  if (n < 0 || s < 0 || s > n) throw DomainError("combo_unrank: need 0 <= s <= n");
  const BigInt total = binomial_exact(n, s);
  if (index < 0 || index >= total) {
    throw RangeError("combo_unrank: index outside [0, C(n,s))");
  }
  if (total <= BigInt(std::numeric_limits<std::uint64_t>::max())) {
    return combo_unrank(n, s, static_cast<std::uint64_t>(index));
  }
  if (s == 0) return SubsetMask(n);
  return unrank_impl<BigInt, BigInt>(n, s, index, binomial_exact(n - 1, s - 1));
}

SubsetMask combo_unrank(int n, int s, std::uint64_t index) {
  if (n < 0 || s < 0 || s > n) throw DomainError("combo_unrank: need 0 <= s <= n");
  if (n > 67 && s > 0 && s < n) {
    const BigInt total = binomial_exact(n, s);
    if (total > BigInt(std::numeric_limits<std::uint64_t>::max())) {
      return combo_unrank(n, s, BigInt(index));
    }
  }
  const std::uint64_t total = binomial_u64(n, s);
  if (index >= total) throw RangeError("combo_unrank: index outside [0, C(n,s))");
  if (s == 0) return SubsetMask(n);
  return unrank_impl<std::uint64_t, unsigned __int128>(n, s, index,
                                                       binomial_u64(n - 1, s - 1));
}

BigInt combo_rank(const SubsetMask& mask, int s) {
  if (mask.popcount() != s) {
    throw DomainError("combo_rank: popcount " + std::to_string(mask.popcount()) +
                      " differs from s=" + std::to_string(s));
  }
  const int n = mask.size();
  BigInt rank = 0;
  int k = s;
  for (int j = 0; j < n && k > 0; ++j) {
    if (mask.test(j)) {
      --k;
    } else {
      rank += binomial_exact(n - 1 - j, k - 1);
    }
  }
  return rank;
}

}  // namespace levshap
