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

#pragma once

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "levshap/mask.hpp"

namespace levshap {

using BigInt = boost::multiprecision::cpp_int;

// Exact C(n, s); zero when s is outside [0, n].
BigInt binomial_exact(int n, int s);

// ln C(n, s) via extended-precision log-gamma. Requires 0 <= s <= n.
double log_binomial(int n, int s);

// Shapley kernel weight w(s) = 1 / (C(n,s) s (n-s)) = (s-1)!(n-s-1)!/n!.
// Requires n >= 2 and 1 <= s <= n-1. The linear form underflows to zero when
// w(s) is below the smallest double; use the log form for large n.
double log_shapley_weight(int n, int s);
double shapley_weight(int n, int s);

// Leverage score of every row with ||z||_1 = s: 1 / C(n, s).
double log_leverage_score(int n, int s);
double leverage_score(int n, int s);

// Per-size tables for one player count. Immutable after construction.
class SetSizeProfile {
 public:
  explicit SetSizeProfile(int n);

  int n() const { return n_; }
  double log_binomial(int s) const;
  // C(n, s) as a double; +inf when it overflows.
  double binomial(int s) const;
  double log_weight(int s) const;
  double weight(int s) const;
  double log_leverage(int s) const;
  double leverage(int s) const;

 private:
  void check_interior(int s) const;

  int n_;
  std::vector<double> log_binom_;   // s = 0..n
  std::vector<double> log_weight_;  // s = 0..n, entries 0 and n unused
};

// The index-th size-s subset of {0..n-1} in lexicographic order of sorted
// index tuples. Throws RangeError unless 0 <= index < C(n, s).
SubsetMask combo_unrank(int n, int s, const BigInt& index);
SubsetMask combo_unrank(int n, int s, std::uint64_t index);

// Inverse of combo_unrank. Throws DomainError if popcount(mask) != s.
BigInt combo_rank(const SubsetMask& mask, int s);

// Visits every size-s subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_combination(int n, int s, Fn&& fn) {
  if (s < 0 || s > n) return;
  std::vector<int> idx(static_cast<std::size_t>(s));
  for (int k = 0; k < s; ++k) idx[static_cast<std::size_t>(k)] = k;
  while (true) {
    SubsetMask mask(n);
    for (int p : idx) mask.set(p);
    fn(mask);
    int k = s - 1;
    while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - s + k) --k;
    if (k < 0) return;
    ++idx[static_cast<std::size_t>(k)];
    for (int t = k + 1; t < s; ++t) {
      idx[static_cast<std::size_t>(t)] = idx[static_cast<std::size_t>(t - 1)] + 1;
    }
  }
}

}  // namespace levshap
