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

#include "levshap/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <unordered_set>

#include "levshap/errors.hpp"

namespace levshap {

namespace {

constexpr std::uint64_t kShuffleLimit = 4096;

void check_players(int n, const char* who) {
  if (n < 2) throw DomainError(std::string(who) + ": need n >= 2");
}

// ln sum_{s=1}^{n-1} 1/(s(n-s)) = ln sum_s C(n,s) w(s).
double log_total_kernel_mass(int n) {
  double total = 0.0;
  for (int s = 1; s < n; ++s) total += 1.0 / (static_cast<double>(s) * (n - s));
  return std::log(total);
}

double min_log_row_score(int n, Distribution dist) {
  double least = std::numeric_limits<double>::infinity();
  for (int s = 1; s < n; ++s) least = std::min(least, log_row_score(n, s, dist));
  return least;
}

// Embed a mask over n-1 players into n players with player n present.
SubsetMask with_anchor(const SubsetMask& inner) {
  const int n = inner.size() + 1;
  SubsetMask out(n);
  for (int p : inner.players()) out.set(p);
  out.set(n - 1);
  return out;
}

std::int64_t draw_count(const BigInt& trials, double p, Rng& rng) {
  if (p >= 1.0) return static_cast<std::int64_t>(trials);
  if (p <= 0.0) return 0;
  const BigInt limit = BigInt(std::numeric_limits<std::int64_t>::max() / 2);
  if (trials > limit || p < 1e-12) {
    // N is astronomically large or p tiny: Poisson(Np) is within total
    // variation N p^2 of the binomial.
    const double mean = static_cast<double>(trials) * p;
    std::poisson_distribution<std::int64_t> poisson(mean);
    const std::int64_t k = poisson(rng);
    return trials < BigInt(k) ? static_cast<std::int64_t>(trials) : k;
  }
  std::binomial_distribution<std::int64_t> binomial(static_cast<std::int64_t>(trials), p);
  return binomial(rng);
}

}  // namespace

double log_row_score(int n, int s, Distribution dist) {
  check_players(n, "log_row_score");
  if (s < 1 || s > n - 1) throw DomainError("log_row_score: size outside [1, n-1]");
  if (dist == Distribution::leverage) return log_leverage_score(n, s);
  return std::log(static_cast<double>(n - 1)) + log_shapley_weight(n, s) -
         log_total_kernel_mass(n);
}

double pair_inclusion_probability(int n, int s, double c, Distribution dist) {
  if (c <= 0.0) return 0.0;
  const double log_p = std::log(2.0 * c) + log_row_score(n, s, dist);
  return log_p >= 0.0 ? 1.0 : std::exp(log_p);
}

double expected_rows(int n, double c, Distribution dist) {
  check_players(n, "expected_rows");
  if (c <= 0.0) return 0.0;
  const double log_2c = std::log(2.0 * c);
  double total = 0.0;
  for (int s = 1; s < n; ++s) {
    const double log_q = log_row_score(n, s, dist);
    const double log_binom = log_binomial(n, s);
    // Saturated sizes contribute every row; the others 2c q(s) C(n,s).
    total += (log_2c + log_q >= 0.0) ? std::exp(log_binom)
                                     : std::exp(log_2c + log_q + log_binom);
  }
  return total;
}

double solve_c(int n, std::int64_t m, Distribution dist) {
  check_players(n, "solve_c");
  if (m < n) {
    throw DomainError("solve_c: budget m=" + std::to_string(m) +
                      " is below the minimum of n=" + std::to_string(n));
  }
  if (n < 63 && m > (std::int64_t{1} << n)) {
    throw DomainError("solve_c: budget m exceeds 2^n; cap it before calling");
  }
  const double target = static_cast<double>(m - 2);
  if (target <= 0.0) return 0.0;
  // c at which every size saturates.
  const double log_c_full = -std::log(2.0) - min_log_row_score(n, dist);
  if (n < 63 && m == (std::int64_t{1} << n)) return std::exp(log_c_full);

  double lo = 0.0;
  double hi = 1.0;
  while (expected_rows(n, hi, dist) < target) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw NumericalError("solve_c: bracket overflow");
  }
  for (int it = 0; it < 2000 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (expected_rows(n, mid, dist) >= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

BigInt uniform_below(const BigInt& bound, Rng& rng) {
  if (bound <= 0) throw DomainError("uniform_below: bound must be positive");
  if (bound <= BigInt(std::numeric_limits<std::uint64_t>::max())) {
    std::uniform_int_distribution<std::uint64_t> dist(
        0, static_cast<std::uint64_t>(bound) - 1);
    return BigInt(dist(rng));
  }
  const std::size_t bits = boost::multiprecision::msb(bound) + 1;
  const std::size_t words = (bits + 63) / 64;
  const std::size_t top_bits = bits - (words - 1) * 64;
  while (true) {
    BigInt candidate = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t word = rng();
      if (w == 0 && top_bits < 64) word &= (std::uint64_t{1} << top_bits) - 1;
      candidate <<= 64;
      candidate += word;
    }
    if (candidate < bound) return candidate;
  }
}

std::vector<BigInt> distinct_indices(const BigInt& bound, std::int64_t count, Rng& rng) {
  if (count < 0 || BigInt(count) > bound) {
    throw DomainError("distinct_indices: count must lie in [0, bound]");
  }
  std::vector<BigInt> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 0) return out;

  if (bound <= kShuffleLimit) {
    const auto n = static_cast<std::uint64_t>(bound);
    std::vector<std::uint64_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::uint64_t{0});
    for (std::int64_t k = 0; k < count; ++k) {
      const auto uk = static_cast<std::uint64_t>(k);
      std::uniform_int_distribution<std::uint64_t> pick(uk, n - 1);
      std::swap(pool[uk], pool[pick(rng)]);
      out.emplace_back(pool[uk]);
    }
    return out;
  }

  // Floyd's algorithm: exactly `count` draws, uniform over count-subsets.
  if (bound <= BigInt(std::numeric_limits<std::uint64_t>::max())) {
    const auto n = static_cast<std::uint64_t>(bound);
    std::unordered_set<std::uint64_t> seen;
    for (std::uint64_t j = n - static_cast<std::uint64_t>(count); j < n; ++j) {
      std::uniform_int_distribution<std::uint64_t> pick(0, j);
      const std::uint64_t t = pick(rng);
      const std::uint64_t chosen = seen.insert(t).second ? t : j;
      if (chosen == j) seen.insert(j);
      out.emplace_back(chosen);
    }
    return out;
  }
  std::set<BigInt> seen;
  for (BigInt j = bound - count; j < bound; ++j) {
    BigInt t = uniform_below(j + 1, rng);
    if (seen.insert(t).second) {
      out.push_back(std::move(t));
    } else {
      seen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

PairedSample bernoulli_sample(int n, double c, Rng& rng, const BernoulliOptions& options) {
  check_players(n, "bernoulli_sample");
  PairedSample out;
  out.n = n;
  out.c = c;
  out.distribution = options.distribution;
  const int half = n / 2;
  out.pairs_per_size.assign(static_cast<std::size_t>(half) + 1, 0);

  std::vector<BigInt> trials(static_cast<std::size_t>(half) + 1);
  std::vector<double> prob(static_cast<std::size_t>(half) + 1, 0.0);
  for (int s = 1; s <= half; ++s) {
    const bool middle = (n % 2 == 0) && s == half;
    const auto us = static_cast<std::size_t>(s);
    trials[us] = middle ? binomial_exact(n - 1, s - 1) : binomial_exact(n, s);
    prob[us] = pair_inclusion_probability(n, s, c, options.distribution);
  }

  if (options.deterministic_counts) {
    // Largest-remainder rounding of the expectations N_s p_s.
    double expected_total = 0.0;
    std::vector<double> remainder(static_cast<std::size_t>(half) + 1, -1.0);
    std::int64_t assigned = 0;
    for (int s = 1; s <= half; ++s) {
      const auto us = static_cast<std::size_t>(s);
      const double e = prob[us] >= 1.0 ? static_cast<double>(trials[us])
                                       : static_cast<double>(trials[us]) * prob[us];
      expected_total += e;
      const double fl = std::floor(e);
      out.pairs_per_size[us] = static_cast<std::int64_t>(fl);
      remainder[us] = e - fl;
      assigned += out.pairs_per_size[us];
    }
    std::int64_t missing = static_cast<std::int64_t>(std::floor(expected_total + 1e-6)) - assigned;
    std::vector<int> order;
    for (int s = 1; s <= half; ++s) order.push_back(s);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return remainder[static_cast<std::size_t>(a)] > remainder[static_cast<std::size_t>(b)];
    });
    for (int s : order) {
      if (missing <= 0) break;
      const auto us = static_cast<std::size_t>(s);
      if (BigInt(out.pairs_per_size[us]) < trials[us]) {
        ++out.pairs_per_size[us];
        --missing;
      }
    }
  } else {
    for (int s = 1; s <= half; ++s) {
      const auto us = static_cast<std::size_t>(s);
      out.pairs_per_size[us] = draw_count(trials[us], prob[us], rng);
    }
  }

  for (int s = 1; s <= half; ++s) {
    const auto us = static_cast<std::size_t>(s);
    const bool middle = (n % 2 == 0) && s == half;
    for (const auto& index : distinct_indices(trials[us], out.pairs_per_size[us], rng)) {
      SubsetMask z = middle ? with_anchor(combo_unrank(n - 1, s - 1, index))
                            : combo_unrank(n, s, index);
      SubsetMask zc = z.complement();
      out.pairs.push_back(SampledPair{std::move(z), std::move(zc)});
    }
  }
  return out;
}

double log_row_probability(int n, int s, Distribution dist) {
  // q(s) sums to n-1 over all rows.
  return log_row_score(n, s, dist) - std::log(static_cast<double>(n - 1));
}

SubsetMask uniform_subset(int n, int s, Rng& rng) {
  if (s < 0 || s > n) throw DomainError("uniform_subset: need 0 <= s <= n");
  SubsetMask mask(n);
  // Floyd over players.
  for (int j = n - s; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    if (mask.test(t)) {
      mask.set(j);
    } else {
      mask.set(t);
    }
  }
  return mask;
}

std::vector<SubsetMask> sample_with_replacement(int n, std::int64_t count, Distribution dist,
                                                bool paired, Rng& rng) {
  check_players(n, "sample_with_replacement");
  if (count < 1) throw DomainError("sample_with_replacement: count must be >= 1");
  std::vector<double> size_mass(static_cast<std::size_t>(n - 1));
  for (int s = 1; s < n; ++s) {
    size_mass[static_cast<std::size_t>(s - 1)] =
        dist == Distribution::leverage ? 1.0 : 1.0 / (static_cast<double>(s) * (n - s));
  }
  std::discrete_distribution<int> size_dist(size_mass.begin(), size_mass.end());
  std::vector<SubsetMask> out;
  const std::int64_t draws = paired ? count / 2 : count;
  out.reserve(static_cast<std::size_t>(paired ? 2 * draws : draws));
  for (std::int64_t k = 0; k < draws; ++k) {
    const int s = size_dist(rng) + 1;
    out.push_back(uniform_subset(n, s, rng));
    if (paired) out.push_back(out.back().complement());
  }
  return out;
}

}  // namespace levshap
