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
#include <random>
#include <vector>

#include "levshap/combinatorics.hpp"
#include "levshap/mask.hpp"

namespace levshap {

using Rng = std::mt19937_64;

// Row sampling distribution over masks with 0 < |z| < n.
//   leverage: P(z) proportional to 1 / C(n, |z|), uniform over sizes
//   kernel:   P(z) proportional to w(|z|), the Shapley kernel weight
enum class Distribution { kernel, leverage };

// ln q(s), the per-row score scaled so that sum_s C(n,s) q(s) = n - 1.
// For the leverage distribution q(s) is the leverage score 1 / C(n,s).
double log_row_score(int n, int s, Distribution dist);

// Inclusion probability of a complementary pair keyed by size s:
// min(1, 2 c q(s)).
double pair_inclusion_probability(int n, int s, double c,
                                  Distribution dist = Distribution::leverage);

// Expected number of rows F(c) = sum_{s=1}^{n-1} C(n,s) min(1, 2 c q(s)).
double expected_rows(int n, double c, Distribution dist = Distribution::leverage);

// Smallest c with F(c) = m - 2, found by bisection (F is continuous,
// piecewise linear and nondecreasing). Needs n <= m <= 2^n.
double solve_c(int n, std::int64_t m, Distribution dist = Distribution::leverage);

struct SampledPair {
  SubsetMask z;
  SubsetMask complement;
};

struct PairedSample {
  int n = 0;
  double c = 0.0;
  Distribution distribution = Distribution::leverage;
  std::vector<SampledPair> pairs;
  // Pairs drawn per size s = 1..floor(n/2); entry 0 unused.
  std::vector<std::int64_t> pairs_per_size;
  // For the middle size of even n, z always has player n; the complement
  // never does. This partitions the middle layer into disjoint pairs.
  bool middle_anchor_on_z = true;
};

struct BernoulliOptions {
  Distribution distribution = Distribution::leverage;
  // Use round(E[m_s]) pairs per size instead of a Binomial draw; totals are
  // fixed by largest-remainder rounding.
  bool deterministic_counts = false;
};

// Includes each pair (z, complement(z)) independently with probability
// min(1, 2 c q(|z|)) without enumerating the 2^(n-1) - 1 pairs.
PairedSample bernoulli_sample(int n, double c, Rng& rng, const BernoulliOptions& options = {});

// Probability of a single with-replacement draw landing on a particular mask
// of size s.
double log_row_probability(int n, int s, Distribution dist);

// Uniformly random size-s subset of n players.
SubsetMask uniform_subset(int n, int s, Rng& rng);

// i.i.d. draws from `dist`. In paired mode floor(count/2) masks are drawn and
// each is immediately followed by its complement.
std::vector<SubsetMask> sample_with_replacement(int n, std::int64_t count, Distribution dist,
                                                bool paired, Rng& rng);

// Uniform integer in [0, bound) for arbitrarily large bounds.
BigInt uniform_below(const BigInt& bound, Rng& rng);

// `count` distinct uniform indices from [0, bound), in draw order.
std::vector<BigInt> distinct_indices(const BigInt& bound, std::int64_t count, Rng& rng);

}  // namespace levshap
