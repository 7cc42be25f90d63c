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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "levshap/combinatorics.hpp"
#include "levshap/errors.hpp"
#include "levshap/exact.hpp"
#include "levshap/games.hpp"

using namespace levshap;

namespace {

// Average marginal contribution over all n! orderings.
std::vector<double> permutation_average(ValueOracle& g) {
  const int n = g.num_players();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  double count = 0.0;
  do {
    SubsetMask s(n);
    double prev = g.eval(s);
    for (int p : order) {
      s.set(p);
      const double cur = g.eval(s);
      phi[static_cast<std::size_t>(p)] += cur - prev;
      prev = cur;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& x : phi) x /= count;
  return phi;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_SUITE("exact") {
  TEST_CASE("brute force equals the permutation average") {
    for (int n = 2; n <= 7; ++n) {
      auto g = interaction_game(n, static_cast<std::uint64_t>(n));
      const auto phi = exact_shapley(*g);
      CHECK(max_abs_diff(phi.phi, permutation_average(*g)) <= 1e-12);
      CHECK(phi.efficiency_gap() <= 1e-12);
    }
    auto glove = glove_game();
    CHECK(max_abs_diff(exact_shapley(*glove).phi, permutation_average(*glove)) <= 1e-14);
  }

  TEST_CASE("brute force uses exactly 2^n evaluations and refuses large n") {
    auto g = interaction_game(9, 1);
    exact_shapley(*g);
    CHECK(g->eval_count() == 512);
    auto big = interaction_game(23, 0);
    CHECK_THROWS_AS(exact_shapley(*big), CostError);
    CHECK_THROWS_AS(exact_shapley(*g, 8), CostError);
  }

  TEST_CASE("constrained regression reproduces Shapley values") {
    for (int n = 2; n <= 10; ++n) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto g = interaction_game(n, seed + 17);
        const auto brute = exact_shapley(*g);
        const FullSystem sys = build_full_system(*g);
        const auto reg = exact_constrained_regression(sys);
        CHECK(max_abs_diff(brute.phi, reg.phi) <= 1e-8);
        CHECK(max_abs_diff(solve_full_lagrange(sys).phi, solve_full_projection(sys).phi) <= 1e-8);
      }
    }
  }

  TEST_CASE("full system layout") {
    const FullSystem d = build_design(4);
    CHECK(d.rows.size() == 14);
    CHECK(d.rows.front().to_string() == "1000");
    CHECK(d.rows.back().to_string() == "0111");
    CHECK(d.Z(0, 0) == doctest::Approx(std::sqrt(shapley_weight(4, 1))));
    CHECK(d.A.rows() == 14);
  }

  TEST_CASE("design identities") {
    for (int n = 2; n <= 12; ++n) CHECK(gram_deviation(build_design(n)) <= 1e-10);
    for (int n = 2; n <= 9; ++n) CHECK(leverage_score_deviation(build_design(n)) <= 1e-10);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    for (int n = 2; n <= 10; ++n) {
      const FullSystem d = build_design(n);
      std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)] = normal(rng);
        b[static_cast<std::size_t>(i)] = normal(rng);
      }
      const double sa = std::accumulate(a.begin(), a.end(), 0.0);
      const double sb = std::accumulate(b.begin(), b.end(), 0.0);
      for (double& x : b) x += (sa - sb) / n;
      CHECK(norm_identity_gap(d, a, b) <= 1e-8);
    }
    // A direction with a component along 1 breaks the identity.
    const FullSystem d = build_design(5);
    const std::vector<double> a{1, 1, 1, 1, 1}, z{0, 0, 0, 0, 0};
    CHECK(norm_identity_gap(d, a, z) > 0.5);
  }

  TEST_CASE("corrupted weights break the equivalence") {
    auto g = interaction_game(6, 4);
    const auto brute = exact_shapley(*g);
    const FullSystem sys = build_full_system(
        *g, [](int n, int s) { return shapley_weight(n, s) * (1.0 + 0.25 * s); });
    CHECK(max_abs_diff(brute.phi, solve_full_lagrange(sys).phi) > 1e-6);
  }

  TEST_CASE("objectives agree on the constraint hyperplane") {
    auto g = interaction_game(7, 5);
    const FullSystem sys = build_full_system(*g);
    const auto phi = exact_shapley(*g);
    std::vector<double> x = phi.phi;
    x[0] += 0.3;
    x[1] -= 0.3;
    CHECK(regression_objective(sys, x) == doctest::Approx(projected_objective(sys, x)).epsilon(1e-10));
    CHECK(regression_objective(sys, x) > regression_objective(sys, phi.phi));
  }

  TEST_CASE("gamma games hit their target") {
    for (double target : {0.0, 0.1, 1.0, 10.0}) {
      const GammaGame g = make_gamma_game(8, target, 3);
      CHECK(g.achieved_gamma == doctest::Approx(target).epsilon(1e-8).scale(1.0));
      const auto brute = exact_shapley(*g.oracle);
      CHECK(max_abs_diff(brute.phi, g.phi.phi) <= 1e-9);
      CHECK(g.oracle->eval(SubsetMask(8)) == 0.0);
      CHECK(g.oracle->eval(SubsetMask::full(8)) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(make_gamma_game(8, -1.0, 0), DomainError);
    CHECK_THROWS_AS(make_gamma_game(16, 1.0, 0), CostError);
  }

  TEST_CASE("gamma is undefined for a uniform split") {
    auto g = additive_game({1, 1, 1, 1});
    CHECK_THROWS_AS(gamma_of(build_full_system(*g), exact_shapley(*g)), DomainError);
  }
}
