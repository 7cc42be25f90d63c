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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "doctest.h"
#include "levshap/combinatorics.hpp"
#include "levshap/errors.hpp"
#include "levshap/exact.hpp"
#include "levshap/games.hpp"
#include "levshap/regression.hpp"
#include "levshap/sampling.hpp"

using namespace levshap;

namespace {

SampledSystem full_sampled(ValueOracle& g) {
  const int n = g.num_players();
  SampledSystem sys;
  sys.n = n;
  sys.v0 = g.eval(SubsetMask(n));
  sys.v1 = g.eval(SubsetMask::full(n));
  for (std::uint64_t k = 1; k + 1 < (std::uint64_t{1} << n); ++k) {
    const auto z = SubsetMask::from_index(n, k);
    sys.add(z, shapley_weight(n, z.popcount()), g.eval(z));
  }
  return sys;
}

SampledSystem random_sampled(ValueOracle& g, int rows, std::uint64_t seed) {
  const int n = g.num_players();
  Rng rng(seed);
  SampledSystem sys;
  sys.n = n;
  sys.v0 = g.eval(SubsetMask(n));
  sys.v1 = g.eval(SubsetMask::full(n));
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (const auto& z : sample_with_replacement(n, rows, Distribution::kernel, true, rng)) {
    sys.add(z, shapley_weight(n, z.popcount()) * u(rng), g.eval(z));
  }
  return sys;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double efficiency_residual(const ShapleyVector& phi) {
  const double sum = std::accumulate(phi.phi.begin(), phi.phi.end(), 0.0);
  return std::abs(sum - phi.v1_minus_v0) / std::max(1.0, std::abs(phi.v1_minus_v0));
}

}  // namespace

TEST_SUITE("regression") {
  TEST_CASE("full sample reproduces exact values with both solvers") {
    for (int n = 2; n <= 10; ++n) {
      auto g = interaction_game(n, static_cast<std::uint64_t>(40 + n));
      const auto exact = exact_shapley(*g);
      const SampledSystem sys = full_sampled(*g);
      const auto p = solve_projected(sys);
      const auto l = solve_lagrange(sys);
      CHECK(max_abs_diff(p.phi.phi, exact.phi) <= 1e-8);
      CHECK(max_abs_diff(l.phi.phi, exact.phi) <= 1e-8);
      CHECK(max_abs_diff(l.phi.phi, exact_constrained_regression(build_full_system(*g)).phi) <= 1e-8);
      CHECK_FALSE(p.diagnostics.rank_deficient);
    }
  }

  TEST_CASE("both solvers agree on a sampled system") {
    auto g = interaction_game(9, 2);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SampledSystem sys = random_sampled(*g, 60, seed);
      const auto p = solve_projected(sys);
      const auto l = solve_lagrange(sys);
      CHECK(max_abs_diff(p.phi.phi, l.phi.phi) <= 1e-6);
      CHECK(efficiency_residual(p.phi) <= 1e-9);
      CHECK(efficiency_residual(l.phi) <= 1e-9);
    }
  }

  TEST_CASE("additive games are recovered exactly") {
    auto g = additive_game({0.5, -1, 2, 7, 3, -4}, 1.25);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SampledSystem sys = random_sampled(*g, 24, seed);
      const std::vector<double> a{0.5, -1, 2, 7, 3, -4};
      CHECK(max_abs_diff(solve_projected(sys).phi.phi, a) <= 1e-8);
      CHECK(max_abs_diff(solve_lagrange(sys).phi.phi, a) <= 1e-8);
    }
  }

  TEST_CASE("rank-deficient samples fall back to the minimum-norm solution") {
    auto g = interaction_game(6, 1);
    SampledSystem sys;
    sys.n = 6;
    sys.v0 = g->eval(SubsetMask(6));
    sys.v1 = g->eval(SubsetMask::full(6));
    for (const char* s : {"100000", "011111"}) {
      const auto z = SubsetMask::from_string(s);
      sys.add(z, 1.0, g->eval(z));
    }
    const auto p = solve_projected(sys);
    CHECK(p.diagnostics.rank_deficient);
    CHECK(p.diagnostics.rank == 1);
    CHECK(efficiency_residual(p.phi) <= 1e-9);
    // The unsampled players are indistinguishable, so they share one value.
    for (int i = 2; i < 6; ++i) CHECK(p.phi.phi[static_cast<std::size_t>(i)] == doctest::Approx(p.phi.phi[1]));
    CHECK_THROWS_AS(solve_lagrange(sys), SolverError);
    CHECK_FALSE(lagrange_solvable(6, sys.rows, sys.weights));
  }

  TEST_CASE("invalid systems are rejected") {
    SampledSystem empty;
    empty.n = 4;
    CHECK_THROWS_AS(solve_projected(empty), DomainError);
    SampledSystem bad = empty;
    bad.add(SubsetMask::full(4), 1.0, 0.0);
    CHECK_THROWS_AS(solve_projected(bad), DomainError);
    SampledSystem neg = empty;
    neg.add(SubsetMask::from_string("1000"), -1.0, 0.0);
    CHECK_THROWS_AS(solve_lagrange(neg), DomainError);
  }

  TEST_CASE("sampled solutions never beat the full-system optimum") {
    for (int n = 3; n <= 8; ++n) {
      auto g = interaction_game(n, 9);
      const FullSystem full = build_full_system(*g);
      const auto best = exact_constrained_regression(full);
      const double best_obj = projected_objective(full, best.phi);
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto p = solve_projected(random_sampled(*g, 4 * n, seed));
        CHECK(projected_objective(full, p.phi.phi) >= best_obj - 1e-10);
      }
    }
  }

  TEST_CASE("error norm identity holds for solver outputs") {
    for (int n = 4; n <= 12; n += 2) {
      auto g = interaction_game(n, 3);
      const auto exact = exact_shapley(*g);
      const FullSystem design = build_design(n);
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto p = solve_projected(random_sampled(*g, 3 * n, seed));
        CHECK(norm_identity_gap(design, p.phi.phi, exact.phi) <= 1e-8);
      }
    }
  }
}
