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
#include <vector>

#include "doctest.h"
#include "levshap/errors.hpp"
#include "levshap/estimators.hpp"
#include "levshap/exact.hpp"
#include "levshap/games.hpp"

using namespace levshap;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double sq_err(const std::vector<double>& a, const std::vector<double>& b) {
  double t = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) t += (a[i] - b[i]) * (a[i] - b[i]);
  return t;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::vector<OraclePtr> builtin_games(int n) {
  std::vector<double> coef;
  for (int i = 0; i < n; ++i) coef.push_back(0.5 * i - 1.0);
  std::vector<double> weights(static_cast<std::size_t>(n), 1.0);
  return {additive_game(coef, 0.3), voting_game(weights, n / 2.0 + 0.5), interaction_game(n, 77)};
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("config defaults and labels") {
    const auto lev = EstimatorConfig::defaults(Family::leverage, 100);
    CHECK(lev.paired);
    CHECK(lev.replacement == Replacement::without);
    CHECK(lev.solver == Solver::projected);
    CHECK(lev.label() == "leverage");
    const auto ker = EstimatorConfig::defaults(Family::kernel, 100);
    CHECK_FALSE(ker.paired);
    CHECK(ker.replacement == Replacement::with);
    CHECK(ker.solver == Solver::lagrange);
    CHECK(ker.label() == "kernel");
    auto swapped = lev;
    swapped.replacement = Replacement::with;
    CHECK(swapped.label() == "leverage[paired,with]");
    auto bad = lev;
    bad.paired = false;
    CHECK_THROWS_AS(bad.validate(10), DomainError);
    CHECK_THROWS_AS(lev.validate(101), DomainError);
    CHECK(parse_family("kernel_optimized") == Family::kernel_optimized);
    CHECK_FALSE(parse_family("permutation").has_value());
  }

  TEST_CASE("saturated budgets reproduce exact values") {
    for (int n = 4; n <= 10; ++n) {
      for (const auto& g : builtin_games(n)) {
        const auto exact = exact_shapley(*g);
        for (Family f : {Family::leverage, Family::kernel_optimized}) {
          const auto r = estimate(*g, EstimatorConfig::defaults(f, std::int64_t{1} << n, 5));
          CAPTURE(n);
          CAPTURE(to_string(f));
          CHECK(max_abs_diff(r.phi.phi, exact.phi) <= 1e-8);
          CHECK(r.evals_used == (std::int64_t{1} << n));
        }
        // Budgets above 2^n are capped.
        const auto over = estimate(*g, EstimatorConfig::defaults(Family::leverage, 10000, 1));
        CHECK(over.evals_used == (std::int64_t{1} << n));
      }
    }
  }

  TEST_CASE("additive games are exact at small budgets") {
    auto g = additive_game({3, -1, 4, 1, -5, 9, 2, 6}, 2.0);
    const std::vector<double> a{3, -1, 4, 1, -5, 9, 2, 6};
    for (Family f : {Family::leverage, Family::kernel, Family::kernel_optimized}) {
      for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto r = estimate(*g, EstimatorConfig::defaults(f, 40, seed));
        if (r.diagnostics.rank_deficient) continue;
        CHECK(max_abs_diff(r.phi.phi, a) <= 1e-6);
      }
    }
  }

  TEST_CASE("efficiency holds for every estimator and sampling variant") {
    auto g = interaction_game(11, 6);
    const double total = g->eval(SubsetMask::full(11)) - g->eval(SubsetMask(11));
    std::vector<EstimatorConfig> configs = ablation_cells(60);
    configs.push_back(EstimatorConfig::defaults(Family::kernel_optimized, 60));
    auto det = EstimatorConfig::defaults(Family::leverage, 60);
    det.deterministic_counts = true;
    configs.push_back(det);
    auto lag = EstimatorConfig::defaults(Family::leverage, 60);
    lag.solver = Solver::lagrange;
    configs.push_back(lag);
    for (auto c : configs) {
      for (std::uint64_t seed = 0; seed < 10; ++seed) {
        c.seed = seed;
        const auto r = estimate(*g, c);
        const double sum = std::accumulate(r.phi.phi.begin(), r.phi.phi.end(), 0.0);
        CHECK(std::abs(sum - total) <= 1e-9 * std::max(1.0, std::abs(total)));
      }
    }
  }

  TEST_CASE("evaluation accounting") {
    auto g = interaction_game(10, 0);
    double total = 0.0;
    const int runs = 2000;
    for (int seed = 0; seed < runs; ++seed) {
      const auto r = leverage_shap(*g, EstimatorConfig::defaults(Family::leverage, 100, static_cast<std::uint64_t>(seed)));
      std::int64_t rows = 0;
      for (auto k : r.rows_per_size) rows += k;
      CHECK(r.evals_used == rows + 2);
      CHECK(rows % 2 == 0);
      total += static_cast<double>(r.evals_used);
    }
    CHECK(std::abs(total / runs - 100.0) <= 2.0);
    CHECK(g->eval_count() == static_cast<std::int64_t>(total));

    auto det = EstimatorConfig::defaults(Family::leverage, 100, 3);
    det.deterministic_counts = true;
    CHECK(leverage_shap(*g, det).evals_used == 100);

    for (Family f : {Family::kernel, Family::kernel_optimized}) {
      const auto r = estimate(*g, EstimatorConfig::defaults(f, 100, 1));
      CHECK(r.evals_used <= 100);
    }
  }

  TEST_CASE("optimized kernel enumerates the outer levels") {
    auto g = interaction_game(20, 1);
    const auto r = optimized_kernel_shap(*g, EstimatorConfig::defaults(Family::kernel_optimized, 200, 0));
    CHECK(r.rows_per_size[1] == 20);
    CHECK(r.rows_per_size[19] == 20);
    CHECK(r.evals_used <= 200);
    CHECK(r.evals_used >= 198);
  }

  TEST_CASE("runs are reproducible and seed-sensitive") {
    auto g = interaction_game(12, 4);
    for (Family f : {Family::leverage, Family::kernel, Family::kernel_optimized}) {
      const auto a = estimate(*g, EstimatorConfig::defaults(f, 120, 8));
      const auto b = estimate(*g, EstimatorConfig::defaults(f, 120, 8));
      const auto c = estimate(*g, EstimatorConfig::defaults(f, 120, 9));
      CHECK(a.phi.phi == b.phi.phi);
      CHECK(a.phi.phi != c.phi.phi);
    }
  }

  TEST_CASE("leverage beats kernel at m = 10n") {
    auto g = interaction_game(10, 0);
    const auto exact = exact_shapley(*g);
    std::vector<double> lev, ker;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      lev.push_back(sq_err(estimate(*g, EstimatorConfig::defaults(Family::leverage, 100, seed)).phi.phi, exact.phi));
      ker.push_back(sq_err(estimate(*g, EstimatorConfig::defaults(Family::kernel, 100, seed)).phi.phi, exact.phi));
    }
    CHECK(median(lev) < median(ker));
  }

  TEST_CASE("noisy endpoints are used consistently") {
    auto base = interaction_game(8, 2);
    auto noisy = with_noise(base, {0.5, 3});
    const auto r = leverage_shap(*noisy, EstimatorConfig::defaults(Family::leverage, 256, 0));
    const double sum = std::accumulate(r.phi.phi.begin(), r.phi.phi.end(), 0.0);
    CHECK(sum == doctest::Approx(r.phi.v1_minus_v0).epsilon(1e-12));
  }

  TEST_CASE("ablation grid") {
    const auto cells = ablation_cells(80);
    CHECK(cells.size() == 6);
    int with = 0;
    for (const auto& c : cells) {
      CHECK_NOTHROW(c.validate(8));
      with += c.replacement == Replacement::with;
    }
    CHECK(with == 4);
    auto g = interaction_game(8, 5);
    const auto rows = ablation_grid(*g, 80, {1, 2, 3});
    CHECK(rows.size() == 18);
    const auto again = ablation_grid(*g, 80, {1, 2, 3});
    for (std::size_t k = 0; k < rows.size(); ++k) {
      REQUIRE(rows[k].result.has_value());
      CHECK(rows[k].result->phi.phi == again[k].result->phi.phi);
    }
    CHECK(rows[0].config.label() == "leverage[paired,with]");
    CHECK(rows[0].result->config.replacement == Replacement::with);
    CHECK_FALSE(rows[0].result->c.has_value());
  }

  TEST_CASE("budgets below n are refused before evaluating") {
    auto g = interaction_game(10, 0);
    CHECK_THROWS_AS(estimate(*g, EstimatorConfig::defaults(Family::leverage, 9)), DomainError);
    CHECK(g->eval_count() == 0);
  }

  TEST_CASE("large n") {
    auto g = additive_game(std::vector<double>(200, 0.01));
    const auto r = leverage_shap(*g, EstimatorConfig::defaults(Family::leverage, 2000, 1));
    CHECK(max_abs_diff(r.phi.phi, std::vector<double>(200, 0.01)) <= 1e-8);
  }
}
