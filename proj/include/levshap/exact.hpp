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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levshap/games.hpp"
#include "levshap/mask.hpp"

namespace levshap {

struct ShapleyVector {
  std::vector<double> phi;
  double v1_minus_v0 = 0.0;

  int n() const { return static_cast<int>(phi.size()); }
  // |<phi, 1> - (v(1) - v(0))|.
  double efficiency_gap() const;
};

// Maximum player count for brute-force Shapley values (2^n evaluations).
inline constexpr int kMaxExactPlayers = 22;
// Maximum player count for the explicit (2^n - 2) x n regression system.
inline constexpr int kMaxFullSystemPlayers = 15;

// Brute-force Shapley values: every v(S) is evaluated exactly once, then both
// marginal terms are accumulated per player. Throws CostError above max_n.
ShapleyVector exact_shapley(ValueOracle& oracle, int max_n = kMaxExactPlayers);

// Row weight function w(n, s). Defaults to the Shapley kernel weight.
using WeightFunction = std::function<double(int n, int s)>;

// Explicit regression system over all masks with 0 < |z| < n, rows ordered by
// size ascending and lexicographically (combo rank) within a size.
//   Z_z = sqrt(w(|z|)) z^T          y_z = sqrt(w(|z|)) (v(z) - v(0))
//   A   = Z P, P = I - 11^T/n       b   = y - Z 1 (v(1) - v(0)) / n
struct FullSystem {
  int n = 0;
  std::vector<SubsetMask> rows;
  std::vector<double> row_weights;  // w(|z|) per row
  Eigen::MatrixXd Z;
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
  Eigen::VectorXd b;
  double v0 = 0.0;
  double v1 = 0.0;
  std::vector<double> values;  // v(z) per row

  double v1_minus_v0() const { return v1 - v0; }
};

// Z and A only (targets left empty); used by the identity checks, which do not
// depend on v.
FullSystem build_design(int n, const WeightFunction& weight = {});

FullSystem build_full_system(ValueOracle& oracle, const WeightFunction& weight = {});

// Projection route: argmin ||A x - b|| via (A^T A)^+ = n P, plus 1 (v1-v0)/n.
ShapleyVector solve_full_projection(const FullSystem& system);
// Lagrange-multiplier route on Z, y directly.
ShapleyVector solve_full_lagrange(const FullSystem& system);
// Both routes; throws NumericalError if they disagree by more than 1e-8.
ShapleyVector exact_constrained_regression(const FullSystem& system);

// ||Z x - y||^2 and ||A x - b||^2.
double regression_objective(const FullSystem& system, std::span<const double> x);
double projected_objective(const FullSystem& system, std::span<const double> x);

// gamma = ||A phi - b||^2 / ||A phi||^2 for the exact minimizer phi. Also checks
// ||A phi||^2 = (||phi||^2 - (v1-v0)^2/n)/n to 1e-8 relative (NumericalError
// otherwise). Throws DomainError when ||A phi|| = 0 (gamma undefined).
double gamma_of(const FullSystem& system, const ShapleyVector& phi);

struct GammaGame {
  OraclePtr oracle;
  double achieved_gamma = 0.0;
  ShapleyVector phi;  // Shapley values implied by the construction
  FullSystem system;
  std::string metadata;
};

// b = u + sqrt(gamma) r with u a unit vector in range(A) and r a unit vector
// orthogonal to it, both from seeded Gaussian draws. v is backed out with
// v(0) = 0 and v(1) = 1. Needs n <= kMaxFullSystemPlayers.
GammaGame make_gamma_game(int n, double gamma_target, std::uint64_t seed);

// ||A^T A - P/n||_F.
double gram_deviation(const FullSystem& design);
// max_z |[A (A^T A)^+ A^T]_zz - 1/C(n,|z|)|, pseudo-inverse via SVD.
double leverage_score_deviation(const FullSystem& design);
// |n ||A d||^2 - ||d||^2| / max(||d||^2, tiny) with d = a - b.
double norm_identity_gap(const FullSystem& design, std::span<const double> a,
                           std::span<const double> b);

}  // namespace levshap
