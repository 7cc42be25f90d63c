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

#include <string>
#include <vector>

#include "levshap/exact.hpp"
#include "levshap/mask.hpp"

namespace levshap {

struct WeightedSample {
  SubsetMask mask;
  double regression_weight = 0.0;
};

// Subsampled regression problem. Rows carry their regression weight and the
// observed v(z); every mask has 0 < popcount < n.
struct SampledSystem {
  int n = 0;
  std::vector<SubsetMask> rows;
  std::vector<double> weights;
  std::vector<double> values;
  double v0 = 0.0;
  double v1 = 0.0;

  double v1_minus_v0() const { return v1 - v0; }
  void add(const SubsetMask& mask, double weight, double value);
  // b'_z = v(z) - v0 - |z| (v1 - v0) / n.
  std::vector<double> projected_targets() const;
  // y'_z = v(z) - v0.
  std::vector<double> raw_targets() const;
  // Throws DomainError on empty rows, bad masks or nonpositive weights.
  void validate() const;
};

struct SolveDiagnostics {
  std::string solver;
  int rows = 0;
  int rank = 0;
  double rcond = 0.0;
  bool rank_deficient = false;
};

struct SolveResult {
  ShapleyVector phi;
  SolveDiagnostics diagnostics;
};

// Reciprocal condition below which a factorization is treated as singular.
inline constexpr double kSingularRcond = 1e-12;

// min ||W^{1/2}(Z' P x - b')|| over x orthogonal to 1, then shifted by
// 1 (v1 - v0)/n. Solves (G + tau 11^T/n) x = r with G = P Z'^T W Z' P and
// tau = tr(G)/(n-1); a singular G falls back to the minimum-norm complete
// orthogonal decomposition solve, projected back onto 1-perp and flagged
// rank_deficient. Throws SolverError only when G is zero.
SolveResult solve_projected(const SampledSystem& system);

// x = H^{-1}(g - mu 1) with H = Z'^T W Z', g = Z'^T W y' and mu fixed by
// <x, 1> = v1 - v0. Throws SolverError when H is singular.
SolveResult solve_lagrange(const SampledSystem& system);

// Whether the Gram matrix the given solver needs is numerically nonsingular;
// needs only the masks and weights.
bool lagrange_solvable(int n, std::span<const SubsetMask> rows, std::span<const double> weights);

}  // namespace levshap
