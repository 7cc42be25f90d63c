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

#include "levshap/regression.hpp"

#include <cmath>
#include <numeric>

#include "levshap/errors.hpp"
#include "levshap/kernels.hpp"

namespace levshap {

namespace {

// Moves phi onto the hyperplane <phi, 1> = delta; removes rounding drift only.
void snap_to_constraint(std::vector<double>& phi, double delta) {
  const double sum = std::accumulate(phi.begin(), phi.end(), 0.0);
  const double shift = (delta - sum) / static_cast<double>(phi.size());
  for (double& p : phi) p += shift;
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// LDLT's own rcond() treats zero pivots as a pseudo-inverse would and can miss
// exact singularity, so the pivot spread caps it.
double ldlt_rcond(const Eigen::LDLT<Eigen::MatrixXd>& ldlt) {
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return 0.0;
  const auto d = ldlt.vectorD().cwiseAbs();
  const double spread = d.maxCoeff() > 0.0 ? d.minCoeff() / d.maxCoeff() : 0.0;
  return std::min(ldlt.rcond(), spread);
}

int numerical_rank(const Eigen::MatrixXd& m) {
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m);
  return static_cast<int>(cod.rank());
}

}  // namespace

void SampledSystem::add(const SubsetMask& mask, double weight, double value) {
  rows.push_back(mask);
  weights.push_back(weight);
  values.push_back(value);
}

std::vector<double> SampledSystem::projected_targets() const {
  const double delta = v1_minus_v0() / static_cast<double>(n);
  std::vector<double> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out[k] = values[k] - v0 - static_cast<double>(rows[k].popcount()) * delta;
  }
  return out;
}

std::vector<double> SampledSystem::raw_targets() const {
  std::vector<double> out(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) out[k] = values[k] - v0;
  return out;
}

void SampledSystem::validate() const {
  if (n < 2) throw DomainError("sampled system: need n >= 2");
  if (rows.empty()) throw DomainError("sampled system: no rows");
  if (weights.size() != rows.size() || values.size() != rows.size()) {
    throw DomainError("sampled system: rows, weights and values differ in length");
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const int pc = rows[k].popcount();
    if (rows[k].size() != n || pc == 0 || pc == n) {
      throw DomainError("sampled system: row " + std::to_string(k) +
                        " is not a proper nonempty subset");
    }
    if (!(weights[k] > 0.0) || !std::isfinite(weights[k])) {
      throw DomainError("sampled system: row weights must be positive and finite");
    }
  }
}

SolveResult solve_projected(const SampledSystem& system) {
  system.validate();
  const int n = system.n;
  const auto targets = system.projected_targets();
  const auto ne = kernels::projected_normal_equations(system.rows, system.weights, targets);

  SolveResult result;
  auto& diag = result.diagnostics;
  diag.solver = "projected";
  diag.rows = static_cast<int>(system.rows.size());

  const double trace = ne.gram.trace();
  if (!(trace > 0.0)) {
    throw SolverError("projected solve: Gram matrix is zero", 0, 0.0);
  }
  const double tau = trace / static_cast<double>(n - 1);
  Eigen::MatrixXd augmented = ne.gram;
  augmented.array() += tau / static_cast<double>(n);

  Eigen::LDLT<Eigen::MatrixXd> ldlt(augmented);
  const double rcond = ldlt_rcond(ldlt);
  diag.rcond = rcond;
  Eigen::VectorXd x;
  if (rcond >= kSingularRcond) {
    x = ldlt.solve(ne.rhs);
    diag.rank = n - 1;
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ne.gram);
    diag.rank = static_cast<int>(cod.rank());
    if (diag.rank == 0) {
      throw SolverError("projected solve: sampled system has rank 0", 0, rcond);
    }
    x = cod.solve(ne.rhs);
    x.array() -= x.mean();
    diag.rank_deficient = true;
  }

  const double delta = system.v1_minus_v0();
  result.phi.v1_minus_v0 = delta;
  result.phi.phi = to_std(x);
  for (double& p : result.phi.phi) p += delta / static_cast<double>(n);
  snap_to_constraint(result.phi.phi, delta);
  return result;
}

bool lagrange_solvable(int n, std::span<const SubsetMask> rows, std::span<const double> weights) {
  if (rows.empty()) return false;
  std::vector<double> zeros(rows.size(), 0.0);
  const auto ne = kernels::raw_normal_equations(rows, weights, zeros);
  if (ne.gram.rows() != n) return false;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(ne.gram);
  return ldlt_rcond(ldlt) >= kSingularRcond;
}

SolveResult solve_lagrange(const SampledSystem& system) {
  system.validate();
  const int n = system.n;
  const auto targets = system.raw_targets();
  const auto ne = kernels::raw_normal_equations(system.rows, system.weights, targets);

  SolveResult result;
  auto& diag = result.diagnostics;
  diag.solver = "lagrange";
  diag.rows = static_cast<int>(system.rows.size());

  Eigen::LDLT<Eigen::MatrixXd> ldlt(ne.gram);
  diag.rcond = ldlt_rcond(ldlt);
  if (diag.rcond < kSingularRcond) {
    const int rank = numerical_rank(ne.gram);
    throw SolverError("lagrange solve: sampled Gram matrix is singular (rank " +
                          std::to_string(rank) + " of " + std::to_string(n) + ")",
                      rank, diag.rcond);
  }
  diag.rank = n;

  const double delta = system.v1_minus_v0();
  const Eigen::VectorXd h_g = ldlt.solve(ne.rhs);
  const Eigen::VectorXd h_1 = ldlt.solve(Eigen::VectorXd::Ones(n));
  const double mu = (h_g.sum() - delta) / h_1.sum();
  const Eigen::VectorXd x = h_g - mu * h_1;

  result.phi.v1_minus_v0 = delta;
  result.phi.phi = to_std(x);
  snap_to_constraint(result.phi.phi, delta);
  return result;
}

}  // namespace levshap
