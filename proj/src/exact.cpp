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

#include "levshap/exact.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>

#include "levshap/combinatorics.hpp"
#include "levshap/errors.hpp"
#include "levshap/kernels.hpp"

namespace levshap {

namespace {

constexpr std::uint64_t kEvalChunk = std::uint64_t{1} << 16;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

ShapleyVector to_shapley(const Eigen::VectorXd& x, double v1_minus_v0) {
  return ShapleyVector{std::vector<double>(x.data(), x.data() + x.size()), v1_minus_v0};
}

void check_full_system_size(int n) {
  if (n < 2) throw DomainError("full system: need n >= 2");
  if (n > kMaxFullSystemPlayers) {
    throw CostError("full system: n=" + std::to_string(n) + " needs 2^" +
                    std::to_string(n) + "-2 rows; limit is n=" +
                    std::to_string(kMaxFullSystemPlayers));
  }
}

}  // namespace

double ShapleyVector::efficiency_gap() const {
  double total = 0.0;
  for (double p : phi) total += p;
  return std::abs(total - v1_minus_v0);
}

ShapleyVector exact_shapley(ValueOracle& oracle, int max_n) {
  const int n = oracle.num_players();
  if (n > max_n || n > kMaxExactPlayers) {
    throw CostError("exact_shapley: n=" + std::to_string(n) + " needs 2^" +
                    std::to_string(n) + " value evaluations; refusing above n=" +
                    std::to_string(std::min(max_n, kMaxExactPlayers)));
  }
  const std::uint64_t total = std::uint64_t{1} << n;
  std::vector<double> values(total);
  std::vector<SubsetMask> batch;
  for (std::uint64_t start = 0; start < total; start += kEvalChunk) {
    const std::uint64_t end = std::min(total, start + kEvalChunk);
    batch.clear();
    for (std::uint64_t k = start; k < end; ++k) batch.push_back(SubsetMask::from_index(n, k));
    const auto v = oracle.eval_batch(batch);
    std::copy(v.begin(), v.end(), values.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return ShapleyVector{kernels::shapley_from_table(n, values), values[total - 1] - values[0]};
}

FullSystem build_design(int n, const WeightFunction& weight) {
  check_full_system_size(n);
  FullSystem sys;
  sys.n = n;
  for (int s = 1; s < n; ++s) {
    for_each_combination(n, s, [&](const SubsetMask& m) { sys.rows.push_back(m); });
  }
  const auto rows = static_cast<Eigen::Index>(sys.rows.size());
  sys.row_weights.resize(sys.rows.size());
  std::vector<double> size_weight(static_cast<std::size_t>(n), 0.0);
  for (int s = 1; s < n; ++s) {
    size_weight[static_cast<std::size_t>(s)] = weight ? weight(n, s) : shapley_weight(n, s);
  }
  sys.Z.setZero(rows, n);
  sys.A.resize(rows, n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& mask = sys.rows[static_cast<std::size_t>(r)];
    const int s = mask.popcount();
    const double w = size_weight[static_cast<std::size_t>(s)];
    sys.row_weights[static_cast<std::size_t>(r)] = w;
    const double root = std::sqrt(w);
    for (int i = 0; i < n; ++i) {
      const double zi = mask.test(i) ? root : 0.0;
      sys.Z(r, i) = zi;
      sys.A(r, i) = zi - root * s / n;
    }
  }
  return sys;
}

FullSystem build_full_system(ValueOracle& oracle, const WeightFunction& weight) {
  const int n = oracle.num_players();
  FullSystem sys = build_design(n, weight);
  std::vector<SubsetMask> batch;
  batch.reserve(sys.rows.size() + 2);
  batch.push_back(SubsetMask(n));
  batch.push_back(SubsetMask::full(n));
  batch.insert(batch.end(), sys.rows.begin(), sys.rows.end());
  const auto v = oracle.eval_batch(batch);
  sys.v0 = v[0];
  sys.v1 = v[1];
  sys.values.assign(v.begin() + 2, v.end());
  const auto rows = static_cast<Eigen::Index>(sys.rows.size());
  sys.y.resize(rows);
  sys.b.resize(rows);
  const double shift = (sys.v1 - sys.v0) / n;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    const double root = std::sqrt(sys.row_weights[ur]);
    const int s = sys.rows[ur].popcount();
    sys.y[r] = root * (sys.values[ur] - sys.v0);
    sys.b[r] = sys.y[r] - root * s * shift;
  }
  return sys;
}

ShapleyVector solve_full_projection(const FullSystem& sys) {
  if (sys.y.size() == 0) throw DomainError("solve_full_projection: system has no targets");
  const int n = sys.n;
  // (A^T A)^+ = n P.
  Eigen::VectorXd atb = sys.A.transpose() * sys.b;
  Eigen::VectorXd x = n * (atb.array() - atb.mean()).matrix();
  x.array() += sys.v1_minus_v0() / n;
  return to_shapley(x, sys.v1_minus_v0());
}

ShapleyVector solve_full_lagrange(const FullSystem& sys) {
  if (sys.y.size() == 0) throw DomainError("solve_full_lagrange: system has no targets");
  const int n = sys.n;
  const Eigen::MatrixXd h = sys.Z.transpose() * sys.Z;
  const Eigen::VectorXd g = sys.Z.transpose() * sys.y;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) {
    throw SolverError("solve_full_lagrange: Z^T Z is singular", -1, ldlt.rcond());
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
  const Eigen::VectorXd hinv_g = ldlt.solve(g);
  const Eigen::VectorXd hinv_1 = ldlt.solve(ones);
  const double half_lambda = (hinv_g.sum() - sys.v1_minus_v0()) / hinv_1.sum();
  const Eigen::VectorXd x = hinv_g - half_lambda * hinv_1;
  return to_shapley(x, sys.v1_minus_v0());
}

ShapleyVector exact_constrained_regression(const FullSystem& sys) {
  auto projected = solve_full_projection(sys);
  const auto lagrange = solve_full_lagrange(sys);
  double gap = 0.0;
  double scale = 1.0;
  for (std::size_t i = 0; i < projected.phi.size(); ++i) {
    gap = std::max(gap, std::abs(projected.phi[i] - lagrange.phi[i]));
    scale = std::max(scale, std::abs(projected.phi[i]));
  }
  if (gap > 1e-8 * scale) {
    std::ostringstream msg;
    msg << "exact_constrained_regression: projection and Lagrange routes differ by " << gap;
    throw NumericalError(msg.str());
  }
  return projected;
}

double regression_objective(const FullSystem& sys, std::span<const double> x) {
  return (sys.Z * as_vector(x) - sys.y).squaredNorm();
}

double projected_objective(const FullSystem& sys, std::span<const double> x) {
  return (sys.A * as_vector(x) - sys.b).squaredNorm();
}

double gamma_of(const FullSystem& sys, const ShapleyVector& phi) {
  const Eigen::VectorXd x = as_vector(phi.phi);
  const Eigen::VectorXd a_phi = sys.A * x;
  const double signal = a_phi.squaredNorm();
  const double n = sys.n;
  const double d = sys.v1_minus_v0();
  const double predicted = (x.squaredNorm() - d * d / n) / n;
  const double scale = std::max(x.squaredNorm() / n, 1e-300);
  if (std::abs(signal - predicted) > 1e-8 * std::max(std::abs(signal), 1e-12 * scale)) {
    std::ostringstream msg;
    msg << "gamma_of: ||A phi||^2 = " << signal << " but (||phi||^2 - (v1-v0)^2/n)/n = "
        << predicted;
    throw NumericalError(msg.str());
  }
  if (signal <= 1e-28 * std::max(1.0, sys.b.squaredNorm())) {
    throw DomainError("gamma_of: ||A phi|| = 0, gamma is undefined for this game");
  }
  return (a_phi - sys.b).squaredNorm() / signal;
}

GammaGame make_gamma_game(int n, double gamma_target, std::uint64_t seed) {
  if (!(gamma_target >= 0.0) || !std::isfinite(gamma_target)) {
    throw DomainError("make_gamma_game: gamma_target must be finite and >= 0");
  }
  check_full_system_size(n);
  const FullSystem design = build_design(n);
  const auto rows = design.A.rows();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&] {
    Eigen::VectorXd g(rows);
    for (Eigen::Index r = 0; r < rows; ++r) g[r] = normal(rng);
    return g;
  };
  // Orthogonal projector onto range(A) is A (A^T A)^+ A^T = n A A^T.
  auto project = [&](const Eigen::VectorXd& g) -> Eigen::VectorXd {
    return n * (design.A * (design.A.transpose() * g));
  };
  Eigen::VectorXd u = project(gaussian());
  Eigen::VectorXd g2 = gaussian();
  Eigen::VectorXd r = g2 - project(g2);
  const double u_norm = u.norm();
  const double r_norm = r.norm();
  if (u_norm < 1e-12) throw DomainError("make_gamma_game: span component vanished");
  if (gamma_target > 0.0 && r_norm < 1e-12) {
    throw DomainError("make_gamma_game: residual component vanished; cannot reach gamma > 0");
  }
  u /= u_norm;
  if (r_norm > 0.0) r /= r_norm;
  const Eigen::VectorXd b = u + std::sqrt(gamma_target) * r;

  // v(z) = v(0) + b_z / sqrt(w(|z|)) + |z| (v(1) - v(0)) / n with v(0)=0, v(1)=1.
  std::vector<double> table(std::size_t{1} << n, 0.0);
  table.back() = 1.0;
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto& mask = design.rows[static_cast<std::size_t>(k)];
    const double root = std::sqrt(design.row_weights[static_cast<std::size_t>(k)]);
    table[mask.to_index()] = b[k] / root + static_cast<double>(mask.popcount()) / n;
  }

  GammaGame game;
  std::ostringstream label;
  label << "gamma(" << n << "," << gamma_target << "," << seed << ")";
  game.oracle = table_game(n, std::move(table), label.str());
  game.system = build_full_system(*game.oracle);
  game.phi = solve_full_projection(game.system);
  game.achieved_gamma = gamma_of(game.system, game.phi);
  std::ostringstream meta;
  meta << "u = P_range(A) g1, r = (I - P_range(A)) g2, g1, g2 ~ N(0, I) from mt19937_64(" << seed
       << "), both normalized; b = u + sqrt(gamma) r; v(0)=0, v(1)=1";
  game.metadata = meta.str();
  return game;
}

double gram_deviation(const FullSystem& design) {
  const int n = design.n;
  const Eigen::MatrixXd ata = design.A.transpose() * design.A;
  Eigen::MatrixXd p_over_n = Eigen::MatrixXd::Identity(n, n);
  p_over_n.array() -= 1.0 / n;
  p_over_n /= n;
  return (ata - p_over_n).norm();
}

double leverage_score_deviation(const FullSystem& design) {
  const int n = design.n;
  const Eigen::MatrixXd ata = design.A.transpose() * design.A;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(ata, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double tol = sv[0] * n * 1e-12;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv[k] > tol) inv[k] = 1.0 / sv[k];
  }
  const Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  double worst = 0.0;
  for (Eigen::Index r = 0; r < design.A.rows(); ++r) {
    const Eigen::RowVectorXd row = design.A.row(r);
    const double numeric = row * pinv * row.transpose();
    const double closed = leverage_score(n, design.rows[static_cast<std::size_t>(r)].popcount());
    worst = std::max(worst, std::abs(numeric - closed));
  }
  return worst;
}

double norm_identity_gap(const FullSystem& design, std::span<const double> a,
                           std::span<const double> b) {
  const Eigen::VectorXd d = as_vector(a) - as_vector(b);
  const double lhs = design.n * (design.A * d).squaredNorm();
  const double rhs = d.squaredNorm();
  return std::abs(lhs - rhs) / std::max({lhs, rhs, 1e-300});
}

}  // namespace levshap
