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

#include "levshap/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

#include "levshap/errors.hpp"

namespace levshap::kernels {

namespace {

constexpr std::size_t kRowsPerChunk = 512;
// Upper bound on doubles held by per-chunk Gram partials.
constexpr std::size_t kPartialBudget = std::size_t{1} << 24;

void check_rows(std::span<const SubsetMask> rows, std::span<const double> weights,
                std::span<const double> targets) {
  if (rows.size() != weights.size() || rows.size() != targets.size()) {
    throw DomainError("normal equations: rows, weights and targets differ in length");
  }
}

// Raw moments of one contiguous chunk of rows.
struct Moments {
  explicit Moments(int n) : zz(Eigen::MatrixXd::Zero(n, n)), zt(Eigen::VectorXd::Zero(n)),
                            sz(Eigen::VectorXd::Zero(n)) {}
  Eigen::MatrixXd zz;  // sum w z z^T, upper triangle only
  Eigen::VectorXd zt;  // sum w t z
  Eigen::VectorXd sz;  // sum w |z| z
  double ss = 0.0;     // sum w |z|^2
  double st = 0.0;     // sum w |z| t

  void add(const SubsetMask& z, double w, double t, std::vector<int>& members) {
    members = z.players();
    const double s = static_cast<double>(members.size());
    for (std::size_t a = 0; a < members.size(); ++a) {
      const int i = members[a];
      zt[i] += w * t;
      sz[i] += w * s;
      for (std::size_t b = a; b < members.size(); ++b) zz(i, members[b]) += w;
    }
    ss += w * s * s;
    st += w * s * t;
  }

  void merge(const Moments& o) {
    zz += o.zz;
    zt += o.zt;
    sz += o.sz;
    ss += o.ss;
    st += o.st;
  }
};

Moments accumulate(int n, std::span<const SubsetMask> rows, std::span<const double> weights,
                   std::span<const double> targets) {
  const std::size_t m = rows.size();
  const std::size_t per_chunk_doubles = static_cast<std::size_t>(n) * n + 3 * n;
  const std::size_t max_chunks = std::max<std::size_t>(1, kPartialBudget / per_chunk_doubles);
  const std::size_t chunks =
      std::clamp<std::size_t>((m + kRowsPerChunk - 1) / kRowsPerChunk, 1, max_chunks);
  const std::size_t chunk_len = (m + chunks - 1) / chunks;

  std::vector<Moments> partial(chunks, Moments(n));
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const std::size_t begin = static_cast<std::size_t>(c) * chunk_len;
    const std::size_t end = std::min(m, begin + chunk_len);
    std::vector<int> members;
    auto& acc = partial[static_cast<std::size_t>(c)];
    for (std::size_t r = begin; r < end; ++r) acc.add(rows[r], weights[r], targets[r], members);
  }
  Moments total = std::move(partial.front());
  for (std::size_t c = 1; c < chunks; ++c) total.merge(partial[c]);
  total.zz.triangularView<Eigen::StrictlyLower>() = total.zz.transpose();
  return total;
}

int player_count(std::span<const SubsetMask> rows) {
  if (rows.empty()) throw DomainError("normal equations: no rows");
  return rows.front().size();
}

}  // namespace

NormalEquations projected_normal_equations(std::span<const SubsetMask> rows,
                                           std::span<const double> weights,
                                           std::span<const double> targets) {
  check_rows(rows, weights, targets);
  const int n = player_count(rows);
  const double dn = n;
  Moments mom = accumulate(n, rows, weights, targets);
  // P M P = M - (u 1^T + 1 u^T)/n + (1^T M 1) 11^T / n^2, with M 1 = sz.
  NormalEquations out;
  out.gram = mom.zz;
  out.gram.rowwise() -= mom.sz.transpose() / dn;
  out.gram.colwise() -= mom.sz / dn;
  out.gram.array() += mom.ss / (dn * dn);
  out.rhs = mom.zt;
  out.rhs.array() -= mom.st / dn;
  return out;
}

NormalEquations raw_normal_equations(std::span<const SubsetMask> rows,
                                     std::span<const double> weights,
                                     std::span<const double> targets) {
  check_rows(rows, weights, targets);
  const int n = player_count(rows);
  Moments mom = accumulate(n, rows, weights, targets);
  return NormalEquations{std::move(mom.zz), std::move(mom.zt)};
}

std::vector<double> shapley_from_table(int n, std::span<const double> values) {
  if (n < 1 || n > 30 || values.size() != (std::size_t{1} << n)) {
    throw DomainError("shapley_from_table: need 2^n values");
  }
  // coef[k] = k!(n-k-1)!/n!
  std::vector<double> coef(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    coef[static_cast<std::size_t>(k)] = std::exp(std::lgamma(k + 1.0) +
                                                 std::lgamma(n - k + 0.0) -
                                                 std::lgamma(n + 1.0));
  }
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  const std::uint64_t total = std::uint64_t{1} << n;
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    double acc = 0.0;
    for (std::uint64_t s = 0; s < total; ++s) {
      if (s & bit) continue;
      const int size = std::popcount(s);
      acc += coef[static_cast<std::size_t>(size)] * (values[s | bit] - values[s]);
    }
    phi[static_cast<std::size_t>(i)] = acc;
  }
  return phi;
}

namespace serial {

NormalEquations projected_normal_equations(std::span<const SubsetMask> rows,
                                           std::span<const double> weights,
                                           std::span<const double> targets) {
  check_rows(rows, weights, targets);
  const int n = player_count(rows);
  NormalEquations out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd pz(n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double s = rows[r].popcount();
    for (int i = 0; i < n; ++i) pz[i] = (rows[r].test(i) ? 1.0 : 0.0) - s / n;
    out.gram.noalias() += weights[r] * pz * pz.transpose();
    out.rhs += weights[r] * targets[r] * pz;
  }
  return out;
}

NormalEquations raw_normal_equations(std::span<const SubsetMask> rows,
                                     std::span<const double> weights,
                                     std::span<const double> targets) {
  check_rows(rows, weights, targets);
  const int n = player_count(rows);
  NormalEquations out{Eigen::MatrixXd::Zero(n, n), Eigen::VectorXd::Zero(n)};
  Eigen::VectorXd z(n);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int i = 0; i < n; ++i) z[i] = rows[r].test(i) ? 1.0 : 0.0;
    out.gram.noalias() += weights[r] * z * z.transpose();
    out.rhs += weights[r] * targets[r] * z;
  }
  return out;
}

std::vector<double> shapley_from_table(int n, std::span<const double> values) {
  if (n < 1 || n > 30 || values.size() != (std::size_t{1} << n)) {
    throw DomainError("shapley_from_table: need 2^n values");
  }
  std::vector<double> coef(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    coef[static_cast<std::size_t>(k)] = std::exp(std::lgamma(k + 1.0) +
                                                 std::lgamma(n - k + 0.0) -
                                                 std::lgamma(n + 1.0));
  }
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t s = 0; s < total; ++s) {
    const int size = std::popcount(s);
    if (size == n) continue;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if (s & bit) continue;
      phi[static_cast<std::size_t>(i)] +=
          coef[static_cast<std::size_t>(size)] * (values[s | bit] - values[s]);
    }
  }
  return phi;
}

}  // namespace serial
}  // namespace levshap::kernels
