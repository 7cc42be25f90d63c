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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "levshap/mask.hpp"

// Data-parallel inner loops. Each OpenMP kernel has a serial reference in
// levshap::kernels::serial that follows the textbook formula directly; tests
// compare the two and the benchmark target times them.
namespace levshap::kernels {

struct NormalEquations {
  Eigen::MatrixXd gram;  // n x n
  Eigen::VectorXd rhs;   // n
};

// sum_r w_r (P z_r)(P z_r)^T and sum_r w_r (P z_r) t_r with P = I - 11^T/n.
// Rows are split into chunks whose boundaries depend only on (rows, n), and
// chunk partials are summed in chunk order, so the result is bit-identical
// for any thread count.
NormalEquations projected_normal_equations(std::span<const SubsetMask> rows,
                                           std::span<const double> weights,
                                           std::span<const double> targets);

// sum_r w_r z_r z_r^T and sum_r w_r z_r t_r (no projection).
NormalEquations raw_normal_equations(std::span<const SubsetMask> rows,
                                     std::span<const double> weights,
                                     std::span<const double> targets);

// phi_i = sum_{S not containing i} |S|!(n-|S|-1)!/n! (v(S+i) - v(S)), with
// values[k] = v(SubsetMask::from_index(n, k)). Parallel over players.
std::vector<double> shapley_from_table(int n, std::span<const double> values);

namespace serial {

NormalEquations projected_normal_equations(std::span<const SubsetMask> rows,
                                           std::span<const double> weights,
                                           std::span<const double> targets);

NormalEquations raw_normal_equations(std::span<const SubsetMask> rows,
                                     std::span<const double> weights,
                                     std::span<const double> targets);

// Subset-major loop order: for each S, credit every i outside S.
std::vector<double> shapley_from_table(int n, std::span<const double> values);

}  // namespace serial
}  // namespace levshap::kernels
