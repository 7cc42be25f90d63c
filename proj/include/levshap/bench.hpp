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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "levshap/estimators.hpp"
#include "levshap/exact.hpp"
#include "levshap/games.hpp"

namespace levshap {

// Declared sigma grid for noise sweeps.
std::vector<double> default_sigma_grid();
std::vector<double> default_gamma_grid();
// 5n, 10n, 20n, 40n, 80n, 160n.
std::vector<std::int64_t> default_m_grid(int n);

struct ExperimentSpec {
  std::string game = "interaction:0";  // make_game spec; ignored by gamma sweeps
  int n = 10;
  std::vector<EstimatorConfig> estimators;  // m and seed are set per cell
  std::vector<std::int64_t> m_grid;
  std::vector<double> sigma_grid{0.0};
  std::vector<double> gamma_grid;
  int seeds = 1;
  std::uint64_t first_seed = 0;
  std::uint64_t game_seed = 0;  // construction seed for gamma games
  int jobs = 0;                 // 0: OpenMP default
  bool timing = false;          // fill wall_ms (makes output nondeterministic)

  // Throws DomainError on empty grids, seeds < 1, m < n, negative sigma.
  void validate() const;
};

struct MetricRow {
  std::string game;
  int n = 0;
  std::string estimator;
  std::int64_t m = 0;
  double sigma = 0.0;
  std::optional<double> gamma;
  std::uint64_t seed = 0;
  std::optional<double> l2_error;
  std::optional<double> objective_ratio;
  std::optional<std::int64_t> evals_used;
  std::optional<double> wall_ms;
  std::string error;  // nonempty for failed cells; not part of the CSV
};

// Exact Shapley values plus, for n <= kMaxFullSystemPlayers, the explicit
// system used for objective ratios and gamma.
struct GroundTruth {
  ShapleyVector phi;
  std::optional<FullSystem> system;
  std::optional<double> gamma;
};

// Analytic values when the oracle has them, otherwise brute force (n <= 22).
GroundTruth ground_truth(ValueOracle& oracle);

double l2_error(const ShapleyVector& estimate, const ShapleyVector& truth);
// ||A x - b||^2 / ||A phi - b||^2, which equals ||Z x - y||^2 / ||Z phi - y||^2
// whenever x satisfies the (noiseless) efficiency constraint and is >= 1
// otherwise too. Empty when the denominator is negligible.
std::optional<double> objective_ratio(const FullSystem& system, const ShapleyVector& phi,
                                      const ShapleyVector& estimate);

// Rows come back in grid order (gamma, sigma, estimator, m, seed) regardless
// of how cells were scheduled. Failed cells become rows with `error` set.
std::vector<MetricRow> run_size_sweep(const ExperimentSpec& spec);
std::vector<MetricRow> run_noise_sweep(const ExperimentSpec& spec);
std::vector<MetricRow> run_gamma_sweep(const ExperimentSpec& spec);
// Size sweep over ablation_cells() instead of spec.estimators.
std::vector<MetricRow> run_ablation(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "game,n,estimator,m,sigma,gamma,seed,l2_error,objective_ratio,evals_used,wall_ms";

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);
void write_csv(std::ostream& out, const std::vector<MetricRow>& rows);
std::vector<MetricRow> read_csv(std::istream& in);

// Linear interpolation between order statistics: h = (N-1)p.
double quantile_type7(std::vector<double> values, double p);

struct SummaryRow {
  std::string game;
  int n = 0;
  std::string estimator;
  std::int64_t m = 0;
  double sigma = 0.0;
  std::optional<double> gamma;
  std::string metric;  // "l2_error" or "objective_ratio"
  std::size_t count = 0;
  double mean = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};

// Groups by (game, n, estimator, m, sigma, gamma) in first-appearance order.
// Groups without values for a metric are skipped; their keys are appended to
// `warnings` when given.
std::vector<SummaryRow> aggregate(const std::vector<MetricRow>& rows,
                                  std::vector<std::string>* warnings = nullptr);
void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& summary);

}  // namespace levshap
