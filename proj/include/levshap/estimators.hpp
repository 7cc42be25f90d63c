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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "levshap/exact.hpp"
#include "levshap/games.hpp"
#include "levshap/regression.hpp"
#include "levshap/sampling.hpp"

namespace levshap {

enum class Family { leverage, kernel, kernel_optimized };
enum class Replacement { with, without };
enum class Solver { projected, lagrange };

std::string_view to_string(Family f);
std::string_view to_string(Replacement r);
std::string_view to_string(Solver s);
std::optional<Family> parse_family(std::string_view text);

struct EstimatorConfig {
  Family family = Family::leverage;
  std::int64_t m = 0;
  bool paired = true;
  Replacement replacement = Replacement::without;
  bool deterministic_counts = false;
  std::uint64_t seed = 0;
  Solver solver = Solver::projected;

  // leverage:         paired, without replacement, projected solve
  // kernel:           unpaired, with replacement, Lagrange solve
  // kernel_optimized: paired, size enumeration then with replacement, Lagrange
  static EstimatorConfig defaults(Family family, std::int64_t m, std::uint64_t seed = 0);

  // Sampling distribution implied by the family.
  Distribution distribution() const;
  // "leverage", "kernel", "kernel_optimized", or e.g.
  // "leverage[paired,with]" when the sampling options differ from the family
  // defaults.
  std::string label() const;
  // Throws DomainError for combinations no estimator implements (unpaired
  // sampling without replacement).
  void validate(int n) const;
};

struct EstimateResult {
  ShapleyVector phi;
  std::int64_t evals_used = 0;
  std::optional<double> c;
  // Distinct rows in the regression per set size, index 0..n.
  std::vector<std::int64_t> rows_per_size;
  SolveDiagnostics diagnostics;
  std::uint64_t seed = 0;
  int resamples = 0;
  EstimatorConfig config;
};

// Redraws allowed when a with-replacement sample gives a singular Lagrange
// system; the check happens before any evaluation.
inline constexpr int kMaxResamples = 3;

// Each run wraps the oracle in its own counter, so evals_used is exact even
// when several runs share one oracle concurrently.
EstimateResult leverage_shap(ValueOracle& oracle, const EstimatorConfig& config);
EstimateResult kernel_shap(ValueOracle& oracle, const EstimatorConfig& config);
EstimateResult optimized_kernel_shap(ValueOracle& oracle, const EstimatorConfig& config);
// Dispatches on config.family.
EstimateResult estimate(ValueOracle& oracle, const EstimatorConfig& config);

// The six valid {leverage, kernel} x {paired with, unpaired with, paired
// without} sampling configurations.
std::vector<EstimatorConfig> ablation_cells(std::int64_t m);

struct AblationRow {
  EstimatorConfig config;
  std::optional<EstimateResult> result;
  std::string error;
};

// Every cell under each seed, cell-major.
std::vector<AblationRow> ablation_grid(ValueOracle& oracle, std::int64_t m,
                                       const std::vector<std::uint64_t>& seeds);

}  // namespace levshap
