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

#include "levshap/estimators.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "levshap/combinatorics.hpp"
#include "levshap/errors.hpp"

namespace levshap {

namespace {

// Forwards to a shared oracle and counts only this run's evaluations.
class RunCounter final : public ValueOracle {
 public:
  explicit RunCounter(ValueOracle& inner)
      : ValueOracle(inner.num_players(), inner.label()), inner_(inner) {}

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    return inner_.eval_batch(masks);
  }

 private:
  ValueOracle& inner_;
};

struct RowPlan {
  std::vector<SubsetMask> rows;
  std::vector<double> weights;
  std::optional<double> c;
  int resamples = 0;
};

std::int64_t capped_budget(int n, std::int64_t m) {
  if (n < 62) return std::min<std::int64_t>(m, std::int64_t{1} << n);
  return m;
}

// Sums the weights of repeated masks; keeps first-occurrence order.
void merge_duplicates(RowPlan& plan) {
  std::unordered_map<SubsetMask, std::size_t, SubsetMaskHash> index;
  std::vector<SubsetMask> rows;
  std::vector<double> weights;
  for (std::size_t k = 0; k < plan.rows.size(); ++k) {
    auto [it, inserted] = index.try_emplace(plan.rows[k], rows.size());
    if (inserted) {
      rows.push_back(plan.rows[k]);
      weights.push_back(plan.weights[k]);
    } else {
      weights[it->second] += plan.weights[k];
    }
  }
  plan.rows = std::move(rows);
  plan.weights = std::move(weights);
}

RowPlan bernoulli_plan(int n, std::int64_t m, Distribution dist, bool deterministic, Rng& rng) {
  RowPlan plan;
  const double c = solve_c(n, m, dist);
  plan.c = c;
  BernoulliOptions options;
  options.distribution = dist;
  options.deterministic_counts = deterministic;
  const PairedSample sample = bernoulli_sample(n, c, rng, options);
  plan.rows.reserve(2 * sample.pairs.size());
  plan.weights.reserve(2 * sample.pairs.size());
  for (const auto& pair : sample.pairs) {
    for (const SubsetMask* z : {&pair.z, &pair.complement}) {
      const int s = z->popcount();
      const double p = pair_inclusion_probability(n, s, c, dist);
      plan.rows.push_back(*z);
      plan.weights.push_back(std::exp(log_shapley_weight(n, s) - std::log(p)));
    }
  }
  return plan;
}

RowPlan replacement_plan(int n, std::int64_t count, Distribution dist, bool paired, Rng& rng) {
  RowPlan plan;
  if (count < (paired ? 2 : 1)) return plan;
  plan.rows = sample_with_replacement(n, count, dist, paired, rng);
  const double log_draws = std::log(static_cast<double>(plan.rows.size()));
  plan.weights.reserve(plan.rows.size());
  for (const auto& z : plan.rows) {
    const int s = z.popcount();
    plan.weights.push_back(
        std::exp(log_shapley_weight(n, s) - log_row_probability(n, s, dist) - log_draws));
  }
  merge_duplicates(plan);
  return plan;
}

// Whole paired size levels while they fit in the budget, then paired draws
// from the kernel distribution restricted to the levels left over.
RowPlan optimized_plan(int n, std::int64_t m, Rng& rng) {
  RowPlan plan;
  std::int64_t remaining = m - 2;
  const int half = n / 2;
  int s = 1;
  for (; s <= half; ++s) {
    const bool middle = (n % 2 == 0) && s == half;
    const BigInt level_rows = middle ? binomial_exact(n, s) : 2 * binomial_exact(n, s);
    if (level_rows > remaining) break;
    remaining -= static_cast<std::int64_t>(level_rows);
    const double w = shapley_weight(n, s);
    auto add = [&](const SubsetMask& z) {
      plan.rows.push_back(z);
      plan.weights.push_back(w);
    };
    for_each_combination(n, s, add);
    if (!middle) for_each_combination(n, n - s, add);
  }
  if (s > half || remaining < 2) return plan;

  // Residual sizes s..n-s with P(size) proportional to 1/(size (n-size)).
  const int lo = s;
  const int hi = n - s;
  std::vector<double> mass;
  double residual_weight = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double q = 1.0 / (static_cast<double>(k) * (n - k));
    mass.push_back(q);
    residual_weight += q;
  }
  std::discrete_distribution<int> size_dist(mass.begin(), mass.end());

  std::unordered_map<SubsetMask, std::int64_t, SubsetMaskHash> draws_of;
  std::vector<SubsetMask> order;
  std::int64_t draws = 0;
  const std::int64_t max_draws = 50 * remaining + 100;
  for (std::int64_t attempt = 0; attempt < max_draws; ++attempt) {
    SubsetMask z = uniform_subset(n, lo + size_dist(rng), rng);
    SubsetMask zc = z.complement();
    const bool fresh = !draws_of.contains(z);
    if (fresh && static_cast<std::int64_t>(order.size()) + 2 > remaining) break;
    for (SubsetMask* mask : {&z, &zc}) {
      auto [it, inserted] = draws_of.try_emplace(*mask, 0);
      if (inserted) order.push_back(*mask);
      ++it->second;
    }
    ++draws;
    if (static_cast<std::int64_t>(order.size()) + 2 > remaining) break;
  }
  // Each of the 2 * draws masks stands for W_res / (2 draws) of kernel mass.
  const double per_mask = residual_weight / (2.0 * static_cast<double>(draws));
  for (const auto& z : order) {
    plan.rows.push_back(z);
    plan.weights.push_back(per_mask * static_cast<double>(draws_of[z]));
  }
  return plan;
}

EstimateResult run_plan(ValueOracle& oracle, const EstimatorConfig& config, RowPlan plan) {
  const int n = oracle.num_players();
  RunCounter counter(oracle);

  std::vector<SubsetMask> batch;
  batch.reserve(plan.rows.size() + 2);
  batch.emplace_back(n);
  batch.push_back(SubsetMask::full(n));
  batch.insert(batch.end(), plan.rows.begin(), plan.rows.end());
  const std::vector<double> values = counter.eval_batch(batch);

  SampledSystem system;
  system.n = n;
  system.v0 = values[0];
  system.v1 = values[1];
  system.rows = std::move(plan.rows);
  system.weights = std::move(plan.weights);
  system.values.assign(values.begin() + 2, values.end());

  EstimateResult result;
  result.config = config;
  result.seed = config.seed;
  result.c = plan.c;
  result.resamples = plan.resamples;
  result.rows_per_size.assign(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& z : system.rows) ++result.rows_per_size[static_cast<std::size_t>(z.popcount())];

  if (system.rows.empty()) {
    // Nothing sampled: the minimum-norm point of the constraint hyperplane.
    const double delta = system.v1_minus_v0();
    result.phi.v1_minus_v0 = delta;
    result.phi.phi.assign(static_cast<std::size_t>(n), delta / n);
    result.diagnostics.solver = std::string(to_string(config.solver));
    result.diagnostics.rank_deficient = true;
  } else {
    SolveResult solved = config.solver == Solver::projected ? solve_projected(system)
                                                            : solve_lagrange(system);
    result.phi = std::move(solved.phi);
    result.diagnostics = std::move(solved.diagnostics);
  }
  result.evals_used = counter.eval_count();
  return result;
}

template <class Draw>
RowPlan draw_solvable(int n, const EstimatorConfig& config, Draw&& draw) {
  RowPlan plan = draw();
  if (config.solver != Solver::lagrange) return plan;
  int resamples = 0;
  while (!lagrange_solvable(n, plan.rows, plan.weights)) {
    if (resamples == kMaxResamples) {
      throw SolverError("sampled Gram matrix singular after " + std::to_string(kMaxResamples) +
                            " redraws; increase m or use the projected solver",
                        -1, 0.0);
    }
    ++resamples;
    plan = draw();
  }
  plan.resamples = resamples;
  return plan;
}

EstimateResult sampled_estimate(ValueOracle& oracle, const EstimatorConfig& config) {
  const int n = oracle.num_players();
  config.validate(n);
  Rng rng(config.seed);
  const Distribution dist = config.distribution();
  RowPlan plan;
  if (config.replacement == Replacement::without) {
    const std::int64_t m = capped_budget(n, config.m);
    plan = draw_solvable(n, config, [&] {
      return bernoulli_plan(n, m, dist, config.deterministic_counts, rng);
    });
  } else {
    plan = draw_solvable(n, config, [&] {
      return replacement_plan(n, config.m - 2, dist, config.paired, rng);
    });
  }
  return run_plan(oracle, config, std::move(plan));
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::leverage: return "leverage";
    case Family::kernel: return "kernel";
    case Family::kernel_optimized: return "kernel_optimized";
  }
  return "?";
}

std::string_view to_string(Replacement r) {
  return r == Replacement::with ? "with" : "without";
}

std::string_view to_string(Solver s) {
  return s == Solver::projected ? "projected" : "lagrange";
}

std::optional<Family> parse_family(std::string_view text) {
  if (text == "leverage") return Family::leverage;
  if (text == "kernel") return Family::kernel;
  if (text == "kernel_optimized" || text == "optimized") return Family::kernel_optimized;
  return std::nullopt;
}

EstimatorConfig EstimatorConfig::defaults(Family family, std::int64_t m, std::uint64_t seed) {
  EstimatorConfig c;
  c.family = family;
  c.m = m;
  c.seed = seed;
  switch (family) {
    case Family::leverage:
      c.paired = true;
      c.replacement = Replacement::without;
      c.solver = Solver::projected;
      break;
    case Family::kernel:
      c.paired = false;
      c.replacement = Replacement::with;
      c.solver = Solver::lagrange;
      break;
    case Family::kernel_optimized:
      c.paired = true;
      c.replacement = Replacement::with;
      c.solver = Solver::lagrange;
      break;
  }
  return c;
}

Distribution EstimatorConfig::distribution() const {
  return family == Family::leverage ? Distribution::leverage : Distribution::kernel;
}

std::string EstimatorConfig::label() const {
  const EstimatorConfig base = defaults(family, m, seed);
  std::string out(to_string(family));
  std::vector<std::string> tags;
  if (family != Family::kernel_optimized &&
      (paired != base.paired || replacement != base.replacement)) {
    tags.emplace_back(paired ? "paired" : "unpaired");
    tags.emplace_back(to_string(replacement));
  }
  if (solver != base.solver) tags.emplace_back(to_string(solver));
  if (deterministic_counts) tags.emplace_back("det");
  if (!tags.empty()) {
    out += '[';
    for (std::size_t k = 0; k < tags.size(); ++k) {
      if (k > 0) out += ',';
      out += tags[k];
    }
    out += ']';
  }
  return out;
}

void EstimatorConfig::validate(int n) const {
  if (n < 2) throw DomainError("estimator: need n >= 2 players");
  if (m < n) {
    throw DomainError("estimator: budget m=" + std::to_string(m) + " is below n=" +
                      std::to_string(n));
  }
  if (family != Family::kernel_optimized && replacement == Replacement::without && !paired) {
    throw DomainError("estimator: sampling without replacement is only defined for pairs");
  }
  if (deterministic_counts && (family == Family::kernel_optimized ||
                               replacement == Replacement::with)) {
    throw DomainError("estimator: deterministic counts apply only to sampling without replacement");
  }
}

EstimateResult leverage_shap(ValueOracle& oracle, const EstimatorConfig& config) {
  if (config.family != Family::leverage) throw DomainError("leverage_shap: wrong family");
  return sampled_estimate(oracle, config);
}

EstimateResult kernel_shap(ValueOracle& oracle, const EstimatorConfig& config) {
  if (config.family != Family::kernel) throw DomainError("kernel_shap: wrong family");
  return sampled_estimate(oracle, config);
}

EstimateResult optimized_kernel_shap(ValueOracle& oracle, const EstimatorConfig& config) {
  if (config.family != Family::kernel_optimized) {
    throw DomainError("optimized_kernel_shap: wrong family");
  }
  const int n = oracle.num_players();
  config.validate(n);
  Rng rng(config.seed);
  const std::int64_t m = capped_budget(n, config.m);
  RowPlan plan = draw_solvable(n, config, [&] { return optimized_plan(n, m, rng); });
  return run_plan(oracle, config, std::move(plan));
}

EstimateResult estimate(ValueOracle& oracle, const EstimatorConfig& config) {
  switch (config.family) {
    case Family::leverage: return leverage_shap(oracle, config);
    case Family::kernel: return kernel_shap(oracle, config);
    case Family::kernel_optimized: return optimized_kernel_shap(oracle, config);
  }
  throw DomainError("estimate: unknown family");
}

std::vector<EstimatorConfig> ablation_cells(std::int64_t m) {
  std::vector<EstimatorConfig> cells;
  for (Family family : {Family::leverage, Family::kernel}) {
    for (auto [paired, replacement] :
         {std::pair{true, Replacement::with}, std::pair{false, Replacement::with},
          std::pair{true, Replacement::without}}) {
      EstimatorConfig c = EstimatorConfig::defaults(family, m);
      c.paired = paired;
      c.replacement = replacement;
      cells.push_back(c);
    }
  }
  return cells;
}

std::vector<AblationRow> ablation_grid(ValueOracle& oracle, std::int64_t m,
                                       const std::vector<std::uint64_t>& seeds) {
  std::vector<AblationRow> out;
  for (const auto& cell : ablation_cells(m)) {
    for (std::uint64_t seed : seeds) {
      AblationRow row;
      row.config = cell;
      row.config.seed = seed;
      try {
        row.result = estimate(oracle, row.config);
      } catch (const std::exception& e) {
        row.error = e.what();
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace levshap
