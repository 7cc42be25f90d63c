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

#include "levshap/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "levshap/errors.hpp"

namespace levshap {

namespace {

struct GameInstance {
  OraclePtr oracle;
  GroundTruth truth;
};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Depends on the run seed and sigma position only, never on the estimator.
std::uint64_t noise_seed(std::uint64_t seed, std::size_t sigma_index) {
  return splitmix64(splitmix64(seed) ^ (0x6a09e667f3bcc909ULL * (sigma_index + 1)));
}

ExperimentSpec resolved(const ExperimentSpec& spec) {
  ExperimentSpec out = spec;
  if (out.estimators.empty()) {
    for (Family f : {Family::leverage, Family::kernel_optimized, Family::kernel}) {
      out.estimators.push_back(EstimatorConfig::defaults(f, 0));
    }
  }
  if (out.m_grid.empty()) out.m_grid = default_m_grid(out.n);
  return out;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

template <class T>
std::string optional_field(const std::optional<T>& v) {
  if (!v) return {};
  if constexpr (std::is_floating_point_v<T>) {
    return format_double(*v);
  } else {
    return std::to_string(*v);
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

double parse_double(const std::string& s) {
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError("csv: bad number '" + s + "'");
  }
  return x;
}

template <class T>
T parse_integer(const std::string& s) {
  T x{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError("csv: bad integer '" + s + "'");
  }
  return x;
}

std::vector<MetricRow> run_cells(const ExperimentSpec& spec, std::vector<GameInstance>& games) {
  struct Cell {
    std::size_t game;
    std::size_t sigma;
    std::size_t estimator;
    std::size_t m;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t g = 0; g < games.size(); ++g) {
    for (std::size_t si = 0; si < spec.sigma_grid.size(); ++si) {
      for (std::size_t e = 0; e < spec.estimators.size(); ++e) {
        for (std::size_t mi = 0; mi < spec.m_grid.size(); ++mi) {
          for (int k = 0; k < spec.seeds; ++k) {
            cells.push_back(Cell{g, si, e, mi, spec.first_seed + static_cast<std::uint64_t>(k)});
          }
        }
      }
    }
  }

  std::vector<MetricRow> rows(cells.size());
  const int threads = spec.jobs > 0 ? spec.jobs : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t idx = 0; idx < count; ++idx) {
    const Cell& cell = cells[static_cast<std::size_t>(idx)];
    const GameInstance& game = games[cell.game];
    MetricRow& row = rows[static_cast<std::size_t>(idx)];
    EstimatorConfig config = spec.estimators[cell.estimator];
    config.m = spec.m_grid[cell.m];
    config.seed = cell.seed;
    const double sigma = spec.sigma_grid[cell.sigma];

    row.game = game.oracle->label();
    row.n = game.oracle->num_players();
    row.estimator = config.label();
    row.m = config.m;
    row.sigma = sigma;
    row.gamma = game.truth.gamma;
    row.seed = cell.seed;
    try {
      OraclePtr oracle = game.oracle;
      if (sigma > 0.0) oracle = with_noise(oracle, NoiseConfig{sigma, noise_seed(cell.seed, cell.sigma)});
      const auto t0 = std::chrono::steady_clock::now();
      const EstimateResult result = estimate(*oracle, config);
      const auto t1 = std::chrono::steady_clock::now();
      row.l2_error = l2_error(result.phi, game.truth.phi);
      if (game.truth.system) {
        row.objective_ratio = objective_ratio(*game.truth.system, game.truth.phi, result.phi);
      }
      row.evals_used = result.evals_used;
      if (spec.timing) {
        row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::vector<MetricRow> run_on_game(const ExperimentSpec& raw) {
  ExperimentSpec spec = resolved(raw);
  spec.validate();
  std::vector<GameInstance> games(1);
  games[0].oracle = make_game(spec.game, spec.n);
  games[0].truth = ground_truth(*games[0].oracle);
  return run_cells(spec, games);
}

}  // namespace

std::vector<double> default_sigma_grid() { return {0.0, 5e-3, 1e-2, 5e-2, 1e-1, 5e-1, 1.0}; }

std::vector<double> default_gamma_grid() { return {0.1, 1.0, 10.0}; }

std::vector<std::int64_t> default_m_grid(int n) {
  std::vector<std::int64_t> out;
  for (int k : {5, 10, 20, 40, 80, 160}) out.push_back(static_cast<std::int64_t>(k) * n);
  return out;
}

void ExperimentSpec::validate() const {
  if (n < 2) throw DomainError("experiment: need n >= 2");
  if (seeds < 1) throw DomainError("experiment: need at least one seed");
  if (m_grid.empty()) throw DomainError("experiment: empty m grid");
  if (sigma_grid.empty()) throw DomainError("experiment: empty sigma grid");
  if (estimators.empty()) throw DomainError("experiment: no estimators");
  for (double s : sigma_grid) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw DomainError("experiment: sigma must be >= 0");
  }
  for (double g : gamma_grid) {
    if (!(g >= 0.0) || !std::isfinite(g)) throw DomainError("experiment: gamma must be >= 0");
  }
  for (const auto& est : estimators) {
    for (std::int64_t m : m_grid) {
      EstimatorConfig c = est;
      c.m = m;
      c.validate(n);
    }
  }
}

GroundTruth ground_truth(ValueOracle& oracle) {
  GroundTruth truth;
  const int n = oracle.num_players();
  if (auto analytic = oracle.analytic_shapley()) {
    const std::vector<SubsetMask> ends{SubsetMask(n), SubsetMask::full(n)};
    const auto v = oracle.eval_batch(ends);
    truth.phi.phi = std::move(*analytic);
    truth.phi.v1_minus_v0 = v[1] - v[0];
  } else {
    truth.phi = exact_shapley(oracle);
  }
  if (n <= kMaxFullSystemPlayers) {
    truth.system = build_full_system(oracle);
    try {
      truth.gamma = gamma_of(*truth.system, truth.phi);
    } catch (const DomainError&) {
      truth.gamma.reset();
    }
  }
  return truth;
}

double l2_error(const ShapleyVector& estimate, const ShapleyVector& truth) {
  if (estimate.phi.size() != truth.phi.size()) throw DomainError("l2_error: size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < truth.phi.size(); ++i) {
    const double d = estimate.phi[i] - truth.phi[i];
    total += d * d;
  }
  return total;
}

std::optional<double> objective_ratio(const FullSystem& system, const ShapleyVector& phi,
                                      const ShapleyVector& estimate) {
  const double best = projected_objective(system, phi.phi);
  const double scale = std::max(system.b.squaredNorm(), std::numeric_limits<double>::min());
  if (best <= 1e-14 * scale) return std::nullopt;
  return projected_objective(system, estimate.phi) / best;
}

std::vector<MetricRow> run_size_sweep(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.sigma_grid = {0.0};
  return run_on_game(s);
}

std::vector<MetricRow> run_noise_sweep(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  if (s.sigma_grid.empty() || (s.sigma_grid.size() == 1 && s.sigma_grid[0] == 0.0)) {
    s.sigma_grid = default_sigma_grid();
  }
  return run_on_game(s);
}

std::vector<MetricRow> run_gamma_sweep(const ExperimentSpec& raw) {
  ExperimentSpec spec = resolved(raw);
  if (spec.gamma_grid.empty()) spec.gamma_grid = default_gamma_grid();
  spec.sigma_grid = {0.0};
  spec.validate();
  if (spec.n > kMaxFullSystemPlayers) {
    throw CostError("gamma sweep: n must be <= " + std::to_string(kMaxFullSystemPlayers));
  }
  std::vector<GameInstance> games;
  for (double target : spec.gamma_grid) {
    GammaGame g = make_gamma_game(spec.n, target, spec.game_seed);
    GameInstance inst;
    inst.oracle = g.oracle;
    inst.truth.phi = std::move(g.phi);
    inst.truth.system = std::move(g.system);
    inst.truth.gamma = g.achieved_gamma;
    games.push_back(std::move(inst));
  }
  return run_cells(spec, games);
}

std::vector<MetricRow> run_ablation(const ExperimentSpec& spec) {
  ExperimentSpec s = spec;
  s.estimators = ablation_cells(0);
  s.sigma_grid = {0.0};
  return run_on_game(s);
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) throw NumericalError("format_double: conversion failed");
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.game) << ',' << r.n << ',' << csv_field(r.estimator) << ',' << r.m << ','
        << format_double(r.sigma) << ',' << optional_field(r.gamma) << ',' << r.seed << ','
        << optional_field(r.l2_error) << ',' << optional_field(r.objective_ratio) << ','
        << optional_field(r.evals_used) << ',' << optional_field(r.wall_ms) << '\n';
  }
}

std::vector<MetricRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw DomainError("csv: missing or unexpected header");
  }
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 11) throw DomainError("csv: expected 11 fields, got " + std::to_string(f.size()));
    MetricRow r;
    r.game = f[0];
    r.n = parse_integer<int>(f[1]);
    r.estimator = f[2];
    r.m = parse_integer<std::int64_t>(f[3]);
    r.sigma = parse_double(f[4]);
    if (!f[5].empty()) r.gamma = parse_double(f[5]);
    r.seed = parse_integer<std::uint64_t>(f[6]);
    if (!f[7].empty()) r.l2_error = parse_double(f[7]);
    if (!f[8].empty()) r.objective_ratio = parse_double(f[8]);
    if (!f[9].empty()) r.evals_used = parse_integer<std::int64_t>(f[9]);
    if (!f[10].empty()) r.wall_ms = parse_double(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile: p outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

std::vector<SummaryRow> aggregate(const std::vector<MetricRow>& rows,
                                  std::vector<std::string>* warnings) {
  struct Group {
    SummaryRow key;
    std::vector<double> l2;
    std::vector<double> ratio;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& r : rows) {
    std::ostringstream k;
    k << r.game << '\x1f' << r.n << '\x1f' << r.estimator << '\x1f' << r.m << '\x1f'
      << format_double(r.sigma) << '\x1f' << optional_field(r.gamma);
    auto [it, inserted] = index.try_emplace(k.str(), groups.size());
    if (inserted) {
      Group g;
      g.key.game = r.game;
      g.key.n = r.n;
      g.key.estimator = r.estimator;
      g.key.m = r.m;
      g.key.sigma = r.sigma;
      g.key.gamma = r.gamma;
      groups.push_back(std::move(g));
    }
    Group& g = groups[it->second];
    if (r.l2_error) g.l2.push_back(*r.l2_error);
    if (r.objective_ratio) g.ratio.push_back(*r.objective_ratio);
  }

  std::vector<SummaryRow> out;
  for (const auto& g : groups) {
    if (g.l2.empty() && warnings != nullptr) {
      warnings->push_back("no successful runs for " + g.key.game + " / " + g.key.estimator +
                          " / m=" + std::to_string(g.key.m));
    }
    for (auto [name, values] : {std::pair{"l2_error", &g.l2}, std::pair{"objective_ratio", &g.ratio}}) {
      if (values->empty()) continue;
      SummaryRow s = g.key;
      s.metric = name;
      s.count = values->size();
      double sum = 0.0;
      for (double v : *values) sum += v;
      s.mean = sum / static_cast<double>(values->size());
      s.q1 = quantile_type7(*values, 0.25);
      s.median = quantile_type7(*values, 0.5);
      s.q3 = quantile_type7(*values, 0.75);
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& summary) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : summary) {
    arr.push_back({{"game", s.game},
                   {"n", s.n},
                   {"estimator", s.estimator},
                   {"m", s.m},
                   {"sigma", s.sigma},
                   {"gamma", s.gamma ? nlohmann::json(*s.gamma) : nlohmann::json(nullptr)},
                   {"metric", s.metric},
                   {"count", s.count},
                   {"mean", s.mean},
                   {"q1", s.q1},
                   {"median", s.median},
                   {"q3", s.q3}});
  }
  out << arr.dump(2) << '\n';
}

}  // namespace levshap
