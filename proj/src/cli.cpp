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

#include "levshap/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "levshap/bench.hpp"
#include "levshap/combinatorics.hpp"
#include "levshap/errors.hpp"
#include "levshap/estimators.hpp"
#include "levshap/exact.hpp"
#include "levshap/games.hpp"

namespace levshap {

namespace {

using nlohmann::json;

// Raised for bad flag values found after CLI11 parsing; maps to kExitUsage.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string game = "interaction:0";
  int n = 0;
  std::string estimator;
  std::int64_t m = 0;
  std::uint64_t seed = 0;
  int seeds = 10;
  std::string m_grid;
  std::string sigma_grid;
  std::string gamma_grid;
  std::uint64_t game_seed = 0;
  std::string paired;
  std::string replacement;
  std::string solver;
  bool deterministic_counts = false;
  std::string out;
  std::string summary;
  std::string diagnostics;
  int jobs = 0;
  bool timing = false;
  int max_n = 10;
  bool corrupt_weights = false;
  std::string config;
};

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::int64_t x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw DomainError(std::string(what) + ": '" + std::string(s) + "' is not an integer");
  }
  return x;
}

bool is_external(const std::string& game) { return game.rfind("external:", 0) == 0; }

// --n when given; otherwise the game's own size, or 10 for interaction games.
int resolve_players(const Options& o) {
  if (o.n > 0) return o.n;
  if (o.n < 0) throw DomainError("--n must be positive");
  if (o.game.rfind("interaction", 0) == 0) return 10;
  if (is_external(o.game)) throw DomainError("external games need --n");
  return make_game(o.game, std::nullopt)->num_players();
}

std::vector<EstimatorConfig> resolve_estimators(const Options& o, bool sweep) {
  std::vector<Family> families;
  if (o.estimator.empty() || o.estimator == "all") {
    if (sweep) {
      families = {Family::leverage, Family::kernel_optimized, Family::kernel};
    } else {
      families = {Family::leverage};
    }
  } else {
    for (const auto& name : split(o.estimator, ',')) {
      const auto f = parse_family(name);
      if (!f) throw DomainError("unknown estimator '" + name + "'");
      families.push_back(*f);
    }
  }
  std::vector<EstimatorConfig> out;
  for (Family f : families) {
    EstimatorConfig c = EstimatorConfig::defaults(f, o.m, o.seed);
    if (!o.paired.empty()) c.paired = o.paired == "on";
    if (!o.replacement.empty()) {
      c.replacement = o.replacement == "with" ? Replacement::with : Replacement::without;
    }
    if (!o.solver.empty()) {
      c.solver = o.solver == "projected" ? Solver::projected : Solver::lagrange;
    }
    c.deterministic_counts = o.deterministic_counts;
    out.push_back(c);
  }
  return out;
}

std::string trim(std::string_view text) {
  const auto b = text.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = text.find_last_not_of(" \t\r");
  std::string out(text.substr(b, e - b + 1));
  if (out.size() >= 2 && (out.front() == '"' || out.front() == '\'') && out.back() == out.front()) {
    out = out.substr(1, out.size() - 2);
  }
  return out;
}

// Replaces `--config PATH` after the subcommand with the file's options, placed
// before the remaining flags so that explicit flags take precedence. Lines are
// `key = value` with key a long option name; `#` starts a comment; flags take
// true/false.
std::vector<std::string> expand_config(const std::vector<std::string>& args, CLI::App& app) {
  if (args.size() < 2) return args;
  CLI::App* sub = nullptr;
  try {
    sub = app.get_subcommand(args[1]);
  } catch (const CLI::OptionNotFound&) {
    return args;
  }
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t k = 2; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> out{args[0], args[1]};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || key == "config") {
      throw UsageError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "on") out.push_back("--" + key);
    } else {
      out.push_back("--" + key);
      out.push_back(value);
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

json phi_json(const ShapleyVector& phi) {
  return json{{"phi", phi.phi}, {"v1_minus_v0", phi.v1_minus_v0}};
}

void add_game_options(CLI::App* sub, Options& o) {
  sub->add_option("--game", o.game,
                  "additive:1,2,3[@offset] | voting:quota:w1,w2,... | glove | "
                  "interaction[:seed] | external:<command>")
      ->capture_default_str();
  sub->add_option("--n", o.n, "player count (default 10 for interaction games)");
}

void add_sampling_options(CLI::App* sub, Options& o) {
  sub->add_option("--paired", o.paired, "override paired sampling")
      ->check(CLI::IsMember({"on", "off"}));
  sub->add_option("--replacement", o.replacement, "override sampling with/without replacement")
      ->check(CLI::IsMember({"with", "without"}));
  sub->add_option("--solver", o.solver, "override the regression solver")
      ->check(CLI::IsMember({"projected", "lagrange"}));
  sub->add_flag("--deterministic-counts", o.deterministic_counts,
                "use expected per-size pair counts instead of binomial draws");
}

void add_sweep_options(CLI::App* sub, Options& o, bool with_estimators) {
  add_game_options(sub, o);
  if (with_estimators) {
    sub->add_option("--estimator", o.estimator,
                    "comma-separated list of leverage, kernel, kernel_optimized (default all)");
    add_sampling_options(sub, o);
  }
  sub->add_option("--m-grid", o.m_grid, "budgets, e.g. 5n,10n,2^n (default 5n,10n,...,160n)");
  sub->add_option("--seeds", o.seeds, "seeds per cell")->capture_default_str()->check(
      CLI::PositiveNumber);
  sub->add_option("--seed", o.seed, "first seed")->capture_default_str();
  sub->add_option("--jobs", o.jobs, "worker threads (default: all cores)")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out", o.out, "CSV output path")->required();
  sub->add_option("--summary", o.summary, "JSON summary output path");
  sub->add_flag("--timing", o.timing, "fill the wall_ms column (output is then not reproducible)");
  sub->add_option("--config", o.config, "key = value file of options; flags on the command line win");
}

void emit_diagnostics(const Options& o, const EstimateResult& r, std::ostream& err) {
  json d{{"estimator", r.config.label()},
         {"seed", r.seed},
         {"m", r.config.m},
         {"evals_used", r.evals_used},
         {"rows_per_size", r.rows_per_size},
         {"resamples", r.resamples},
         {"solver", r.diagnostics.solver},
         {"rows", r.diagnostics.rows},
         {"rank", r.diagnostics.rank},
         {"rcond", r.diagnostics.rcond},
         {"rank_deficient", r.diagnostics.rank_deficient}};
  d["c"] = r.c ? json(*r.c) : json(nullptr);
  if (r.config.family == Family::kernel_optimized) {
    d["note"] = "size-enumeration budget rule reconstructed from its prose description";
  }
  if (o.diagnostics.empty()) {
    err << d.dump() << '\n';
    return;
  }
  std::ofstream f(o.diagnostics);
  if (!f) throw std::runtime_error("cannot write " + o.diagnostics);
  f << d.dump(2) << '\n';
}

int cmd_estimate(const Options& o, std::ostream& out, std::ostream& err) {
  EstimatorConfig config;
  OraclePtr oracle;
  try {
    if (o.m <= 0) throw DomainError("--m is required and must be positive");
    const auto configs = resolve_estimators(o, false);
    if (configs.size() != 1) throw DomainError("estimate takes exactly one --estimator");
    config = configs[0];
    const int n = resolve_players(o);
    config.validate(n);
    oracle = make_game(o.game, n);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const EstimateResult r = estimate(*oracle, config);
  json j = phi_json(r.phi);
  j["estimator"] = config.label();
  out << j.dump() << '\n';
  emit_diagnostics(o, r, err);
  return kExitOk;
}

int cmd_exact(const Options& o, std::ostream& out) {
  OraclePtr oracle;
  try {
    oracle = make_game(o.game, resolve_players(o));
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  const ShapleyVector phi = exact_shapley(*oracle);
  out << phi_json(phi).dump() << '\n';
  return kExitOk;
}

enum class Sweep { size, noise, gamma, ablate };

int cmd_sweep(Sweep kind, const Options& o, std::ostream& err) {
  ExperimentSpec spec;
  try {
    spec.game = o.game;
    spec.n = kind == Sweep::gamma ? (o.n > 0 ? o.n : 10) : resolve_players(o);
    spec.estimators = kind == Sweep::ablate ? ablation_cells(0) : resolve_estimators(o, true);
    spec.m_grid = o.m_grid.empty() ? default_m_grid(spec.n) : parse_m_grid(o.m_grid, spec.n);
    if (kind == Sweep::noise) {
      spec.sigma_grid = o.sigma_grid.empty() ? default_sigma_grid() : parse_real_grid(o.sigma_grid);
    }
    if (kind == Sweep::gamma) {
      spec.gamma_grid = o.gamma_grid.empty() ? default_gamma_grid() : parse_real_grid(o.gamma_grid);
      if (spec.n > kMaxFullSystemPlayers) {
        throw DomainError("sweep-gamma needs --n <= " + std::to_string(kMaxFullSystemPlayers));
      }
    }
    spec.seeds = o.seeds;
    spec.first_seed = o.seed;
    spec.game_seed = o.game_seed;
    spec.jobs = o.jobs;
    spec.timing = o.timing;
    spec.validate();
    if (kind != Sweep::gamma && !is_external(o.game)) make_game(o.game, spec.n);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }

  std::vector<MetricRow> rows;
  switch (kind) {
    case Sweep::size: rows = run_size_sweep(spec); break;
    case Sweep::noise: rows = run_noise_sweep(spec); break;
    case Sweep::gamma: rows = run_gamma_sweep(spec); break;
    case Sweep::ablate: rows = run_ablation(spec); break;
  }

  {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    write_csv(f, rows);
  }
  if (!o.summary.empty()) {
    std::vector<std::string> warnings;
    const auto summary = aggregate(rows, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    std::ofstream f(o.summary);
    if (!f) throw std::runtime_error("cannot write " + o.summary);
    write_summary_json(f, summary);
  }

  std::size_t failed = 0;
  for (const auto& r : rows) {
    if (r.error.empty()) continue;
    if (failed < 5) {
      err << "cell failed (" << r.estimator << ", m=" << r.m << ", seed=" << r.seed
          << "): " << r.error << '\n';
    }
    ++failed;
  }
  if (failed > 0) err << failed << " of " << rows.size() << " cells failed\n";
  return failed == rows.size() ? kExitFailure : kExitOk;
}

struct IdentityCheck {
  std::string name;
  double tolerance;
  double worst = 0.0;
};

std::vector<double> random_on_hyperplane(int n, double total, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> x(static_cast<std::size_t>(n));
  double sum = 0.0;
  for (double& v : x) {
    v = normal(rng);
    sum += v;
  }
  for (double& v : x) v += (total - sum) / n;
  return x;
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.max_n < 2 || o.max_n > 12) throw UsageError("--max-n must lie in [2, 12]");
  IdentityCheck equivalence{"shapley_equals_regression", 1e-8};
  IdentityCheck leverage{"leverage_scores", 1e-10};
  IdentityCheck gram{"gram_equals_projection", 1e-10};
  IdentityCheck norm{"error_norm_identity", 1e-8};

  WeightFunction weight;
  if (o.corrupt_weights) {
    weight = [](int n, int s) { return shapley_weight(n, s) * (1.0 + 0.25 * s); };
  }
  std::mt19937_64 rng(12345);

  out << std::setw(3) << "n";
  for (const auto* c : {&equivalence, &leverage, &gram, &norm}) out << "  " << std::setw(26) << c->name;
  out << '\n';
  for (int n = 2; n <= o.max_n; ++n) {
    // Every fixture that exists at this n, plus a few random quadratic games.
    std::vector<OraclePtr> games;
    std::vector<double> coef;
    for (int i = 1; i <= n; ++i) coef.push_back(static_cast<double>(i));
    games.push_back(additive_game(coef, 0.5));
    games.push_back(voting_game(coef, 0.5 * n * (n + 1) / 2.0));
    if (n == 3) games.push_back(glove_game());
    for (std::uint64_t seed = 0; seed < 3; ++seed) games.push_back(interaction_game(n, 100 * n + seed));

    double eq_dev = 0.0;
    for (const auto& g : games) {
      const ShapleyVector brute = exact_shapley(*g);
      const ShapleyVector reg = solve_full_lagrange(build_full_system(*g, weight));
      for (int i = 0; i < n; ++i) {
        eq_dev = std::max(eq_dev, std::abs(brute.phi[static_cast<std::size_t>(i)] -
                                           reg.phi[static_cast<std::size_t>(i)]));
      }
    }
    const FullSystem design = build_design(n);
    const double lev_dev = leverage_score_deviation(design);
    const double gram_dev = gram_deviation(design);
    double norm_dev = 0.0;
    for (int t = 0; t < 5; ++t) {
      const auto a = random_on_hyperplane(n, 1.0, rng);
      const auto b = random_on_hyperplane(n, 1.0, rng);
      norm_dev = std::max(norm_dev, norm_identity_gap(design, a, b));
    }

    const double devs[] = {eq_dev, lev_dev, gram_dev, norm_dev};
    IdentityCheck* checks[] = {&equivalence, &leverage, &gram, &norm};
    out << std::setw(3) << n;
    for (int k = 0; k < 4; ++k) {
      checks[k]->worst = std::max(checks[k]->worst, devs[k]);
      std::ostringstream cell;
      cell << std::scientific << std::setprecision(3) << devs[k];
      out << "  " << std::setw(26) << cell.str();
    }
    out << '\n';
  }

  bool ok = true;
  for (const auto* c : {&equivalence, &leverage, &gram, &norm}) {
    const bool pass = c->worst <= c->tolerance;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << c->name << " max deviation " << c->worst
        << " (tolerance " << c->tolerance << ")\n";
    if (!pass) err << "identity failed: " << c->name << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

std::vector<std::int64_t> parse_m_grid(std::string_view text, int n) {
  std::vector<std::int64_t> out;
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) throw DomainError("m grid: empty entry");
    std::int64_t m = 0;
    if (tok == "2^n") {
      if (n >= 62) throw DomainError("m grid: 2^n overflows for n=" + std::to_string(n));
      m = std::int64_t{1} << n;
    } else if (tok.back() == 'n') {
      std::string_view k(tok.data(), tok.size() - 1);
      if (!k.empty() && k.back() == '*') k.remove_suffix(1);
      m = (k.empty() ? 1 : parse_int(k, "m grid")) * n;
    } else {
      m = parse_int(tok, "m grid");
    }
    if (m <= 0) throw DomainError("m grid: entries must be positive");
    out.push_back(m);
  }
  return out;
}

std::vector<double> parse_real_grid(std::string_view text) {
  std::vector<double> out;
  for (const auto& tok : split(text, ',')) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (tok.empty() || ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw DomainError("grid: '" + tok + "' is not a number");
    }
    out.push_back(x);
  }
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Shapley value estimation by leverage score sampling"};
  app.name(args.empty() ? "levshap" : args[0]);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  auto* estimate = app.add_subcommand("estimate", "estimate Shapley values for one game");
  add_game_options(estimate, o);
  estimate->add_option("--estimator", o.estimator, "leverage | kernel | kernel_optimized")
      ->capture_default_str();
  estimate->add_option("--m", o.m, "evaluation budget (at least n)")->required();
  estimate->add_option("--seed", o.seed, "random seed")->capture_default_str();
  add_sampling_options(estimate, o);
  estimate->add_option("--diagnostics", o.diagnostics, "write diagnostics JSON here, not stderr");
  estimate->add_option("--config", o.config, "key = value file of options; flags on the command line win");

  auto* exact = app.add_subcommand("exact", "brute-force Shapley values (n <= 22)");
  add_game_options(exact, o);

  auto* sweep_size = app.add_subcommand("sweep-size", "error against the budget m");
  add_sweep_options(sweep_size, o, true);
  auto* sweep_noise = app.add_subcommand("sweep-noise", "error against evaluation noise sigma");
  add_sweep_options(sweep_noise, o, true);
  sweep_noise->add_option("--sigma-grid", o.sigma_grid, "comma-separated sigmas");
  auto* sweep_gamma = app.add_subcommand("sweep-gamma", "error against the residual ratio gamma");
  add_sweep_options(sweep_gamma, o, true);
  sweep_gamma->add_option("--gamma-grid", o.gamma_grid, "comma-separated gamma targets");
  sweep_gamma->add_option("--game-seed", o.game_seed, "seed for the constructed games");
  auto* ablate = app.add_subcommand("ablate", "paired/replacement/distribution ablation grid");
  add_sweep_options(ablate, o, false);

  auto* verify = app.add_subcommand("verify", "check the exact regression identities");
  verify->add_option("--max-n", o.max_n, "largest n to check")->capture_default_str();
  verify->add_flag("--corrupt-weights", o.corrupt_weights)->group("");

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(args, app);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  std::vector<const char*> argv;
  for (const auto& a : expanded) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("levshap");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*estimate) return cmd_estimate(o, out, err);
    if (*exact) return cmd_exact(o, out);
    if (*sweep_size) return cmd_sweep(Sweep::size, o, err);
    if (*sweep_noise) return cmd_sweep(Sweep::noise, o, err);
    if (*sweep_gamma) return cmd_sweep(Sweep::gamma, o, err);
    if (*ablate) return cmd_sweep(Sweep::ablate, o, err);
    if (*verify) return cmd_verify(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace levshap
