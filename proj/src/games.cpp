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

#include "levshap/games.hpp"

#include <charconv>
#include <cmath>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <unordered_map>
#include <utility>

#include "levshap/errors.hpp"

namespace levshap {

ValueOracle::ValueOracle(int n, std::string label, bool self_counting)
    : n_(n), label_(std::move(label)), self_counting_(self_counting) {
  if (n < 1) throw DomainError("ValueOracle: need at least one player");
}

std::vector<double> ValueOracle::eval_batch(std::span<const SubsetMask> masks) {
  for (const auto& mask : masks) {
    if (mask.size() != n_) {
      throw DomainError("ValueOracle '" + label_ + "': mask has " +
                        std::to_string(mask.size()) + " players, expected " +
                        std::to_string(n_));
    }
  }
  auto values = do_eval(masks);
  if (values.size() != masks.size()) {
    throw EvaluationError("ValueOracle '" + label_ + "': returned " +
                          std::to_string(values.size()) + " values for " +
                          std::to_string(masks.size()) + " masks");
  }
  if (!self_counting_) record_evaluations(static_cast<std::int64_t>(masks.size()));
  return values;
}

double ValueOracle::eval(const SubsetMask& mask) {
  return eval_batch(std::span<const SubsetMask>(&mask, 1)).front();
}

namespace {

class AdditiveGame final : public ValueOracle {
 public:
  AdditiveGame(std::vector<double> a, double offset)
      : ValueOracle(static_cast<int>(a.size()), "additive"),
        a_(std::move(a)),
        offset_(offset) {}

  std::optional<std::vector<double>> analytic_shapley() const override { return a_; }

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& mask : masks) {
      double v = offset_;
      for (int p : mask.players()) v += a_[static_cast<std::size_t>(p)];
      out.push_back(v);
    }
    return out;
  }

 private:
  std::vector<double> a_;
  double offset_;
};

class VotingGame final : public ValueOracle {
 public:
  VotingGame(std::vector<double> weights, double quota)
      : ValueOracle(static_cast<int>(weights.size()), "voting"),
        weights_(std::move(weights)),
        quota_(quota) {}

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& mask : masks) {
      double total = 0.0;
      for (int p : mask.players()) total += weights_[static_cast<std::size_t>(p)];
      out.push_back(total >= quota_ ? 1.0 : 0.0);
    }
    return out;
  }

 private:
  std::vector<double> weights_;
  double quota_;
};

class GloveGame final : public ValueOracle {
 public:
  GloveGame() : ValueOracle(3, "glove") {}

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& m : masks) {
      out.push_back(m.test(2) && (m.test(0) || m.test(1)) ? 1.0 : 0.0);
    }
    return out;
  }
};

class QuadraticGame final : public ValueOracle {
 public:
  QuadraticGame(std::vector<double> a, std::vector<double> b, std::string label)
      : ValueOracle(static_cast<int>(a.size()), std::move(label)),
        a_(std::move(a)),
        b_(std::move(b)) {
    const auto n = a_.size();
    if (b_.size() != n * n) {
      throw DomainError("quadratic_game: quadratic term must be n x n");
    }
  }

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    const auto n = a_.size();
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& mask : masks) {
      const auto members = mask.players();
      double v = 0.0;
      for (int i : members) {
        const auto ui = static_cast<std::size_t>(i);
        v += a_[ui];
        for (int j : members) v += b_[ui * n + static_cast<std::size_t>(j)];
      }
      out.push_back(v);
    }
    return out;
  }

 private:
  std::vector<double> a_;
  std::vector<double> b_;
};

class TableGame final : public ValueOracle {
 public:
  TableGame(int n, std::vector<double> values, std::string label)
      : ValueOracle(n, std::move(label)), values_(std::move(values)) {
    if (n > 24) throw CostError("table_game: n > 24 would need > 2^24 entries");
    if (values_.size() != (std::size_t{1} << n)) {
      throw DomainError("table_game: need exactly 2^n values");
    }
  }

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    std::vector<double> out;
    out.reserve(masks.size());
    for (const auto& mask : masks) out.push_back(values_[mask.to_index()]);
    return out;
  }

 private:
  std::vector<double> values_;
};

class NoisyOracle final : public ValueOracle {
 public:
  NoisyOracle(OraclePtr inner, NoiseConfig config)
      : ValueOracle(inner->num_players(), inner->label() + "+noise"),
        inner_(std::move(inner)),
        sigma_(config.sigma),
        rng_(config.seed) {}

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    auto values = inner_->eval_batch(masks);
    if (sigma_ == 0.0) return values;
    std::lock_guard lock(mu_);
    std::normal_distribution<double> noise(0.0, sigma_);
    for (auto& v : values) v += noise(rng_);
    return values;
  }

 private:
  OraclePtr inner_;
  double sigma_;
  std::mutex mu_;
  std::mt19937_64 rng_;
};

class MemoizedOracle final : public ValueOracle {
 public:
  explicit MemoizedOracle(OraclePtr inner)
      : ValueOracle(inner->num_players(), inner->label() + "+memo",
                    /*self_counting=*/true),
        inner_(std::move(inner)) {}

  std::optional<std::vector<double>> analytic_shapley() const override {
    return inner_->analytic_shapley();
  }

 protected:
  std::vector<double> do_eval(std::span<const SubsetMask> masks) override {
    std::vector<double> out(masks.size());
    std::vector<std::size_t> missing;
    {
      std::shared_lock lock(mu_);
      for (std::size_t k = 0; k < masks.size(); ++k) {
        auto it = cache_.find(masks[k]);
        if (it == cache_.end()) {
          missing.push_back(k);
        } else {
          out[k] = it->second;
        }
      }
    }
    if (missing.empty()) return out;

    // Deduplicate misses within the batch before calling the inner oracle.
    std::vector<SubsetMask> unique;
    std::unordered_map<SubsetMask, std::size_t, SubsetMaskHash> slot;
    for (auto k : missing) {
      if (slot.emplace(masks[k], unique.size()).second) unique.push_back(masks[k]);
    }
    const auto values = inner_->eval_batch(unique);
    std::int64_t inserted = 0;
    {
      std::unique_lock lock(mu_);
      for (std::size_t u = 0; u < unique.size(); ++u) {
        if (cache_.emplace(unique[u], values[u]).second) ++inserted;
      }
    }
    record_evaluations(inserted);
    for (auto k : missing) out[k] = values[slot.at(masks[k])];
    return out;
  }

 private:
  OraclePtr inner_;
  std::shared_mutex mu_;
  std::unordered_map<SubsetMask, double, SubsetMaskHash> cache_;
};

std::vector<double> parse_doubles(std::string_view text, const char* what) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto token = text.substr(0, comma);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || token.empty()) {
      throw DomainError(std::string(what) + ": bad number '" + std::string(token) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void check_n(std::optional<int> n, int actual, std::string_view spec) {
  if (n && *n != actual) {
    throw DomainError("game '" + std::string(spec) + "' has " + std::to_string(actual) +
                      " players but n=" + std::to_string(*n) + " was requested");
  }
}

}  // namespace

OraclePtr additive_game(std::vector<double> coefficients, double offset) {
  if (coefficients.size() < 2) throw DomainError("additive_game: need n >= 2");
  return std::make_shared<AdditiveGame>(std::move(coefficients), offset);
}

OraclePtr voting_game(std::vector<double> weights, double quota) {
  if (!(quota > 0.0)) throw DomainError("voting_game: quota must be positive");
  for (double w : weights) {
    if (w < 0.0) throw DomainError("voting_game: weights must be nonnegative");
  }
  if (weights.empty()) throw DomainError("voting_game: need at least one player");
  return std::make_shared<VotingGame>(std::move(weights), quota);
}

OraclePtr glove_game() { return std::make_shared<GloveGame>(); }

OraclePtr interaction_game(int n, std::uint64_t seed) {
  if (n < 2) throw DomainError("interaction_game: need n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> a(un);
  std::vector<double> b(un * un);
  for (auto& x : a) x = normal(rng);
  for (auto& x : b) x = normal(rng);
  return std::make_shared<QuadraticGame>(
      std::move(a), std::move(b),
      "interaction(" + std::to_string(n) + "," + std::to_string(seed) + ")");
}

OraclePtr quadratic_game(std::vector<double> linear, std::vector<double> quadratic,
                         std::string label) {
  if (linear.size() < 2) throw DomainError("quadratic_game: need n >= 2");
  return std::make_shared<QuadraticGame>(std::move(linear), std::move(quadratic),
                                         std::move(label));
}

OraclePtr table_game(int n, std::vector<double> values, std::string label) {
  return std::make_shared<TableGame>(n, std::move(values), std::move(label));
}

OraclePtr with_noise(OraclePtr inner, NoiseConfig config) {
  if (!(config.sigma >= 0.0)) throw DomainError("with_noise: sigma must be >= 0");
  return std::make_shared<NoisyOracle>(std::move(inner), config);
}

OraclePtr memoized(OraclePtr inner) {
  return std::make_shared<MemoizedOracle>(std::move(inner));
}

OraclePtr make_game(std::string_view spec, std::optional<int> n) {
  const auto colon = spec.find(':');
  const auto name = spec.substr(0, colon);
  const std::string_view params =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);

  if (name == "additive") {
    double offset = 0.0;
    auto coeffs = params;
    if (const auto at = params.find('@'); at != std::string_view::npos) {
      offset = parse_doubles(params.substr(at + 1), "additive offset").at(0);
      coeffs = params.substr(0, at);
    }
    auto a = parse_doubles(coeffs, "additive");
    check_n(n, static_cast<int>(a.size()), spec);
    return additive_game(std::move(a), offset);
  }
  if (name == "voting") {
    const auto sep = params.find(':');
    if (sep == std::string_view::npos) {
      throw DomainError("voting game spec is voting:<quota>:<w1,w2,...>");
    }
    const double quota = parse_doubles(params.substr(0, sep), "voting quota").at(0);
    auto w = parse_doubles(params.substr(sep + 1), "voting weights");
    check_n(n, static_cast<int>(w.size()), spec);
    return voting_game(std::move(w), quota);
  }
  if (name == "glove") {
    check_n(n, 3, spec);
    return glove_game();
  }
  if (name == "interaction") {
    if (!n) throw DomainError("interaction game needs --n");
    std::uint64_t seed = 0;
    if (!params.empty()) {
      auto [ptr, ec] = std::from_chars(params.data(), params.data() + params.size(), seed);
      if (ec != std::errc() || ptr != params.data() + params.size()) {
        throw DomainError("interaction game seed must be a nonnegative integer");
      }
    }
    return interaction_game(*n, seed);
  }
  if (name == "external") {
    if (!n) throw DomainError("external game needs --n");
    std::string command(params);
    if (command.size() >= 2 && command.front() == '"' && command.back() == '"') {
      command = command.substr(1, command.size() - 2);
    }
    if (command.empty()) throw DomainError("external game needs a command");
    return external_oracle(ExternalConfig{command, *n});
  }
  throw DomainError("unknown game '" + std::string(name) + "'");
}

}  // namespace levshap
