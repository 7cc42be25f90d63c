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

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "levshap/mask.hpp"

namespace levshap {

// Black-box set function v : 2^[n] -> R with an evaluation counter.
//
// eval_count() increases by the batch size on every eval_batch call, except for
// oracles that count on their own (the memoizing wrapper counts cache misses).
// Built-in games and the wrappers below are safe to share across threads; the
// noise wrapper serializes batches so its noise stream stays well defined.
class ValueOracle {
 public:
  virtual ~ValueOracle() = default;
  ValueOracle(const ValueOracle&) = delete;
  ValueOracle& operator=(const ValueOracle&) = delete;

  int num_players() const { return n_; }
  const std::string& label() const { return label_; }
  std::int64_t eval_count() const { return count_.load(std::memory_order_relaxed); }

  std::vector<double> eval_batch(std::span<const SubsetMask> masks);
  double eval(const SubsetMask& mask);

  // Closed-form Shapley values when the game has them (additive games).
  virtual std::optional<std::vector<double>> analytic_shapley() const {
    return std::nullopt;
  }

 protected:
  ValueOracle(int n, std::string label, bool self_counting = false);
  virtual std::vector<double> do_eval(std::span<const SubsetMask> masks) = 0;
  void record_evaluations(std::int64_t k) {
    count_.fetch_add(k, std::memory_order_relaxed);
  }

 private:
  int n_;
  std::string label_;
  bool self_counting_;
  std::atomic<std::int64_t> count_{0};
};

using OraclePtr = std::shared_ptr<ValueOracle>;

struct NoiseConfig {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct ExternalConfig {
  std::string command;  // run through /bin/sh -c
  int n = 0;
};

// v(S) = offset + sum_{i in S} a_i.
OraclePtr additive_game(std::vector<double> coefficients, double offset = 0.0);

// v(S) = 1 if sum_{i in S} weight_i >= quota else 0.
OraclePtr voting_game(std::vector<double> weights, double quota);

// Three-player glove game: v(S) = 1 iff player 3 is in S together with at
// least one of players 1, 2.
OraclePtr glove_game();

// v(S) = a^T x_S + x_S^T B x_S with a, B i.i.d. N(0,1) drawn from `seed`.
OraclePtr interaction_game(int n, std::uint64_t seed);

// Same form with explicit coefficients; B is row-major n x n.
OraclePtr quadratic_game(std::vector<double> linear, std::vector<double> quadratic,
                         std::string label);

// Lookup table indexed by SubsetMask::to_index(); needs 2^n entries, n <= 24.
OraclePtr table_game(int n, std::vector<double> values, std::string label);

// v(S) + zeta with zeta ~ N(0, sigma^2) drawn fresh for every evaluation event.
OraclePtr with_noise(OraclePtr inner, NoiseConfig config);

// Serves repeated masks from a cache; eval_count counts distinct masks only.
OraclePtr memoized(OraclePtr inner);

// Child process speaking the line-delimited JSON protocol on stdio.
OraclePtr external_oracle(const ExternalConfig& config);

// Parses a compact game spec:
//   additive:1,2,3[@offset]   voting:quota:w1,w2,...   glove
//   interaction[:seed]        external:<command>
// `n` is required for interaction and external and must match otherwise.
OraclePtr make_game(std::string_view spec, std::optional<int> n);

}  // namespace levshap
