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

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "levshap/kernels.hpp"
#include "levshap/mask.hpp"
#include "levshap/sampling.hpp"

namespace {

struct Rows {
  std::vector<levshap::SubsetMask> masks;
  std::vector<double> weights;
  std::vector<double> targets;
};

Rows random_rows(int n, int m) {
  levshap::Rng rng(7);
  Rows r;
  r.masks = levshap::sample_with_replacement(n, m, levshap::Distribution::leverage, true, rng);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (std::size_t k = 0; k < r.masks.size(); ++k) {
    r.weights.push_back(u(rng));
    r.targets.push_back(u(rng));
  }
  return r;
}

std::vector<double> random_table(int n) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  std::vector<double> v(std::size_t{1} << n);
  for (double& x : v) x = normal(rng);
  return v;
}

void BM_GramSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Rows r = random_rows(n, 10 * n * n);
  for (auto _ : state) {
    auto ne = levshap::kernels::serial::projected_normal_equations(r.masks, r.weights, r.targets);
    benchmark::DoNotOptimize(ne.gram.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.masks.size()));
}

void BM_GramParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Rows r = random_rows(n, 10 * n * n);
  for (auto _ : state) {
    auto ne = levshap::kernels::projected_normal_equations(r.masks, r.weights, r.targets);
    benchmark::DoNotOptimize(ne.gram.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(r.masks.size()));
}

void BM_ShapleyTableSerial(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto v = random_table(n);
  for (auto _ : state) {
    auto phi = levshap::kernels::serial::shapley_from_table(n, v);
    benchmark::DoNotOptimize(phi.data());
  }
}

void BM_ShapleyTableParallel(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto v = random_table(n);
  for (auto _ : state) {
    auto phi = levshap::kernels::shapley_from_table(n, v);
    benchmark::DoNotOptimize(phi.data());
  }
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapleyTableSerial)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ShapleyTableParallel)->Arg(14)->Arg(18)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
