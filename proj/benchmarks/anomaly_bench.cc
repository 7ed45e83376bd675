/*
 * Copyright 2026 The Stancebot Authors.
 *
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

#include <benchmark/benchmark.h>

#include <random>

#include "stancebot/anomaly.h"

namespace stancebot {
namespace {

DenseMatrix gaussian(std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z;
  DenseMatrix m(rows, cols);
  for (auto& v : m.data) v = z(rng);
  return m;
}

void BM_FitIsolationForest(benchmark::State& state) {
  const auto x = gaussian(static_cast<std::size_t>(state.range(0)), 15);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_iforest(x, {}, 7));
  }
}
BENCHMARK(BM_FitIsolationForest)->Arg(1000)->Arg(10000);

void BM_ScoreRows(benchmark::State& state) {
  const auto x = gaussian(static_cast<std::size_t>(state.range(0)), 15);
  const auto model = fit_iforest(x, {}, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(score_rows(model, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ScoreRows)->Arg(1000)->Arg(10000);

}  // namespace
}  // namespace stancebot
