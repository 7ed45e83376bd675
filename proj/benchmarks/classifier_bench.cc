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

#include "stancebot/classifier.h"

namespace stancebot {
namespace {

void BM_TrainGbt(benchmark::State& state) {
  const std::size_t rows = 2000, cols = 200;
  std::mt19937_64 rng(3);
  std::bernoulli_distribution on(0.05);
  std::vector<double> dense(rows * cols, 0.0);
  std::vector<int> y(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = static_cast<int>(r % 2);
    for (std::size_t c = 0; c < cols; ++c) {
      if (on(rng) || (c == r % 7 && y[r])) dense[r * cols + c] = 1.0;
    }
  }
  const auto x = SparseMatrix::from_dense(rows, cols, dense);
  GbtParams params;
  params.rounds = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_gbt(x, y, params, 5));
  }
}
BENCHMARK(BM_TrainGbt)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stancebot
