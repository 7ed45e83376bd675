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

#include "stancebot/netcomm.h"

namespace stancebot {
namespace {

RetweetGraph planted(std::size_t n, double p_in, double p_out) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u;
  std::vector<std::tuple<AccountId, AccountId, std::int64_t>> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (u(rng) < ((i < n / 2) == (j < n / 2) ? p_in : p_out)) {
        edges.emplace_back(AccountId{i + 1}, AccountId{j + 1}, 1);
      }
    }
  }
  return extract_lcc(RetweetGraph::from_edges(edges));
}

void BM_ExtractLcc(benchmark::State& state) {
  const auto g = planted(static_cast<std::size_t>(state.range(0)), 0.01, 0.001);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_lcc(g));
  }
}
BENCHMARK(BM_ExtractLcc)->Arg(500)->Arg(2000);

void BM_FitDcsbm(benchmark::State& state) {
  const auto g = planted(static_cast<std::size_t>(state.range(0)), 0.05, 0.005);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_dcsbm(g, {}, 1));
  }
}
BENCHMARK(BM_FitDcsbm)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace stancebot
