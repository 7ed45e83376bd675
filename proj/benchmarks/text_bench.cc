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

#include <string>

#include "stancebot/text.h"

namespace stancebot {
namespace {

void BM_Tokenize(benchmark::State& state) {
  const std::string tweet =
      "RT @usuario: Este 25 de octubre #Apruebo por una nueva Constitución, "
      "más información en https://ejemplo.cl/plebiscito 🇨🇱 #ChileDecide";
  for (auto _ : state) {
    benchmark::DoNotOptimize(text::tokenize(tweet));
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(tweet.size()));
}
BENCHMARK(BM_Tokenize);

void BM_RegistrableDomain(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(text::registrable_domain("www.noticias.gob.cl"));
  }
}
BENCHMARK(BM_RegistrableDomain);

}  // namespace
}  // namespace stancebot
