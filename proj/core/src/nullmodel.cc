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

#include "stancebot/nullmodel.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <unordered_map>

#include "stancebot/csv.h"

namespace stancebot {
namespace {

std::vector<char> disclosed_sequence(
    std::span<const AnomalyRecord> ranking,
    std::span<const StancePrediction> predictions,
    std::vector<AccountId>* accounts) {
  if (ranking.empty()) throw InvalidArgument("null model: empty ranking");
  std::unordered_map<AccountId, PredictedStance> stance;
  stance.reserve(predictions.size());
  for (const auto& p : predictions) stance.emplace(p.account, p.stance());
  if (stance.size() != ranking.size()) {
    throw InvalidArgument(
        "null model: ranking and predictions cover different accounts");
  }
  std::vector<char> seq;
  for (const auto& r : ranking) {
    const auto it = stance.find(r.account);
    if (it == stance.end()) {
      throw InvalidArgument("null model: account " + r.account.str() +
                            " has no prediction");
    }
    if (it->second == PredictedStance::kUndisclosed) continue;
    seq.push_back(it->second == PredictedStance::kApruebo ? 1 : 0);
    if (accounts) accounts->push_back(r.account);
  }
  if (seq.empty()) {
    throw InvalidArgument("null model: no account has a disclosed stance");
  }
  return seq;
}

}  // namespace

std::vector<double> prefix_fraction(std::span<const char> is_apruebo) {
  std::vector<double> out(is_apruebo.size());
  std::size_t running = 0;
  for (std::size_t k = 0; k < is_apruebo.size(); ++k) {
    running += is_apruebo[k] ? 1 : 0;
    out[k] = static_cast<double>(running) / static_cast<double>(k + 1);
  }
  return out;
}

StanceCurve stance_anomaly_curve(
    std::span<const AnomalyRecord> ranking,
    std::span<const StancePrediction> predictions) {
  StanceCurve curve;
  const auto seq = disclosed_sequence(ranking, predictions, &curve.accounts);
  curve.fraction = prefix_fraction(seq);
  return curve;
}

double PermutationEnvelope::inside_fraction() const {
  if (outside.empty()) return 1.0;
  const auto n = std::count(outside.begin(), outside.end(), 0);
  return static_cast<double>(n) / static_cast<double>(outside.size());
}

std::size_t PermutationEnvelope::longest_outside_run() const {
  std::size_t best = 0, run = 0;
  for (const char o : outside) {
    run = o ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

double percentile(std::vector<double> data, double p) {
  if (data.empty()) throw InvalidArgument("percentile of empty data");
  if (!(p >= 0.0 && p <= 100.0)) {
    throw InvalidArgument("percentile must lie in [0, 100]");
  }
  std::sort(data.begin(), data.end());
  const double pos = p / 100.0 * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return data[lo] + (data[hi] - data[lo]) * frac;
}

PermutationEnvelope permutation_envelope(std::span<const char> is_apruebo,
                                         const EnvelopeParams& params,
                                         std::uint64_t seed) {
  if (params.permutations < 2) {
    throw InvalidArgument("null model needs at least 2 permutations");
  }
  const std::size_t n = is_apruebo.size();
  const auto m = static_cast<std::size_t>(params.permutations);
  // curves[k * m + j]: permutation j at prefix length k + 1
  std::vector<double> curves(n * m);
  std::vector<char> shuffled(is_apruebo.begin(), is_apruebo.end());
  for (std::size_t j = 0; j < m; ++j) {
    std::mt19937_64 rng(derive_seed(seed, j));
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto curve = prefix_fraction(shuffled);
    for (std::size_t k = 0; k < n; ++k) curves[k * m + j] = curve[k];
  }

  PermutationEnvelope env;
  env.observed = prefix_fraction(is_apruebo);
  env.lo.resize(n);
  env.hi.resize(n);
  env.outside.resize(n);
  std::vector<double> column(m);
  for (std::size_t k = 0; k < n; ++k) {
    std::copy_n(curves.begin() + static_cast<std::ptrdiff_t>(k * m), m,
                column.begin());
    env.lo[k] = percentile(column, params.lower_percentile);
    env.hi[k] = percentile(column, params.upper_percentile);
    env.outside[k] =
        env.observed[k] < env.lo[k] || env.observed[k] > env.hi[k] ? 1 : 0;
  }
  return env;
}

PermutationEnvelope permutation_envelope(
    std::span<const AnomalyRecord> ranking,
    std::span<const StancePrediction> predictions, const EnvelopeParams& params,
    std::uint64_t seed) {
  const auto seq = disclosed_sequence(ranking, predictions, nullptr);
  return permutation_envelope(seq, params, seed);
}

void write_envelope_csv(const StanceCurve& curve,
                        const PermutationEnvelope& envelope,
                        std::ostream& out) {
  csv::Writer w(out);
  w.row({"k", "account_id", "observed", "lo", "hi", "outside"});
  for (std::size_t k = 0; k < envelope.observed.size(); ++k) {
    w.row({std::to_string(k + 1),
           k < curve.accounts.size() ? curve.accounts[k].str() : "",
           format_double(envelope.observed[k]), format_double(envelope.lo[k]),
           format_double(envelope.hi[k]), envelope.outside[k] ? "1" : "0"});
  }
}

}  // namespace stancebot
