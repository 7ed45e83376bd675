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

#ifndef STANCEBOT_NULLMODEL_H_
#define STANCEBOT_NULLMODEL_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "stancebot/anomaly.h"
#include "stancebot/classifier.h"

namespace stancebot {

// fraction[k-1] is the share of apruebo among the k most anomalous accounts
// with a disclosed stance.
struct StanceCurve {
  std::vector<AccountId> accounts;  // rank order, undisclosed removed
  std::vector<double> fraction;

  std::size_t size() const { return fraction.size(); }
};

// Prefix-share curve of a 0/1 sequence.
std::vector<double> prefix_fraction(std::span<const char> is_apruebo);

// Throws InvalidArgument when the ranking is empty, when the ranking and the
// predictions cover different accounts, or when no disclosed account remains.
StanceCurve stance_anomaly_curve(std::span<const AnomalyRecord> ranking,
                                 std::span<const StancePrediction> predictions);

struct PermutationEnvelope {
  std::vector<double> observed;
  std::vector<double> lo;  // 2.5th percentile per k
  std::vector<double> hi;  // 97.5th percentile per k
  std::vector<char> outside;

  double inside_fraction() const;
  // Length of the longest run of consecutive out-of-band k.
  std::size_t longest_outside_run() const;
};

struct EnvelopeParams {
  int permutations = 100;
  double lower_percentile = 2.5;
  double upper_percentile = 97.5;
};

// Linear-interpolation percentile of unsorted data, p in [0, 100].
double percentile(std::vector<double> data, double p);

// Shuffles the stance sequence `permutations` times (per-permutation seeds
// derived from `seed`) and bands the resulting curves pointwise. Bounds are
// inclusive. Throws InvalidArgument if permutations < 2.
PermutationEnvelope permutation_envelope(std::span<const char> is_apruebo,
                                         const EnvelopeParams& params,
                                         std::uint64_t seed);

PermutationEnvelope permutation_envelope(
    std::span<const AnomalyRecord> ranking,
    std::span<const StancePrediction> predictions, const EnvelopeParams& params,
    std::uint64_t seed);

// k, account_id, observed, lo, hi, outside
void write_envelope_csv(const StanceCurve& curve,
                        const PermutationEnvelope& envelope, std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_NULLMODEL_H_
