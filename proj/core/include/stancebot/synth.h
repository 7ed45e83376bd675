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

#ifndef STANCEBOT_SYNTH_H_
#define STANCEBOT_SYNTH_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "stancebot/botcrit.h"
#include "stancebot/classifier.h"
#include "stancebot/corpus.h"
#include "stancebot/netcomm.h"

namespace stancebot {

enum class AccountClass : std::uint8_t {
  kRegularApruebo,
  kRegularRechazo,
  kBotApruebo,
  kBotRechazo,
};

inline constexpr std::size_t kNumAccountClasses = 4;

struct ClassSpec {
  std::size_t count = 0;
  Date registration_start;
  Date registration_end;
  // digit_weights[d]: relative weight of a username with d digits.
  std::vector<double> digit_weights{1.0};
  double default_image_prob = 0.05;
  // Active days are 1 + Geometric(active_day_p), capped at the window.
  double active_day_p = 0.3;
  // Posts on an active day are 1 + Poisson(extra_posts_per_day).
  double extra_posts_per_day = 0.5;
  // original, retweet, quote, reply
  std::array<double, kNumTweetKinds> kind_mix{0.53, 0.32, 0.06, 0.09};
  // Probability that an account writes seed terms of its stance.
  double seed_usage = 0.1;
  // Probability that an interaction targets a same-stance account.
  double homophily = 0.9;
  // Median global counts; each account draws log-normally around them.
  double median_followers = 200;
  double median_friends = 300;
  double median_statuses = 3000;
};

struct SynthSpec {
  DateWindow window;
  // regular apruebo, regular rechazo, bot apruebo, bot rechazo
  std::array<ClassSpec, kNumAccountClasses> classes;
  // Bots of one stance are cut into squads of this size.
  std::size_t squad_size = 10;
  // Share of a squad member's retweets aimed at the squad amplifier.
  double squad_retweet_rate = 0.8;
  // Days on which a squad posts; bot tweets fall only on these days.
  std::size_t burst_days = 3;
  std::size_t stance_vocabulary = 300;
  std::size_t common_vocabulary = 1000;
  std::size_t words_per_tweet = 8;
  // Share of words drawn from the author's stance vocabulary.
  double stance_word_rate = 0.3;
  std::size_t domains_per_stance = 20;
  double home_url_prob = 0.3;

  // Throws InvalidArgument when a count, probability or window is invalid.
  void validate() const;

  // 80/20 stance split, 1% bots registered from 2020-08-08 with at least
  // five username digits, 10% seed-term users, study window
  // 2020-08-01..2020-10-25.
  static SynthSpec reference(std::size_t accounts);

  // Missing keys keep the values of `base`.
  static SynthSpec from_json(const nlohmann::json& j,
                             const SynthSpec& base = reference(0));
  nlohmann::json to_json() const;
};

struct TruthRecord {
  Stance stance = Stance::kApruebo;
  bool is_bot = false;
  int squad = -1;  // -1: not in a squad
  bool seed_user = false;

  friend bool operator==(const TruthRecord&, const TruthRecord&) = default;
};

using GroundTruth = std::map<AccountId, TruthRecord>;

struct SynthOutput {
  Corpus corpus;
  GroundTruth truth;
};

// Deterministic for a given spec and seed.
SynthOutput generate_corpus(const SynthSpec& spec, std::uint64_t seed);

// account_id, stance, is_bot, squad, seed_user
void write_truth_csv(const GroundTruth& truth, std::ostream& out);
GroundTruth read_truth_csv(std::istream& in);

struct EvaluationMetrics {
  std::size_t accounts = 0;
  std::size_t disclosed = 0;
  std::size_t correct = 0;
  // correct / disclosed; NaN when nothing is disclosed
  double stance_accuracy = 0.0;
  double abstention_rate = 0.0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
  // NaN when undefined (no flagged accounts / no planted bots)
  double bot_precision = 0.0;
  double bot_recall = 0.0;
  // NMI between block and squad id over squad members in the partitioned
  // graph; NaN without a partition or without squad members in it.
  double squad_nmi = 0.0;
};

// Throws InvalidArgument when predictions or verdicts cover accounts other
// than the truth's.
EvaluationMetrics evaluate_against_truth(
    std::span<const StancePrediction> predictions,
    std::span<const BotVerdict> verdicts, const GroundTruth& truth,
    const RetweetGraph* graph = nullptr, const Partition* partition = nullptr);

// metric,value rows
void write_metrics_csv(const EvaluationMetrics& m, std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_SYNTH_H_
