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

#ifndef STANCEBOT_BOTCRIT_H_
#define STANCEBOT_BOTCRIT_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stancebot/anomaly.h"
#include "stancebot/classifier.h"
#include "stancebot/corpus.h"

namespace stancebot {

inline constexpr std::size_t kNumAnomalyGroups = 5;

struct GroupParams {
  // Share of accounts placed in group 0.
  double top_fraction = 0.075;
};

struct AnomalyGroups {
  std::unordered_map<AccountId, int> group;
  std::array<std::size_t, kNumAnomalyGroups> sizes{};
  // Interval edges of groups 1-4 over the remaining scores:
  // edges[0] = min, edges[4] = max.
  std::array<double, kNumAnomalyGroups> edges{};

  int of(AccountId id) const;
};

// Group 0 holds the ceil(top_fraction * n) highest-ranked records. The rest
// are split into four equal-width score intervals: group 1 is the highest
// interval, group 4 the lowest. Intervals are (lo, hi] except the lowest,
// which is closed. Throws InvalidArgument for n < 5.
AnomalyGroups assign_anomaly_groups(std::span<const AnomalyRecord> records,
                                    const GroupParams& params = {});

// Number of Unicode decimal digits (general category Nd).
std::size_t digit_count(std::string_view utf8);

enum BotReason : unsigned {
  kReasonAnomalyGroup = 1u << 0,
  kReasonRegistration = 1u << 1,
  kReasonDigits = 1u << 2,
  kReasonAll = kReasonAnomalyGroup | kReasonRegistration | kReasonDigits,
};

struct BotVerdict {
  AccountId account;
  bool is_bot = false;
  unsigned reasons = 0;
};

struct BotParams {
  Date cutoff = std::chrono::sys_days{std::chrono::year{2020} /
                                      std::chrono::August / 8};
  std::size_t digit_threshold = 4;
};

// is_bot iff group 0, registered on or after the cutoff day and more than
// digit_threshold digits in the username. One verdict per grouped account,
// in account order.
std::vector<BotVerdict> flag_bots(const AnomalyGroups& groups,
                                  std::span<const AccountRecord> accounts,
                                  const BotParams& params = {});

std::size_t bot_count(std::span<const BotVerdict> verdicts);

struct WeeklyRegistrations {
  std::vector<Date> weeks;  // ISO week Mondays, ascending, gap-free
  // by_group[g][w]
  std::array<std::vector<std::size_t>, kNumAnomalyGroups> by_group;
  // by_stance[s][w] for apruebo, rechazo, undisclosed
  std::array<std::vector<std::size_t>, 3> by_stance;
  // by_stance rows divided by their totals (all zeros for empty rows)
  std::array<std::vector<double>, 3> by_stance_normalized;
};

// Registrations of grouped accounts by week. Accounts without a prediction
// are counted as undisclosed.
WeeklyRegistrations registrations_by_week(
    std::span<const AccountRecord> accounts, const AnomalyGroups& groups,
    std::span<const StancePrediction> predictions);

struct ContentCell {
  std::size_t accounts = 0;
  std::size_t tweets = 0;
};

// cells[stance][is_bot], stance in apruebo, rechazo, undisclosed order.
struct ContentDistribution {
  std::array<std::array<ContentCell, 2>, 3> cells{};

  std::size_t total_accounts() const;
  std::size_t total_tweets() const;
};

// One entry per prediction; accounts without a verdict count as non-bots.
// Throws InvalidArgument if a verdict names an account without a prediction.
ContentDistribution content_distribution(
    std::span<const StancePrediction> predictions,
    std::span<const BotVerdict> verdicts, const Corpus& corpus);

struct DigitScoreSummary {
  std::size_t digits = 0;
  std::size_t accounts = 0;
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
};

// Score quantiles per username digit count, ascending by digits.
std::vector<DigitScoreSummary> score_by_digits(
    std::span<const AnomalyRecord> records);

// account_id, group, is_bot, reason_group, reason_registration, reason_digits
void write_verdicts_csv(std::span<const BotVerdict> verdicts,
                        const AnomalyGroups& groups, std::ostream& out);
struct VerdictTable {
  std::vector<BotVerdict> verdicts;
  AnomalyGroups groups;  // sizes and memberships; edges are not stored
};
VerdictTable read_verdicts_csv(std::istream& in);

void write_registrations_csv(const WeeklyRegistrations& weekly,
                             std::ostream& out);
void write_content_csv(const ContentDistribution& content, std::ostream& out);
void write_digit_scores_csv(std::span<const DigitScoreSummary> rows,
                            std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_BOTCRIT_H_
