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

#include "stancebot/botcrit.h"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "stancebot/csv.h"
#include "stancebot/nullmodel.h"

namespace stancebot {
namespace {

std::size_t stance_slot(PredictedStance s) { return static_cast<std::size_t>(s); }

}  // namespace

int AnomalyGroups::of(AccountId id) const {
  const auto it = group.find(id);
  return it == group.end() ? -1 : it->second;
}

AnomalyGroups assign_anomaly_groups(std::span<const AnomalyRecord> records,
                                    const GroupParams& params) {
  if (records.size() < 5) {
    throw InvalidArgument("anomaly groups need at least 5 accounts");
  }
  if (!(params.top_fraction > 0.0 && params.top_fraction < 1.0)) {
    throw InvalidArgument("anomaly group fraction must lie in (0, 1)");
  }
  std::vector<const AnomalyRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
    return a->score != b->score ? a->score > b->score : a->account < b->account;
  });

  const std::size_t n = order.size();
  const auto top = std::min(
      n - 1, static_cast<std::size_t>(std::ceil(
                 params.top_fraction * static_cast<double>(n) - 1e-9)));
  AnomalyGroups g;
  g.group.reserve(n);
  for (std::size_t i = 0; i < top; ++i) g.group.emplace(order[i]->account, 0);
  g.sizes[0] = top;

  double lo = order[top]->score, hi = order[top]->score;
  for (std::size_t i = top; i < n; ++i) {
    lo = std::min(lo, order[i]->score);
    hi = std::max(hi, order[i]->score);
  }
  const double width = (hi - lo) / 4.0;
  for (std::size_t e = 0; e < kNumAnomalyGroups; ++e) {
    g.edges[e] = lo + width * static_cast<double>(e);
  }
  g.edges[4] = hi;
  for (std::size_t i = top; i < n; ++i) {
    const double s = order[i]->score;
    int group = 4;
    if (hi > lo) {
      if (s > g.edges[3]) {
        group = 1;
      } else if (s > g.edges[2]) {
        group = 2;
      } else if (s > g.edges[1]) {
        group = 3;
      }
    }
    g.group.emplace(order[i]->account, group);
    ++g.sizes[static_cast<std::size_t>(group)];
  }
  return g;
}

std::size_t digit_count(std::string_view utf8) {
  std::size_t count = 0;
  const auto* s = reinterpret_cast<const std::uint8_t*>(utf8.data());
  const auto length = static_cast<std::int32_t>(utf8.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    if (c >= 0 && u_charType(c) == U_DECIMAL_DIGIT_NUMBER) ++count;
  }
  return count;
}

std::vector<BotVerdict> flag_bots(const AnomalyGroups& groups,
                                  std::span<const AccountRecord> accounts,
                                  const BotParams& params) {
  std::vector<BotVerdict> out;
  out.reserve(groups.group.size());
  for (const auto& a : accounts) {
    const int group = groups.of(a.id);
    if (group < 0) continue;
    BotVerdict v{a.id, false, 0};
    if (group == 0) v.reasons |= kReasonAnomalyGroup;
    if (day_of(a.created_at) >= params.cutoff) v.reasons |= kReasonRegistration;
    if (digit_count(a.username) > params.digit_threshold) {
      v.reasons |= kReasonDigits;
    }
    v.is_bot = v.reasons == kReasonAll;
    out.push_back(v);
  }
  return out;
}

std::size_t bot_count(std::span<const BotVerdict> verdicts) {
  return static_cast<std::size_t>(std::count_if(
      verdicts.begin(), verdicts.end(), [](const auto& v) { return v.is_bot; }));
}

WeeklyRegistrations registrations_by_week(
    std::span<const AccountRecord> accounts, const AnomalyGroups& groups,
    std::span<const StancePrediction> predictions) {
  std::unordered_map<AccountId, PredictedStance> stance;
  for (const auto& p : predictions) stance.emplace(p.account, p.stance());

  WeeklyRegistrations out;
  std::vector<std::pair<Date, const AccountRecord*>> grouped;
  for (const auto& a : accounts) {
    if (groups.of(a.id) >= 0) {
      grouped.emplace_back(iso_week_start(day_of(a.created_at)), &a);
    }
  }
  if (grouped.empty()) return out;
  const auto [first, last] = std::minmax_element(
      grouped.begin(), grouped.end(),
      [](const auto& x, const auto& y) { return x.first < y.first; });
  for (Date w = first->first; w <= last->first; w += std::chrono::days{7}) {
    out.weeks.push_back(w);
  }
  const std::size_t n = out.weeks.size();
  for (auto& row : out.by_group) row.assign(n, 0);
  for (auto& row : out.by_stance) row.assign(n, 0);
  for (const auto& [week, a] : grouped) {
    const auto w = static_cast<std::size_t>((week - out.weeks.front()).count() / 7);
    ++out.by_group[static_cast<std::size_t>(groups.of(a->id))][w];
    const auto it = stance.find(a->id);
    const PredictedStance s =
        it == stance.end() ? PredictedStance::kUndisclosed : it->second;
    ++out.by_stance[stance_slot(s)][w];
  }
  for (std::size_t s = 0; s < 3; ++s) {
    double total = 0;
    for (const auto c : out.by_stance[s]) total += static_cast<double>(c);
    out.by_stance_normalized[s].assign(n, 0.0);
    if (total == 0) continue;
    for (std::size_t w = 0; w < n; ++w) {
      out.by_stance_normalized[s][w] =
          static_cast<double>(out.by_stance[s][w]) / total;
    }
  }
  return out;
}

std::size_t ContentDistribution::total_accounts() const {
  std::size_t n = 0;
  for (const auto& row : cells) {
    for (const auto& c : row) n += c.accounts;
  }
  return n;
}

std::size_t ContentDistribution::total_tweets() const {
  std::size_t n = 0;
  for (const auto& row : cells) {
    for (const auto& c : row) n += c.tweets;
  }
  return n;
}

ContentDistribution content_distribution(
    std::span<const StancePrediction> predictions,
    std::span<const BotVerdict> verdicts, const Corpus& corpus) {
  std::unordered_set<AccountId> predicted;
  for (const auto& p : predictions) predicted.insert(p.account);
  std::unordered_set<AccountId> bots;
  for (const auto& v : verdicts) {
    if (!predicted.contains(v.account)) {
      throw InvalidArgument("content distribution: account " +
                            v.account.str() + " has no prediction");
    }
    if (v.is_bot) bots.insert(v.account);
  }
  std::unordered_map<AccountId, std::size_t> tweets;
  for (const auto& t : corpus.tweets()) ++tweets[t.author];

  ContentDistribution out;
  for (const auto& p : predictions) {
    ContentCell& cell =
        out.cells[stance_slot(p.stance())][bots.contains(p.account) ? 1 : 0];
    ++cell.accounts;
    if (const auto t = tweets.find(p.account); t != tweets.end()) {
      cell.tweets += t->second;
    }
  }
  return out;
}

std::vector<DigitScoreSummary> score_by_digits(
    std::span<const AnomalyRecord> records) {
  std::map<std::size_t, std::vector<double>> by_digits;
  for (const auto& r : records) {
    by_digits[static_cast<std::size_t>(r.features.username_digits)].push_back(
        r.score);
  }
  std::vector<DigitScoreSummary> out;
  for (auto& [digits, scores] : by_digits) {
    DigitScoreSummary s;
    s.digits = digits;
    s.accounts = scores.size();
    s.min = *std::min_element(scores.begin(), scores.end());
    s.max = *std::max_element(scores.begin(), scores.end());
    s.q25 = percentile(scores, 25.0);
    s.median = percentile(scores, 50.0);
    s.q75 = percentile(scores, 75.0);
    out.push_back(s);
  }
  return out;
}

void write_verdicts_csv(std::span<const BotVerdict> verdicts,
                        const AnomalyGroups& groups, std::ostream& out) {
  csv::Writer w(out);
  w.row({"account_id", "group", "is_bot", "reason_group",
         "reason_registration", "reason_digits"});
  auto flag = [](bool b) { return std::string(b ? "1" : "0"); };
  for (const auto& v : verdicts) {
    w.row({v.account.str(), std::to_string(groups.of(v.account)),
           flag(v.is_bot), flag(v.reasons & kReasonAnomalyGroup),
           flag(v.reasons & kReasonRegistration),
           flag(v.reasons & kReasonDigits)});
  }
}

VerdictTable read_verdicts_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const std::size_t c_id = table.column("account_id");
  const std::size_t c_group = table.column("group");
  const std::size_t c_bot = table.column("is_bot");
  const std::array<std::size_t, 3> c_reason = {
      table.column("reason_group"), table.column("reason_registration"),
      table.column("reason_digits")};
  VerdictTable out;
  for (const auto& row : table.rows()) {
    const auto id = parse_u64(row[c_id]);
    const auto group = parse_u64(row[c_group]);
    if (!id || !group || *group >= kNumAnomalyGroups) {
      throw DataError("verdict table: malformed row");
    }
    BotVerdict v{AccountId{*id}, row[c_bot] == "1", 0};
    for (std::size_t k = 0; k < 3; ++k) {
      if (row[c_reason[k]] == "1") v.reasons |= 1u << k;
    }
    out.groups.group.emplace(v.account, static_cast<int>(*group));
    ++out.groups.sizes[*group];
    out.verdicts.push_back(v);
  }
  return out;
}

void write_registrations_csv(const WeeklyRegistrations& weekly,
                             std::ostream& out) {
  csv::Writer w(out);
  w.row({"week_start", "group_0", "group_1", "group_2", "group_3", "group_4",
         "apruebo", "rechazo", "undisclosed", "apruebo_share", "rechazo_share",
         "undisclosed_share"});
  for (std::size_t i = 0; i < weekly.weeks.size(); ++i) {
    std::vector<std::string> fields{format_date(weekly.weeks[i])};
    for (const auto& row : weekly.by_group) {
      fields.push_back(std::to_string(row[i]));
    }
    for (const auto& row : weekly.by_stance) {
      fields.push_back(std::to_string(row[i]));
    }
    for (const auto& row : weekly.by_stance_normalized) {
      fields.push_back(format_double(row[i]));
    }
    w.row(fields);
  }
}

void write_content_csv(const ContentDistribution& content, std::ostream& out) {
  csv::Writer w(out);
  w.row({"stance", "is_bot", "accounts", "tweets", "account_share",
         "tweet_share"});
  const double na = static_cast<double>(content.total_accounts());
  const double nt = static_cast<double>(content.total_tweets());
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t b = 0; b < 2; ++b) {
      const ContentCell& c = content.cells[s][b];
      w.row({std::string(to_string(static_cast<PredictedStance>(s))),
             b ? "1" : "0", std::to_string(c.accounts), std::to_string(c.tweets),
             format_double(na > 0 ? static_cast<double>(c.accounts) / na : 0.0),
             format_double(nt > 0 ? static_cast<double>(c.tweets) / nt : 0.0)});
    }
  }
}

void write_digit_scores_csv(std::span<const DigitScoreSummary> rows,
                            std::ostream& out) {
  csv::Writer w(out);
  w.row({"digits", "accounts", "min", "q25", "median", "q75", "max"});
  for (const auto& r : rows) {
    w.row({std::to_string(r.digits), std::to_string(r.accounts),
           format_double(r.min), format_double(r.q25), format_double(r.median),
           format_double(r.q75), format_double(r.max)});
  }
}

}  // namespace stancebot
