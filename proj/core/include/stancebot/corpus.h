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

#ifndef STANCEBOT_CORPUS_H_
#define STANCEBOT_CORPUS_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stancebot/common.h"

namespace stancebot {

enum class TweetKind : std::uint8_t {
  kOriginal = 0,
  kRetweet = 1,
  kQuote = 2,
  kReply = 3,
};
inline constexpr std::size_t kNumTweetKinds = 4;

std::string_view to_string(TweetKind kind);
std::optional<TweetKind> parse_tweet_kind(std::string_view text);

struct TweetRecord {
  TweetId id;
  AccountId author;
  Timestamp created_at;
  TweetKind kind = TweetKind::kOriginal;
  // The retweeted / quoted / replied-to author. Present iff kind != original.
  std::optional<AccountId> target;
  std::string text;
  std::vector<std::string> hashtags;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct AccountRecord {
  AccountId id;
  std::string username;
  std::string full_name;
  std::string bio;
  std::optional<std::string> home_url;
  Timestamp created_at;
  std::uint64_t followers = 0;
  std::uint64_t friends = 0;
  std::uint64_t statuses = 0;
  bool default_profile_image = false;

  friend bool operator==(const AccountRecord&, const AccountRecord&) = default;
};

// Immutable collection of accounts and their tweets.
//
// Invariants (checked by `Corpus::create`):
//   - account ids are unique, accounts are sorted by id;
//   - tweet ids are unique, tweets are sorted by (created_at, id);
//   - every tweet author resolves to an account;
//   - non-original tweets carry a target;
//   - tweets and account registrations fall inside the window end.
class Corpus {
 public:
  Corpus() = default;

  static Corpus create(std::vector<AccountRecord> accounts,
                       std::vector<TweetRecord> tweets, DateWindow window);

  std::span<const AccountRecord> accounts() const { return accounts_; }
  std::span<const TweetRecord> tweets() const { return tweets_; }
  const DateWindow& window() const { return window_; }

  const AccountRecord* find_account(AccountId id) const;
  // Position of the account in `accounts()`, i.e. the canonical row order.
  std::optional<std::size_t> account_index(AccountId id) const;

  // Number of tweets authored by each account, aligned with `accounts()`.
  std::vector<std::size_t> tweets_per_account() const;

  bool empty() const { return tweets_.empty() && accounts_.empty(); }

 private:
  std::vector<AccountRecord> accounts_;
  std::vector<TweetRecord> tweets_;
  std::unordered_map<AccountId, std::size_t> index_;
  DateWindow window_{};
};

struct IngestOptions {
  // Ingestion fails when more than this fraction of non-blank lines is
  // malformed.
  double max_malformed_fraction = 0.5;
  // Number of per-line diagnostics kept in the report.
  std::size_t max_warnings = 20;
};

struct IngestReport {
  std::size_t lines = 0;
  std::size_t malformed = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> warnings;
};

// Reads the line-delimited tweet schema. Malformed lines are skipped and
// counted, duplicate tweet ids keep their first occurrence, and each account
// keeps the profile snapshot attached to its most recent tweet. The window
// of the result spans the first to the last tweet day.
Corpus ingest_jsonl(std::istream& in, const IngestOptions& options = {},
                    IngestReport* report = nullptr);
Corpus ingest_jsonl(const std::filesystem::path& path,
                    const IngestOptions& options = {},
                    IngestReport* report = nullptr);

// Writes one line per tweet, embedding the author's profile.
void write_jsonl(const Corpus& corpus, std::ostream& out);
void write_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Keeps tweets whose UTC day lies in `window` and drops accounts left
// without tweets. Throws InvalidArgument if window.start > window.end.
Corpus filter_corpus(const Corpus& corpus, DateWindow window);

struct WeeklyVolume {
  Date week_start;  // ISO week Monday
  std::size_t tweets = 0;
};

struct CorpusStats {
  std::size_t n_tweets = 0;
  std::size_t n_accounts = 0;
  std::array<std::size_t, kNumTweetKinds> kind_counts{};
  std::array<double, kNumTweetKinds> kind_fractions{};
  std::vector<WeeklyVolume> weekly;
};

CorpusStats corpus_stats(const Corpus& corpus);

// kind,count,fraction
void write_kind_stats_csv(const CorpusStats& stats, std::ostream& out);
// week_start,tweets
void write_weekly_volume_csv(const CorpusStats& stats, std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_CORPUS_H_
