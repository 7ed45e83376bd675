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

#include "stancebot/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <unordered_set>

#include "stancebot/csv.h"

namespace stancebot {

std::string_view to_string(TweetKind kind) {
  switch (kind) {
    case TweetKind::kOriginal:
      return "original";
    case TweetKind::kRetweet:
      return "retweet";
    case TweetKind::kQuote:
      return "quote";
    case TweetKind::kReply:
      return "reply";
  }
  return "original";
}

std::optional<TweetKind> parse_tweet_kind(std::string_view text) {
  if (text == "original") return TweetKind::kOriginal;
  if (text == "retweet") return TweetKind::kRetweet;
  if (text == "quote") return TweetKind::kQuote;
  if (text == "reply") return TweetKind::kReply;
  return std::nullopt;
}

Corpus Corpus::create(std::vector<AccountRecord> accounts,
                      std::vector<TweetRecord> tweets, DateWindow window) {
  if (window.start > window.end && !(accounts.empty() && tweets.empty())) {
    throw InvalidArgument("corpus window start is after its end");
  }
  Corpus corpus;
  std::sort(accounts.begin(), accounts.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (!corpus.index_.emplace(accounts[i].id, i).second) {
      throw DataError("duplicate account id " + accounts[i].id.str());
    }
    if (day_of(accounts[i].created_at) > window.end) {
      throw DataError("account " + accounts[i].id.str() +
                      " registered after the corpus window");
    }
  }
  std::sort(tweets.begin(), tweets.end(), [](const auto& a, const auto& b) {
    return a.created_at != b.created_at ? a.created_at < b.created_at
                                        : a.id < b.id;
  });
  std::unordered_set<TweetId> seen;
  seen.reserve(tweets.size());
  for (const auto& t : tweets) {
    if (!seen.insert(t.id).second) {
      throw DataError("duplicate tweet id " + t.id.str());
    }
    if (!corpus.index_.contains(t.author)) {
      throw DataError("tweet " + t.id.str() + " has unknown author " +
                      t.author.str());
    }
    if ((t.kind != TweetKind::kOriginal) != t.target.has_value()) {
      throw DataError("tweet " + t.id.str() +
                      ": target must be present exactly for non-original "
                      "tweets");
    }
    if (!window.contains(t.created_at)) {
      throw DataError("tweet " + t.id.str() + " outside the corpus window");
    }
  }
  corpus.accounts_ = std::move(accounts);
  corpus.tweets_ = std::move(tweets);
  corpus.window_ = window;
  return corpus;
}

const AccountRecord* Corpus::find_account(AccountId id) const {
  const auto it = index_.find(id);
  return it == index_.end() ? nullptr : &accounts_[it->second];
}

std::optional<std::size_t> Corpus::account_index(AccountId id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> Corpus::tweets_per_account() const {
  std::vector<std::size_t> counts(accounts_.size(), 0);
  for (const auto& t : tweets_) ++counts[index_.at(t.author)];
  return counts;
}

namespace {

using nlohmann::json;

std::optional<std::uint64_t> json_id(const json& v) {
  if (v.is_string()) return parse_u64(v.get_ref<const std::string&>());
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  return std::nullopt;
}

std::uint64_t json_count(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (!it->is_number_unsigned()) {
    throw DataError(std::string("'") + key + "' must be a non-negative integer");
  }
  return it->get<std::uint64_t>();
}

std::string json_string(const json& obj, const char* key, bool required) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) throw DataError(std::string("missing '") + key + "'");
    return {};
  }
  if (!it->is_string()) {
    throw DataError(std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

Timestamp json_time(const json& obj, const char* key) {
  const auto ts = parse_timestamp(json_string(obj, key, true));
  if (!ts) throw DataError(std::string("'") + key + "' is not ISO-8601");
  return *ts;
}

struct ParsedLine {
  TweetRecord tweet;
  AccountRecord author;
};

ParsedLine parse_line(const std::string& line) {
  const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) throw DataError("invalid JSON");
  if (!obj.is_object()) throw DataError("line is not a JSON object");

  ParsedLine out;
  const auto tid = obj.contains("tweet_id") ? json_id(obj["tweet_id"])
                                            : std::nullopt;
  if (!tid) throw DataError("missing or invalid 'tweet_id'");
  out.tweet.id = TweetId{*tid};

  const auto author_it = obj.find("author");
  if (author_it == obj.end() || !author_it->is_object()) {
    throw DataError("missing 'author' object");
  }
  const json& a = *author_it;
  const auto aid = a.contains("id") ? json_id(a["id"]) : std::nullopt;
  if (!aid) throw DataError("missing or invalid 'author.id'");
  out.author.id = AccountId{*aid};
  out.author.username = json_string(a, "username", true);
  out.author.full_name = json_string(a, "name", false);
  out.author.bio = json_string(a, "bio", false);
  if (auto url = json_string(a, "url", false); !url.empty()) {
    out.author.home_url = std::move(url);
  }
  out.author.created_at = json_time(a, "created_at");
  out.author.followers = json_count(a, "followers");
  out.author.friends = json_count(a, "friends");
  out.author.statuses = json_count(a, "statuses");
  if (const auto it = a.find("default_profile_image");
      it != a.end() && !it->is_null()) {
    if (!it->is_boolean()) {
      throw DataError("'default_profile_image' must be a boolean");
    }
    out.author.default_profile_image = it->get<bool>();
  }

  out.tweet.author = out.author.id;
  out.tweet.created_at = json_time(obj, "created_at");
  const auto kind = parse_tweet_kind(json_string(obj, "kind", true));
  if (!kind) throw DataError("unknown 'kind'");
  out.tweet.kind = *kind;
  if (*kind != TweetKind::kOriginal) {
    const auto it = obj.find("target_account_id");
    const auto target =
        it == obj.end() || it->is_null() ? std::nullopt : json_id(*it);
    if (!target) throw DataError("non-original tweet without target");
    out.tweet.target = AccountId{*target};
  }
  out.tweet.text = json_string(obj, "text", true);
  if (const auto it = obj.find("hashtags"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("'hashtags' must be an array");
    for (const auto& h : *it) {
      if (!h.is_string()) throw DataError("'hashtags' entries must be strings");
      out.tweet.hashtags.push_back(h.get<std::string>());
    }
  }
  if (out.author.created_at > out.tweet.created_at) {
    throw DataError("author registered after the tweet was published");
  }
  return out;
}

}  // namespace

Corpus ingest_jsonl(std::istream& in, const IngestOptions& options,
                    IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep = IngestReport{};

  std::vector<TweetRecord> tweets;
  std::unordered_set<TweetId> seen;
  struct Snapshot {
    AccountRecord record;
    Timestamp observed;
  };
  std::unordered_map<AccountId, Snapshot> profiles;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++rep.lines;
    ParsedLine parsed;
    try {
      parsed = parse_line(line);
    } catch (const DataError& e) {
      ++rep.malformed;
      if (rep.warnings.size() < options.max_warnings) {
        rep.warnings.push_back("line " + std::to_string(line_no) + ": " +
                               e.what());
      }
      continue;
    }
    if (!seen.insert(parsed.tweet.id).second) {
      ++rep.duplicates;
      continue;
    }
    auto [it, inserted] = profiles.try_emplace(
        parsed.author.id, Snapshot{parsed.author, parsed.tweet.created_at});
    if (!inserted && parsed.tweet.created_at >= it->second.observed) {
      it->second = Snapshot{parsed.author, parsed.tweet.created_at};
    }
    tweets.push_back(std::move(parsed.tweet));
  }
  if (in.bad()) throw DataError("read error while ingesting corpus");
  if (rep.lines > 0 &&
      static_cast<double>(rep.malformed) >
          options.max_malformed_fraction * static_cast<double>(rep.lines)) {
    std::string msg = std::to_string(rep.malformed) + " of " +
                      std::to_string(rep.lines) + " lines are malformed";
    if (!rep.warnings.empty()) msg += "; first: " + rep.warnings.front();
    throw DataError(msg);
  }

  std::vector<AccountRecord> accounts;
  accounts.reserve(profiles.size());
  for (auto& [id, snap] : profiles) accounts.push_back(std::move(snap.record));

  DateWindow window{};
  if (!tweets.empty()) {
    const auto [lo, hi] = std::minmax_element(
        tweets.begin(), tweets.end(), [](const auto& a, const auto& b) {
          return a.created_at < b.created_at;
        });
    window = DateWindow{day_of(lo->created_at), day_of(hi->created_at)};
  }
  return Corpus::create(std::move(accounts), std::move(tweets), window);
}

Corpus ingest_jsonl(const std::filesystem::path& path,
                    const IngestOptions& options, IngestReport* report) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  return ingest_jsonl(in, options, report);
}

void write_jsonl(const Corpus& corpus, std::ostream& out) {
  using nlohmann::ordered_json;
  for (const auto& t : corpus.tweets()) {
    const AccountRecord& a = *corpus.find_account(t.author);
    ordered_json author;
    author["id"] = a.id.str();
    author["username"] = a.username;
    author["name"] = a.full_name;
    author["bio"] = a.bio;
    author["url"] = a.home_url ? ordered_json(*a.home_url) : ordered_json();
    author["created_at"] = format_timestamp(a.created_at);
    author["followers"] = a.followers;
    author["friends"] = a.friends;
    author["statuses"] = a.statuses;
    author["default_profile_image"] = a.default_profile_image;

    ordered_json obj;
    obj["tweet_id"] = t.id.str();
    obj["author"] = std::move(author);
    obj["created_at"] = format_timestamp(t.created_at);
    obj["kind"] = std::string(to_string(t.kind));
    obj["target_account_id"] =
        t.target ? ordered_json(t.target->str()) : ordered_json();
    obj["text"] = t.text;
    obj["hashtags"] = t.hashtags;
    out << obj.dump() << '\n';
  }
}

void write_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_jsonl(corpus, out);
}

Corpus filter_corpus(const Corpus& corpus, DateWindow window) {
  if (window.start > window.end) {
    throw InvalidArgument("filter window start " + format_date(window.start) +
                          " is after end " + format_date(window.end));
  }
  std::vector<TweetRecord> tweets;
  std::unordered_set<AccountId> active;
  for (const auto& t : corpus.tweets()) {
    if (window.contains(t.created_at)) {
      tweets.push_back(t);
      active.insert(t.author);
    }
  }
  std::vector<AccountRecord> accounts;
  for (const auto& a : corpus.accounts()) {
    if (active.contains(a.id)) accounts.push_back(a);
  }
  return Corpus::create(std::move(accounts), std::move(tweets), window);
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.n_tweets = corpus.tweets().size();
  stats.n_accounts = corpus.accounts().size();
  std::map<Date, std::size_t> weeks;
  for (const auto& t : corpus.tweets()) {
    ++stats.kind_counts[static_cast<std::size_t>(t.kind)];
    ++weeks[iso_week_start(day_of(t.created_at))];
  }
  if (stats.n_tweets > 0) {
    for (std::size_t k = 0; k < kNumTweetKinds; ++k) {
      stats.kind_fractions[k] = static_cast<double>(stats.kind_counts[k]) /
                                static_cast<double>(stats.n_tweets);
    }
  }
  for (const auto& [week, count] : weeks) {
    stats.weekly.push_back(WeeklyVolume{week, count});
  }
  return stats;
}

void write_kind_stats_csv(const CorpusStats& stats, std::ostream& out) {
  csv::Writer w(out);
  w.row({"kind", "count", "fraction"});
  for (std::size_t k = 0; k < kNumTweetKinds; ++k) {
    w.row({std::string(to_string(static_cast<TweetKind>(k))),
           std::to_string(stats.kind_counts[k]),
           format_double(stats.kind_fractions[k])});
  }
  w.row({"total", std::to_string(stats.n_tweets), stats.n_tweets > 0 ? "1" : "0"});
  w.row({"accounts", std::to_string(stats.n_accounts), ""});
}

void write_weekly_volume_csv(const CorpusStats& stats, std::ostream& out) {
  csv::Writer w(out);
  w.row({"week_start", "tweets"});
  for (const auto& wv : stats.weekly) {
    w.row({format_date(wv.week_start), std::to_string(wv.tweets)});
  }
}

}  // namespace stancebot
