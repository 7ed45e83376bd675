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

#include "stancebot/synth.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <ostream>
#include <random>
#include <set>

#include "stancebot/csv.h"

namespace stancebot {
namespace {

using std::chrono::days;
using std::chrono::seconds;

constexpr std::array<std::string_view, kNumAccountClasses> kClassNames = {
    "regular_apruebo", "regular_rechazo", "bot_apruebo", "bot_rechazo"};

constexpr std::array<std::array<std::string_view, 3>, 2> kSeedTags = {{
    {"apruebo", "yoapruebo", "votoapruebo"},
    {"rechazo", "yorechazo", "votorechazo"},
}};

constexpr std::array<std::string_view, 16> kFirstNames = {
    "ana",    "juan",  "maria", "pedro",  "camila", "diego", "javiera", "felipe",
    "sofia",  "pablo", "laura", "tomas",  "isabel", "jorge", "paula",   "nicolas"};
constexpr std::array<std::string_view, 16> kLastNames = {
    "gonzalez", "munoz",  "rojas",  "diaz",   "perez",  "soto",
    "contreras", "silva", "martinez", "sepulveda", "morales", "rodriguez",
    "lopez",    "fuentes", "torres", "araya"};

Stance stance_of(AccountClass c) {
  return c == AccountClass::kRegularApruebo || c == AccountClass::kBotApruebo
             ? Stance::kApruebo
             : Stance::kRechazo;
}

bool is_bot_class(AccountClass c) {
  return c == AccountClass::kBotApruebo || c == AccountClass::kBotRechazo;
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

// Sampler over 0..n-1 with weights 1 / (k + 1).
class ZipfSampler {
 public:
  explicit ZipfSampler(std::size_t n) : cdf_(n) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += 1.0 / static_cast<double>(k + 1);
      cdf_[k] = total;
    }
  }
  std::size_t operator()(std::mt19937_64& rng) const {
    const double u =
        std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min(static_cast<std::size_t>(it - cdf_.begin()),
                    cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

// Weighted sampler over a fixed list of account indices.
class PoolSampler {
 public:
  PoolSampler() = default;
  PoolSampler(std::vector<std::size_t> members, std::vector<double> weights)
      : members_(std::move(members)), cdf_(weights.size()) {
    std::partial_sum(weights.begin(), weights.end(), cdf_.begin());
  }
  bool empty() const { return members_.empty(); }
  std::size_t operator()(std::mt19937_64& rng) const {
    const double u =
        std::uniform_real_distribution<double>(0.0, cdf_.back())(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return members_[std::min(static_cast<std::size_t>(it - cdf_.begin()),
                             members_.size() - 1)];
  }

 private:
  std::vector<std::size_t> members_;
  std::vector<double> cdf_;
};

Date random_day(Date lo, Date hi, std::mt19937_64& rng) {
  const auto span = (hi - lo).count();
  return lo + days{std::uniform_int_distribution<long>(0, span)(rng)};
}

Timestamp random_time_on(Date day, Timestamp not_before, std::mt19937_64& rng) {
  const Timestamp start = std::max(Timestamp{day}, not_before);
  const Timestamp end = Timestamp{day + days{1}} - seconds{1};
  const auto span = (end - start).count();
  return start +
         seconds{std::uniform_int_distribution<long>(0, std::max(0L, span))(rng)};
}

std::uint64_t draw_count(double median, std::mt19937_64& rng) {
  if (median <= 0.0) return 0;
  std::lognormal_distribution<double> d(std::log(median), 1.0);
  return static_cast<std::uint64_t>(std::floor(d(rng)));
}

struct PlannedAccount {
  AccountClass cls = AccountClass::kRegularApruebo;
  AccountRecord record;
  bool seed_user = false;
  int squad = -1;
};

std::string stance_word(Stance s, std::size_t k) {
  return (s == Stance::kApruebo ? "apv" : "rev") + std::to_string(k);
}

std::string date_string(Date d) { return format_date(d); }

Date json_date(const nlohmann::json& j, const char* key, Date fallback) {
  if (!j.contains(key)) return fallback;
  const auto d = parse_date(j.at(key).get<std::string>());
  if (!d) {
    throw InvalidArgument(std::string("synth spec: bad date for '") + key + "'");
  }
  return *d;
}

}  // namespace

void SynthSpec::validate() const {
  if (window.start > window.end) {
    throw InvalidArgument("synth spec: window start after end");
  }
  for (std::size_t c = 0; c < kNumAccountClasses; ++c) {
    const ClassSpec& s = classes[c];
    const std::string name(kClassNames[c]);
    if (s.count == 0) continue;
    if (s.registration_start > s.registration_end) {
      throw InvalidArgument("synth spec: " + name + " registration window is empty");
    }
    if (s.registration_end > window.end) {
      throw InvalidArgument("synth spec: " + name +
                            " registrations end after the study window");
    }
    const double digit_total =
        std::accumulate(s.digit_weights.begin(), s.digit_weights.end(), 0.0);
    if (s.digit_weights.empty() || !(digit_total > 0.0) ||
        std::any_of(s.digit_weights.begin(), s.digit_weights.end(),
                    [](double w) { return !(w >= 0.0); })) {
      throw InvalidArgument("synth spec: " + name + " digit weights invalid");
    }
    const double kind_total =
        std::accumulate(s.kind_mix.begin(), s.kind_mix.end(), 0.0);
    if (!(kind_total > 0.0) ||
        std::any_of(s.kind_mix.begin(), s.kind_mix.end(),
                    [](double w) { return !(w >= 0.0); })) {
      throw InvalidArgument("synth spec: " + name + " kind mix invalid");
    }
    if (!is_probability(s.default_image_prob) || !is_probability(s.seed_usage) ||
        !is_probability(s.homophily) || !(s.active_day_p > 0.0) ||
        !(s.active_day_p <= 1.0) || !(s.extra_posts_per_day >= 0.0) ||
        !(s.median_followers >= 0) || !(s.median_friends >= 0) ||
        !(s.median_statuses >= 0)) {
      throw InvalidArgument("synth spec: " + name + " has an invalid parameter");
    }
  }
  if (squad_size == 0 || !is_probability(squad_retweet_rate) ||
      burst_days == 0 || stance_vocabulary == 0 || common_vocabulary == 0 ||
      words_per_tweet == 0 || !is_probability(stance_word_rate) ||
      domains_per_stance == 0 || !is_probability(home_url_prob)) {
    throw InvalidArgument("synth spec: invalid global parameter");
  }
}

SynthSpec SynthSpec::reference(std::size_t accounts) {
  using std::chrono::year;
  SynthSpec s;
  s.window = DateWindow{year{2020} / 8 / 1, year{2020} / 10 / 25};

  ClassSpec regular;
  regular.registration_start = year{2008} / 1 / 1;
  regular.registration_end = year{2020} / 9 / 30;
  regular.digit_weights = {0.45, 0.05, 0.2, 0.05, 0.2, 0.03, 0.02};

  ClassSpec bot;
  bot.registration_start = year{2020} / 8 / 8;
  bot.registration_end = year{2020} / 10 / 10;
  bot.digit_weights = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};
  bot.default_image_prob = 0.7;
  bot.extra_posts_per_day = 12.0;
  bot.kind_mix = {0.15, 0.75, 0.05, 0.05};
  bot.homophily = 0.95;
  bot.median_followers = 15;
  bot.median_friends = 800;
  bot.median_statuses = 2500;

  const auto n = static_cast<double>(accounts);
  const auto bots = static_cast<std::size_t>(std::llround(0.01 * n));
  const auto bot_apruebo =
      static_cast<std::size_t>(std::llround(0.4 * static_cast<double>(bots)));
  const auto apruebo = static_cast<std::size_t>(std::llround(0.8 * n));
  const std::size_t regular_apruebo =
      apruebo > bot_apruebo ? apruebo - bot_apruebo : 0;

  s.classes = {regular, regular, bot, bot};
  s.classes[0].count = regular_apruebo;
  s.classes[2].count = bot_apruebo;
  s.classes[3].count = bots - bot_apruebo;
  s.classes[1].count = accounts - regular_apruebo - bots;
  return s;
}

SynthSpec SynthSpec::from_json(const nlohmann::json& j, const SynthSpec& base) {
  if (!j.is_object()) throw InvalidArgument("synth spec must be an object");
  SynthSpec s = base;
  try {
    if (j.contains("window")) {
      const auto& w = j.at("window");
      s.window.start = json_date(w, "start", s.window.start);
      s.window.end = json_date(w, "end", s.window.end);
    }
    if (j.contains("classes")) {
      const auto& cs = j.at("classes");
      for (std::size_t c = 0; c < kNumAccountClasses; ++c) {
        const std::string key(kClassNames[c]);
        if (!cs.contains(key)) continue;
        const auto& x = cs.at(key);
        ClassSpec& t = s.classes[c];
        t.count = x.value("count", t.count);
        t.registration_start =
            json_date(x, "registration_start", t.registration_start);
        t.registration_end = json_date(x, "registration_end", t.registration_end);
        t.digit_weights = x.value("digit_weights", t.digit_weights);
        t.default_image_prob = x.value("default_image_prob", t.default_image_prob);
        t.active_day_p = x.value("active_day_p", t.active_day_p);
        t.extra_posts_per_day =
            x.value("extra_posts_per_day", t.extra_posts_per_day);
        if (x.contains("kind_mix")) {
          const auto v = x.at("kind_mix").get<std::vector<double>>();
          if (v.size() != kNumTweetKinds) {
            throw InvalidArgument("synth spec: kind_mix needs 4 entries");
          }
          std::copy(v.begin(), v.end(), t.kind_mix.begin());
        }
        t.seed_usage = x.value("seed_usage", t.seed_usage);
        t.homophily = x.value("homophily", t.homophily);
        t.median_followers = x.value("median_followers", t.median_followers);
        t.median_friends = x.value("median_friends", t.median_friends);
        t.median_statuses = x.value("median_statuses", t.median_statuses);
      }
    }
    s.squad_size = j.value("squad_size", s.squad_size);
    s.squad_retweet_rate = j.value("squad_retweet_rate", s.squad_retweet_rate);
    s.burst_days = j.value("burst_days", s.burst_days);
    s.stance_vocabulary = j.value("stance_vocabulary", s.stance_vocabulary);
    s.common_vocabulary = j.value("common_vocabulary", s.common_vocabulary);
    s.words_per_tweet = j.value("words_per_tweet", s.words_per_tweet);
    s.stance_word_rate = j.value("stance_word_rate", s.stance_word_rate);
    s.domains_per_stance = j.value("domains_per_stance", s.domains_per_stance);
    s.home_url_prob = j.value("home_url_prob", s.home_url_prob);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json SynthSpec::to_json() const {
  nlohmann::json j;
  j["window"] = {{"start", date_string(window.start)},
                 {"end", date_string(window.end)}};
  nlohmann::json cs = nlohmann::json::object();
  for (std::size_t c = 0; c < kNumAccountClasses; ++c) {
    const ClassSpec& t = classes[c];
    cs[std::string(kClassNames[c])] = {
        {"count", t.count},
        {"registration_start", date_string(t.registration_start)},
        {"registration_end", date_string(t.registration_end)},
        {"digit_weights", t.digit_weights},
        {"default_image_prob", t.default_image_prob},
        {"active_day_p", t.active_day_p},
        {"extra_posts_per_day", t.extra_posts_per_day},
        {"kind_mix", std::vector<double>(t.kind_mix.begin(), t.kind_mix.end())},
        {"seed_usage", t.seed_usage},
        {"homophily", t.homophily},
        {"median_followers", t.median_followers},
        {"median_friends", t.median_friends},
        {"median_statuses", t.median_statuses}};
  }
  j["classes"] = cs;
  j["squad_size"] = squad_size;
  j["squad_retweet_rate"] = squad_retweet_rate;
  j["burst_days"] = burst_days;
  j["stance_vocabulary"] = stance_vocabulary;
  j["common_vocabulary"] = common_vocabulary;
  j["words_per_tweet"] = words_per_tweet;
  j["stance_word_rate"] = stance_word_rate;
  j["domains_per_stance"] = domains_per_stance;
  j["home_url_prob"] = home_url_prob;
  return j;
}

SynthOutput generate_corpus(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::size_t n = 0;
  for (const auto& c : spec.classes) n += c.count;
  SynthOutput out;
  if (n == 0) {
    out.corpus = Corpus::create({}, {}, spec.window);
    return out;
  }

  // Layout: class of each account slot, popularity order, squads.
  std::mt19937_64 layout(derive_seed(seed, "layout"));
  std::vector<AccountClass> cls;
  cls.reserve(n);
  for (std::size_t c = 0; c < kNumAccountClasses; ++c) {
    cls.insert(cls.end(), spec.classes[c].count, static_cast<AccountClass>(c));
  }
  std::shuffle(cls.begin(), cls.end(), layout);

  const std::uint64_t profile_seed = derive_seed(seed, "profile");
  const std::uint64_t tweet_seed = derive_seed(seed, "tweets");
  const ZipfSampler stance_words(spec.stance_vocabulary);
  const ZipfSampler common_words(spec.common_vocabulary);
  std::vector<PlannedAccount> plan(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(profile_seed, i));
    PlannedAccount& p = plan[i];
    const ClassSpec& cs = spec.classes[static_cast<std::size_t>(cls[i])];
    const Stance stance = stance_of(cls[i]);
    p.cls = cls[i];
    AccountRecord& a = p.record;
    a.id = AccountId{100000 + i};

    const Date reg = random_day(cs.registration_start, cs.registration_end, rng);
    a.created_at = random_time_on(reg, Timestamp{reg}, rng);

    std::discrete_distribution<std::size_t> digits(cs.digit_weights.begin(),
                                                   cs.digit_weights.end());
    const std::size_t nd = digits(rng);
    const std::size_t nl = std::uniform_int_distribution<std::size_t>(4, 8)(rng);
    for (std::size_t k = 0; k < nl; ++k) {
      a.username += static_cast<char>('a' + std::uniform_int_distribution<int>(0, 25)(rng));
    }
    for (std::size_t k = 0; k < nd; ++k) {
      a.username += static_cast<char>('0' + std::uniform_int_distribution<int>(0, 9)(rng));
    }

    p.seed_user = std::bernoulli_distribution(cs.seed_usage)(rng);
    std::uniform_int_distribution<std::size_t> name_pick(0, kFirstNames.size() - 1);
    a.full_name = std::string(kFirstNames[name_pick(rng)]) + " " +
                  std::string(kLastNames[name_pick(rng)]);
    if (p.seed_user && std::bernoulli_distribution(0.3)(rng)) {
      a.full_name += " #";
      a.full_name += kSeedTags[static_cast<std::size_t>(stance)]
                              [std::uniform_int_distribution<int>(0, 2)(rng)];
    }

    const std::size_t bio_words = std::uniform_int_distribution<std::size_t>(0, 6)(rng);
    for (std::size_t k = 0; k < bio_words; ++k) {
      if (!a.bio.empty()) a.bio += ' ';
      a.bio += std::bernoulli_distribution(spec.stance_word_rate)(rng)
                   ? stance_word(stance, stance_words(rng))
                   : "com" + std::to_string(common_words(rng));
    }

    if (std::bernoulli_distribution(spec.home_url_prob)(rng)) {
      const std::size_t k = std::uniform_int_distribution<std::size_t>(
          0, spec.domains_per_stance - 1)(rng);
      if (std::bernoulli_distribution(0.5)(rng)) {
        a.home_url = "https://www." +
                     std::string(stance == Stance::kApruebo ? "apv" : "rev") +
                     "site" + std::to_string(k) + ".cl/" + a.username;
      } else {
        a.home_url = "https://comsite" + std::to_string(k) + ".com/" + a.username;
      }
    }
    a.followers = draw_count(cs.median_followers, rng);
    a.friends = draw_count(cs.median_friends, rng);
    a.statuses = draw_count(cs.median_statuses, rng);
    a.default_profile_image = std::bernoulli_distribution(cs.default_image_prob)(rng);
  }

  // Squads: bots of one stance in account order, cut into fixed-size groups.
  struct Squad {
    std::vector<std::size_t> members;
    std::vector<Date> days;
  };
  std::vector<Squad> squads;
  for (const auto bot_class : {AccountClass::kBotApruebo, AccountClass::kBotRechazo}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (plan[i].cls == bot_class) members.push_back(i);
    }
    for (std::size_t k = 0; k < members.size(); k += spec.squad_size) {
      Squad sq;
      sq.members.assign(members.begin() + static_cast<std::ptrdiff_t>(k),
                        members.begin() + static_cast<std::ptrdiff_t>(
                                              std::min(k + spec.squad_size,
                                                       members.size())));
      Date first = spec.window.start;
      for (const auto m : sq.members) {
        plan[m].squad = static_cast<int>(squads.size());
        first = std::max(first, day_of(plan[m].record.created_at));
      }
      std::vector<Date> all;
      for (Date d = first; d <= spec.window.end; d += days{1}) all.push_back(d);
      std::shuffle(all.begin(), all.end(), layout);
      all.resize(std::min(all.size(), spec.burst_days));
      std::sort(all.begin(), all.end());
      sq.days = std::move(all);
      squads.push_back(std::move(sq));
    }
  }

  // Interaction targets: regular accounts of each stance, Zipf popularity
  // over a random order.
  std::array<PoolSampler, 2> pools;
  for (std::size_t s = 0; s < 2; ++s) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_bot_class(plan[i].cls) &&
          static_cast<std::size_t>(stance_of(plan[i].cls)) == s) {
        members.push_back(i);
      }
    }
    std::shuffle(members.begin(), members.end(), layout);
    std::vector<double> weights(members.size());
    for (std::size_t k = 0; k < members.size(); ++k) {
      weights[k] = 1.0 / std::pow(static_cast<double>(k + 1), 0.8);
    }
    pools[s] = PoolSampler(std::move(members), std::move(weights));
  }

  std::vector<TweetRecord> tweets;
  for (std::size_t i = 0; i < n; ++i) {
    std::mt19937_64 rng(derive_seed(tweet_seed, i));
    const PlannedAccount& p = plan[i];
    const ClassSpec& cs = spec.classes[static_cast<std::size_t>(p.cls)];
    const Stance stance = stance_of(p.cls);
    const Date first_day = std::max(spec.window.start, day_of(p.record.created_at));

    std::vector<Date> active;
    if (p.squad >= 0) {
      active = squads[static_cast<std::size_t>(p.squad)].days;
    } else {
      std::vector<Date> all;
      for (Date d = first_day; d <= spec.window.end; d += days{1}) all.push_back(d);
      const std::size_t want = std::min<std::size_t>(
          all.size(),
          1 + std::geometric_distribution<std::size_t>(cs.active_day_p)(rng));
      for (std::size_t k = 0; k < want; ++k) {
        std::swap(all[k], all[std::uniform_int_distribution<std::size_t>(
                              k, all.size() - 1)(rng)]);
      }
      all.resize(want);
      std::sort(all.begin(), all.end());
      active = std::move(all);
    }

    std::discrete_distribution<int> kind_draw(cs.kind_mix.begin(), cs.kind_mix.end());
    std::poisson_distribution<int> extra(cs.extra_posts_per_day);
    auto pick_target = [&]() -> std::optional<std::size_t> {
      const std::size_t own = static_cast<std::size_t>(stance);
      const bool same = std::bernoulli_distribution(cs.homophily)(rng);
      const PoolSampler* pool = &pools[same ? own : 1 - own];
      if (pool->empty()) pool = &pools[same ? 1 - own : own];
      if (pool->empty()) return std::nullopt;
      for (int attempt = 0; attempt < 10; ++attempt) {
        const std::size_t t = (*pool)(rng);
        if (t != i) return t;
      }
      return std::nullopt;
    };

    std::size_t serial = 0;
    bool seed_written = false;
    for (const Date day : active) {
      const int posts = 1 + extra(rng);
      for (int k = 0; k < posts; ++k) {
        TweetRecord t;
        t.id = TweetId{1'000'000'000'000ULL + i * 1'000'000ULL + serial++};
        t.author = p.record.id;
        t.created_at = random_time_on(day, p.record.created_at, rng);
        t.kind = static_cast<TweetKind>(kind_draw(rng));
        if (t.kind != TweetKind::kOriginal) {
          std::optional<std::size_t> target;
          if (p.squad >= 0 && t.kind == TweetKind::kRetweet &&
              std::bernoulli_distribution(spec.squad_retweet_rate)(rng)) {
            const auto& members = squads[static_cast<std::size_t>(p.squad)].members;
            if (members.front() != i) {
              target = members.front();
            } else if (members.size() > 1) {
              target = members[std::uniform_int_distribution<std::size_t>(
                  1, members.size() - 1)(rng)];
            }
          }
          if (!target) target = pick_target();
          if (target) {
            t.target = plan[*target].record.id;
          } else {
            t.kind = TweetKind::kOriginal;
          }
        }
        for (std::size_t w = 0; w < spec.words_per_tweet; ++w) {
          if (!t.text.empty()) t.text += ' ';
          t.text += std::bernoulli_distribution(spec.stance_word_rate)(rng)
                        ? stance_word(stance, stance_words(rng))
                        : "com" + std::to_string(common_words(rng));
        }
        if (p.seed_user &&
            (!seed_written || std::bernoulli_distribution(0.5)(rng))) {
          const std::string tag(kSeedTags[static_cast<std::size_t>(stance)]
                                         [std::uniform_int_distribution<int>(0, 2)(rng)]);
          t.text += " #" + tag;
          t.hashtags.push_back(tag);
          seed_written = true;
        }
        tweets.push_back(std::move(t));
      }
    }
  }

  std::vector<AccountRecord> accounts;
  accounts.reserve(n);
  for (const auto& p : plan) {
    accounts.push_back(p.record);
    out.truth.emplace(p.record.id,
                      TruthRecord{stance_of(p.cls), is_bot_class(p.cls),
                                  p.squad, p.seed_user});
  }
  out.corpus = Corpus::create(std::move(accounts), std::move(tweets), spec.window);
  return out;
}

void write_truth_csv(const GroundTruth& truth, std::ostream& out) {
  csv::Writer w(out);
  w.row({"account_id", "stance", "is_bot", "squad", "seed_user"});
  for (const auto& [id, t] : truth) {
    w.row({id.str(), std::string(to_string(t.stance)), t.is_bot ? "1" : "0",
           std::to_string(t.squad), t.seed_user ? "1" : "0"});
  }
}

GroundTruth read_truth_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const std::size_t c_id = table.column("account_id");
  const std::size_t c_stance = table.column("stance");
  const std::size_t c_bot = table.column("is_bot");
  const std::size_t c_squad = table.column("squad");
  const std::size_t c_seed = table.column("seed_user");
  GroundTruth truth;
  for (const auto& row : table.rows()) {
    const auto id = parse_u64(row[c_id]);
    const auto stance = parse_stance(row[c_stance]);
    if (!id || !stance) throw DataError("truth table: malformed row");
    int squad = -1;
    try {
      squad = std::stoi(row[c_squad]);
    } catch (const std::exception&) {
      throw DataError("truth table: malformed squad");
    }
    truth.emplace(AccountId{*id},
                  TruthRecord{*stance, row[c_bot] == "1", squad,
                              row[c_seed] == "1"});
  }
  return truth;
}

EvaluationMetrics evaluate_against_truth(
    std::span<const StancePrediction> predictions,
    std::span<const BotVerdict> verdicts, const GroundTruth& truth,
    const RetweetGraph* graph, const Partition* partition) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  EvaluationMetrics m;
  m.accounts = truth.size();

  std::set<AccountId> seen;
  for (const auto& p : predictions) {
    const auto it = truth.find(p.account);
    if (it == truth.end() || !seen.insert(p.account).second) {
      throw InvalidArgument("evaluation: prediction for unknown or repeated "
                            "account " + p.account.str());
    }
    const PredictedStance s = p.stance();
    if (s == PredictedStance::kUndisclosed) continue;
    ++m.disclosed;
    if (s == from_stance(it->second.stance)) ++m.correct;
  }
  if (seen.size() != truth.size()) {
    throw InvalidArgument("evaluation: predictions do not cover every account");
  }
  m.stance_accuracy = m.disclosed > 0 ? static_cast<double>(m.correct) /
                                            static_cast<double>(m.disclosed)
                                      : kNaN;
  m.abstention_rate =
      m.accounts > 0 ? 1.0 - static_cast<double>(m.disclosed) /
                                 static_cast<double>(m.accounts)
                     : kNaN;

  seen.clear();
  for (const auto& v : verdicts) {
    const auto it = truth.find(v.account);
    if (it == truth.end() || !seen.insert(v.account).second) {
      throw InvalidArgument("evaluation: verdict for unknown or repeated "
                            "account " + v.account.str());
    }
    if (v.is_bot && it->second.is_bot) ++m.true_positives;
    if (v.is_bot && !it->second.is_bot) ++m.false_positives;
    if (!v.is_bot && it->second.is_bot) ++m.false_negatives;
  }
  if (!verdicts.empty() && seen.size() != truth.size()) {
    throw InvalidArgument("evaluation: verdicts do not cover every account");
  }
  const auto tp = static_cast<double>(m.true_positives);
  const std::size_t flagged = m.true_positives + m.false_positives;
  const std::size_t planted = m.true_positives + m.false_negatives;
  m.bot_precision = flagged > 0 ? tp / static_cast<double>(flagged) : kNaN;
  m.bot_recall = planted > 0 ? tp / static_cast<double>(planted) : kNaN;

  m.squad_nmi = kNaN;
  if (graph && partition) {
    std::vector<std::uint32_t> blocks, squads;
    for (std::size_t v = 0; v < graph->node_count(); ++v) {
      const auto it = truth.find(graph->nodes()[v]);
      if (it == truth.end() || it->second.squad < 0) continue;
      blocks.push_back(partition->block[v]);
      squads.push_back(static_cast<std::uint32_t>(it->second.squad));
    }
    if (!blocks.empty()) m.squad_nmi = normalized_mutual_information(blocks, squads);
  }
  return m;
}

void write_metrics_csv(const EvaluationMetrics& m, std::ostream& out) {
  csv::Writer w(out);
  w.row({"metric", "value"});
  w.row({"accounts", std::to_string(m.accounts)});
  w.row({"disclosed", std::to_string(m.disclosed)});
  w.row({"correct", std::to_string(m.correct)});
  w.row({"stance_accuracy", format_double(m.stance_accuracy)});
  w.row({"abstention_rate", format_double(m.abstention_rate)});
  w.row({"true_positives", std::to_string(m.true_positives)});
  w.row({"false_positives", std::to_string(m.false_positives)});
  w.row({"false_negatives", std::to_string(m.false_negatives)});
  w.row({"bot_precision", format_double(m.bot_precision)});
  w.row({"bot_recall", format_double(m.bot_recall)});
  w.row({"squad_nmi", format_double(m.squad_nmi)});
}

}  // namespace stancebot
