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

#include "stancebot/anomaly.h"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "stancebot/botcrit.h"
#include "stancebot/csv.h"

namespace stancebot {
namespace {

constexpr double kEulerGamma = 0.5772156649;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

double ln1p_count(double count) { return std::log1p(count); }

}  // namespace

InteractionComponents interaction_components(const Corpus& corpus) {
  std::vector<AccountId> nodes;
  std::vector<std::pair<AccountId, AccountId>> edges;
  for (const auto& t : corpus.tweets()) {
    if (t.kind == TweetKind::kOriginal || !t.target || *t.target == t.author) {
      continue;
    }
    edges.emplace_back(t.author, *t.target);
    nodes.push_back(t.author);
    nodes.push_back(*t.target);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto index_of = [&](AccountId id) {
    return static_cast<std::size_t>(
        std::lower_bound(nodes.begin(), nodes.end(), id) - nodes.begin());
  };
  DisjointSets sets(nodes.size());
  for (const auto& [a, b] : edges) sets.unite(index_of(a), index_of(b));

  // Nodes are sorted, so the first member seen is the smallest id.
  std::unordered_map<std::size_t, std::size_t> component_of_root;
  std::vector<std::size_t> sizes;
  std::vector<AccountId> smallest;
  std::vector<std::size_t> component(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t root = sets.find(i);
    auto [it, inserted] = component_of_root.emplace(root, sizes.size());
    if (inserted) {
      sizes.push_back(0);
      smallest.push_back(nodes[i]);
    }
    ++sizes[it->second];
    component[i] = it->second;
  }
  std::vector<std::size_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sizes[a] != sizes[b] ? sizes[a] > sizes[b] : smallest[a] < smallest[b];
  });
  std::vector<std::size_t> rank_of(sizes.size());
  InteractionComponents out;
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank_of[order[r]] = r;
    out.sizes.push_back(sizes[order[r]]);
  }
  out.rank.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out.rank.emplace(nodes[i], rank_of[component[i]]);
  }
  return out;
}

std::array<double, kNumBehaviorFeatures> BehaviorFeatures::values() const {
  return {active_days,     rate_original,   rate_retweet,     rate_quote,
          rate_reply,      daily_rhythm,    ff_ratio,         username_digits,
          default_image,   in_interactions, component_rank,   account_age_days,
          rate_statuses,   rate_friends,    rate_followers};
}

BehaviorFeatures BehaviorFeatures::from_values(std::span<const double> v) {
  if (v.size() != kNumBehaviorFeatures) {
    throw InvalidArgument("behavior feature vector has wrong length");
  }
  BehaviorFeatures f;
  f.active_days = v[0];
  f.rate_original = v[1];
  f.rate_retweet = v[2];
  f.rate_quote = v[3];
  f.rate_reply = v[4];
  f.daily_rhythm = v[5];
  f.ff_ratio = v[6];
  f.username_digits = v[7];
  f.default_image = v[8];
  f.in_interactions = v[9];
  f.component_rank = v[10];
  f.account_age_days = v[11];
  f.rate_statuses = v[12];
  f.rate_friends = v[13];
  f.rate_followers = v[14];
  return f;
}

const std::array<std::string_view, kNumBehaviorFeatures>&
behavior_feature_names() {
  static const std::array<std::string_view, kNumBehaviorFeatures> names = {
      "active_days",     "rate_original",   "rate_retweet",
      "rate_quote",      "rate_reply",      "daily_rhythm",
      "ff_ratio",        "username_digits", "default_image",
      "in_interactions", "component_rank",  "account_age_days",
      "rate_statuses",   "rate_friends",    "rate_followers"};
  return names;
}

std::vector<AccountBehavior> behavior_features(
    const Corpus& corpus, const InteractionComponents& components) {
  const auto accounts = corpus.accounts();
  std::vector<std::vector<Date>> days(accounts.size());
  std::vector<std::array<std::size_t, kNumTweetKinds>> kinds(accounts.size());
  for (const auto& t : corpus.tweets()) {
    const std::size_t row = *corpus.account_index(t.author);
    days[row].push_back(day_of(t.created_at));
    ++kinds[row][static_cast<std::size_t>(t.kind)];
  }

  std::vector<AccountBehavior> out;
  out.reserve(accounts.size());
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (days[i].empty()) continue;
    const AccountRecord& a = accounts[i];
    std::sort(days[i].begin(), days[i].end());
    const double active = static_cast<double>(
        std::unique(days[i].begin(), days[i].end()) - days[i].begin());
    const auto& k = kinds[i];
    const double total = static_cast<double>(days[i].size());

    BehaviorFeatures f;
    f.active_days = active;
    f.rate_original =
        ln1p_count(static_cast<double>(k[static_cast<std::size_t>(TweetKind::kOriginal)])) /
        active;
    f.rate_retweet =
        ln1p_count(static_cast<double>(k[static_cast<std::size_t>(TweetKind::kRetweet)])) /
        active;
    f.rate_quote =
        ln1p_count(static_cast<double>(k[static_cast<std::size_t>(TweetKind::kQuote)])) /
        active;
    f.rate_reply =
        ln1p_count(static_cast<double>(k[static_cast<std::size_t>(TweetKind::kReply)])) /
        active;
    f.daily_rhythm = total / active;
    f.ff_ratio = static_cast<double>(a.friends) /
                 (static_cast<double>(a.followers) + 1.0);
    f.username_digits = static_cast<double>(digit_count(a.username));
    f.default_image = a.default_profile_image ? 1.0 : 0.0;
    if (const auto it = components.rank.find(a.id);
        it != components.rank.end()) {
      f.in_interactions = 1.0;
      f.component_rank = static_cast<double>(it->second);
    } else {
      f.component_rank = static_cast<double>(components.count());
    }
    const auto age =
        (corpus.window().end - day_of(a.created_at)).count();
    f.account_age_days = static_cast<double>(std::max<decltype(age)>(age, 1));
    f.rate_statuses =
        ln1p_count(static_cast<double>(a.statuses)) / f.account_age_days;
    f.rate_friends =
        ln1p_count(static_cast<double>(a.friends)) / f.account_age_days;
    f.rate_followers =
        ln1p_count(static_cast<double>(a.followers)) / f.account_age_days;
    out.push_back(AccountBehavior{a.id, f});
  }
  return out;
}

DenseMatrix behavior_matrix(std::span<const AccountBehavior> rows) {
  DenseMatrix m(rows.size(), kNumBehaviorFeatures);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = rows[i].features.values();
    std::copy(v.begin(), v.end(), m.data.begin() +
                                      static_cast<std::ptrdiff_t>(i * m.cols));
  }
  return m;
}

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n - 1);
  return 2.0 * (std::log(m) + kEulerGamma) - 2.0 * m / static_cast<double>(n);
}

IsolationForestModel::IsolationForestModel(std::size_t num_features,
                                           std::size_t sample_size,
                                           std::vector<IsolationTree> trees)
    : num_features_(num_features),
      sample_size_(sample_size),
      trees_(std::move(trees)) {}

std::size_t IsolationForestModel::height_limit() const {
  return static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(sample_size_))));
}

double IsolationForestModel::mean_path_length(std::span<const double> x) const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    std::size_t id = 0;
    std::size_t depth = 0;
    while (tree.nodes[id].feature >= 0) {
      const IsolationNode& n = tree.nodes[id];
      id = static_cast<std::size_t>(
          x[static_cast<std::size_t>(n.feature)] < n.split ? n.left : n.right);
      ++depth;
    }
    total += static_cast<double>(depth) +
             average_path_length(tree.nodes[id].size);
  }
  return total / static_cast<double>(trees_.size());
}

double IsolationForestModel::score(std::span<const double> x) const {
  return std::exp2(-mean_path_length(x) / average_path_length(sample_size_));
}

IsolationForestModel fit_iforest(const DenseMatrix& x,
                                 const IsolationForestParams& params,
                                 std::uint64_t seed) {
  if (x.rows < 2) {
    throw InvalidArgument("isolation forest needs at least 2 rows");
  }
  if (params.trees < 1 || params.sample_size < 2) {
    throw InvalidArgument("isolation forest needs trees >= 1 and sample >= 2");
  }
  if (x.cols == 0) throw InvalidArgument("isolation forest needs features");
  const std::size_t psi = std::min(params.sample_size, x.rows);
  const auto limit =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));

  std::vector<IsolationTree> trees(static_cast<std::size_t>(params.trees));
  std::vector<std::size_t> pool(x.rows);
  std::vector<std::size_t> usable;
  std::vector<double> lo(x.cols), hi(x.cols);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    std::mt19937_64 rng(derive_seed(seed, t));
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < psi; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, x.rows - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }

    struct Pending {
      std::size_t node, begin, end, depth;
    };
    auto& nodes = trees[t].nodes;
    nodes.push_back(IsolationNode{});
    std::vector<Pending> stack{{0, 0, psi, 0}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      nodes[p.node].size = p.end - p.begin;
      if (p.depth >= limit || p.end - p.begin <= 1) continue;

      std::fill(lo.begin(), lo.end(), INFINITY);
      std::fill(hi.begin(), hi.end(), -INFINITY);
      for (std::size_t i = p.begin; i < p.end; ++i) {
        const auto row = x.row(pool[i]);
        for (std::size_t c = 0; c < x.cols; ++c) {
          lo[c] = std::min(lo[c], row[c]);
          hi[c] = std::max(hi[c], row[c]);
        }
      }
      usable.clear();
      for (std::size_t c = 0; c < x.cols; ++c) {
        if (hi[c] > lo[c]) usable.push_back(c);
      }
      if (usable.empty()) continue;

      std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
      const std::size_t feature = usable[pick(rng)];
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      double split = lo[feature] + u * (hi[feature] - lo[feature]);
      if (!(split > lo[feature])) split = hi[feature];

      const auto mid = std::partition(
          pool.begin() + static_cast<std::ptrdiff_t>(p.begin),
          pool.begin() + static_cast<std::ptrdiff_t>(p.end),
          [&](std::size_t r) { return x.at(r, feature) < split; });
      const auto m = static_cast<std::size_t>(mid - pool.begin());

      const auto left = static_cast<std::int32_t>(nodes.size());
      nodes.push_back(IsolationNode{});
      nodes.push_back(IsolationNode{});
      IsolationNode& n = nodes[p.node];
      n.feature = static_cast<std::int32_t>(feature);
      n.split = split;
      n.left = left;
      n.right = left + 1;
      stack.push_back({static_cast<std::size_t>(left) + 1, m, p.end, p.depth + 1});
      stack.push_back({static_cast<std::size_t>(left), p.begin, m, p.depth + 1});
    }
  }
  return IsolationForestModel(x.cols, psi, std::move(trees));
}

std::vector<double> score_rows(const IsolationForestModel& model,
                               const DenseMatrix& x) {
  if (x.cols != model.num_features()) {
    throw InvalidArgument("score: matrix has " + std::to_string(x.cols) +
                          " columns, forest expects " +
                          std::to_string(model.num_features()));
  }
  std::vector<double> out(x.rows);
  for (std::size_t i = 0; i < x.rows; ++i) out[i] = model.score(x.row(i));
  return out;
}

std::vector<AnomalyRecord> score_accounts(
    const IsolationForestModel& model, std::span<const AccountBehavior> rows) {
  const auto scores = score_rows(model, behavior_matrix(rows));
  std::vector<AnomalyRecord> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out[i] = AnomalyRecord{rows[i].account, rows[i].features, scores[i], 0};
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.account < b.account;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = i + 1;
  return out;
}

AnomalyCurves anomaly_curves(std::span<const AnomalyRecord> records,
                             const Corpus& corpus) {
  std::unordered_map<AccountId, std::size_t> tweets;
  for (const auto& t : corpus.tweets()) ++tweets[t.author];
  AnomalyCurves c;
  std::size_t running = 0;
  for (const auto& r : records) {
    c.score.push_back(r.score);
    if (const auto it = tweets.find(r.account); it != tweets.end()) {
      running += it->second;
    }
    c.cumulative_tweets.push_back(running);
  }
  for (const auto n : c.cumulative_tweets) {
    c.cumulative_fraction.push_back(
        running == 0 ? 0.0
                     : static_cast<double>(n) / static_cast<double>(running));
  }
  return c;
}

void write_anomaly_csv(std::span<const AnomalyRecord> records,
                       std::ostream& out) {
  csv::Writer w(out);
  std::vector<std::string> header{"account_id"};
  for (const auto name : behavior_feature_names()) header.emplace_back(name);
  header.emplace_back("score");
  header.emplace_back("rank");
  w.row(header);
  for (const auto& r : records) {
    std::vector<std::string> fields{r.account.str()};
    for (const double v : r.features.values()) {
      fields.push_back(format_double(v));
    }
    fields.push_back(format_double(r.score));
    fields.push_back(std::to_string(r.rank));
    w.row(fields);
  }
}

std::vector<AnomalyRecord> read_anomaly_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const std::size_t c_id = table.column("account_id");
  const std::size_t c_score = table.column("score");
  const std::size_t c_rank = table.column("rank");
  std::array<std::size_t, kNumBehaviorFeatures> c_features{};
  for (std::size_t k = 0; k < kNumBehaviorFeatures; ++k) {
    c_features[k] = table.column(behavior_feature_names()[k]);
  }
  std::vector<AnomalyRecord> out;
  out.reserve(table.size());
  for (const auto& row : table.rows()) {
    const auto id = parse_u64(row[c_id]);
    const auto score = parse_double(row[c_score]);
    const auto rank = parse_u64(row[c_rank]);
    if (!id || !score || !rank) throw DataError("anomaly table: malformed row");
    std::array<double, kNumBehaviorFeatures> values{};
    for (std::size_t k = 0; k < kNumBehaviorFeatures; ++k) {
      const auto v = parse_double(row[c_features[k]]);
      if (!v) throw DataError("anomaly table: malformed feature value");
      values[k] = *v;
    }
    out.push_back(AnomalyRecord{AccountId{*id},
                                BehaviorFeatures::from_values(values), *score,
                                static_cast<std::size_t>(*rank)});
  }
  return out;
}

void write_anomaly_curves_csv(std::span<const AnomalyRecord> records,
                              const AnomalyCurves& curves, std::ostream& out) {
  csv::Writer w(out);
  w.row({"rank", "account_id", "score", "cumulative_tweets",
         "cumulative_fraction"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    w.row({std::to_string(i + 1), records[i].account.str(),
           format_double(curves.score[i]),
           std::to_string(curves.cumulative_tweets[i]),
           format_double(curves.cumulative_fraction[i])});
  }
}

}  // namespace stancebot
