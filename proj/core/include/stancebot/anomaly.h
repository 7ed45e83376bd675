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

#ifndef STANCEBOT_ANOMALY_H_
#define STANCEBOT_ANOMALY_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stancebot/common.h"
#include "stancebot/corpus.h"

namespace stancebot {

// Row-major dense matrix of doubles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  std::span<const double> row(std::size_t i) const {
    return std::span(data).subspan(i * cols, cols);
  }
  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Weakly connected components of the undirected interaction graph built from
// retweet, reply and quote edges. Targets absent from the account list are
// still nodes. Self-interactions are ignored.
struct InteractionComponents {
  // Size rank of each node's component (0 = largest, ties by smallest
  // member id). Nodes without any interaction are absent.
  std::unordered_map<AccountId, std::size_t> rank;
  // Component sizes in rank order.
  std::vector<std::size_t> sizes;

  std::size_t count() const { return sizes.size(); }
};

InteractionComponents interaction_components(const Corpus& corpus);

inline constexpr std::size_t kNumBehaviorFeatures = 15;

struct BehaviorFeatures {
  double active_days = 0;
  double rate_original = 0;
  double rate_retweet = 0;
  double rate_quote = 0;
  double rate_reply = 0;
  double daily_rhythm = 0;
  double ff_ratio = 0;
  double username_digits = 0;
  double default_image = 0;
  double in_interactions = 0;
  // Accounts outside every component get the component count.
  double component_rank = 0;
  double account_age_days = 0;
  double rate_statuses = 0;
  double rate_friends = 0;
  double rate_followers = 0;

  std::array<double, kNumBehaviorFeatures> values() const;
  static BehaviorFeatures from_values(std::span<const double> v);
  friend bool operator==(const BehaviorFeatures&,
                         const BehaviorFeatures&) = default;
};

const std::array<std::string_view, kNumBehaviorFeatures>&
behavior_feature_names();

struct AccountBehavior {
  AccountId account;
  BehaviorFeatures features;
};

// One entry per account with at least one tweet, in account order. Account
// age counts days from registration to the window end, at least 1.
std::vector<AccountBehavior> behavior_features(
    const Corpus& corpus, const InteractionComponents& components);

DenseMatrix behavior_matrix(std::span<const AccountBehavior> rows);

struct IsolationForestParams {
  int trees = 100;
  std::size_t sample_size = 256;  // capped at the row count
};

struct IsolationNode {
  std::int32_t feature = -1;  // -1 marks an external node
  double split = 0.0;         // values below go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::size_t size = 0;  // training points reaching the node
};

struct IsolationTree {
  std::vector<IsolationNode> nodes;  // nodes[0] is the root
};

class IsolationForestModel {
 public:
  IsolationForestModel(std::size_t num_features, std::size_t sample_size,
                       std::vector<IsolationTree> trees);

  std::size_t num_features() const { return num_features_; }
  std::size_t sample_size() const { return sample_size_; }
  std::size_t height_limit() const;
  std::span<const IsolationTree> trees() const { return trees_; }

  // Mean path length over trees, completed with c(size) at external nodes.
  double mean_path_length(std::span<const double> x) const;
  // 2^(-E[h(x)] / c(sample_size)); higher is more anomalous.
  double score(std::span<const double> x) const;

 private:
  std::size_t num_features_;
  std::size_t sample_size_;
  std::vector<IsolationTree> trees_;
};

// Average unsuccessful-search path length of a binary search tree over n
// points: 2 H(n-1) - 2 (n-1) / n with H(i) = ln(i) + 0.5772156649;
// c(1) = 0 and c(2) = 1.
double average_path_length(std::size_t n);

// Throws InvalidArgument when x has fewer than 2 rows or params are invalid.
IsolationForestModel fit_iforest(const DenseMatrix& x,
                                 const IsolationForestParams& params,
                                 std::uint64_t seed);

// Scores each row. Throws InvalidArgument on a column count mismatch.
std::vector<double> score_rows(const IsolationForestModel& model,
                               const DenseMatrix& x);

struct AnomalyRecord {
  AccountId account;
  BehaviorFeatures features;
  double score = 0.0;
  std::size_t rank = 0;  // 1 = most anomalous
};

// Records sorted by descending score, ties by account id.
std::vector<AnomalyRecord> score_accounts(const IsolationForestModel& model,
                                          std::span<const AccountBehavior> rows);

struct AnomalyCurves {
  std::vector<double> score;  // by rank
  std::vector<std::size_t> cumulative_tweets;
  std::vector<double> cumulative_fraction;
};

AnomalyCurves anomaly_curves(std::span<const AnomalyRecord> records,
                             const Corpus& corpus);

// account_id, the feature columns, score, rank
void write_anomaly_csv(std::span<const AnomalyRecord> records,
                       std::ostream& out);
std::vector<AnomalyRecord> read_anomaly_csv(std::istream& in);

// rank, account_id, score, cumulative_tweets, cumulative_fraction
void write_anomaly_curves_csv(std::span<const AnomalyRecord> records,
                              const AnomalyCurves& curves, std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_ANOMALY_H_
