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

#ifndef STANCEBOT_CLASSIFIER_H_
#define STANCEBOT_CLASSIFIER_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stancebot/common.h"
#include "stancebot/features.h"
#include "stancebot/seeding.h"

namespace stancebot {

struct GbtParams {
  int rounds = 200;
  int max_depth = 6;
  double learning_rate = 0.1;
  double l2 = 1.0;
  // Minimum curvature (sum of p(1-p)) in each child of a split.
  double min_child_weight = 1.0;
  double min_split_gain = 0.0;
  // Fraction of rows drawn (without replacement) per round; 1 disables.
  double subsample = 1.0;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;     // present values below go left
  bool default_left = true;   // branch taken when the feature is absent
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf weight

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct RegressionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double evaluate(std::span<const std::uint32_t> columns,
                  std::span<const double> values) const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

// Additive tree ensemble with a logistic link.
struct GbtModel {
  std::size_t num_features = 0;
  // FNV-1a of the training column names; 0 when unknown.
  std::uint64_t column_fingerprint = 0;
  double base_score = 0.0;
  double learning_rate = 0.1;
  std::vector<RegressionTree> trees;

  double margin(std::span<const std::uint32_t> columns,
                std::span<const double> values) const;
  double probability(std::span<const std::uint32_t> columns,
                     std::span<const double> values) const;

  // Text format:
  //   stancebot-gbt 1
  //   features <n>
  //   fingerprint <hex>
  //   base_score <x>
  //   learning_rate <x>
  //   trees <T>
  //   tree <t> nodes <k>
  //   split <id> <feature> <threshold> <default_left> <left> <right>
  //   leaf <id> <value>
  void save(std::ostream& out) const;
  static GbtModel load(std::istream& in);

  friend bool operator==(const GbtModel&, const GbtModel&) = default;
};

struct TrainingTrace {
  // Mean log-loss after 0, 1, ..., rounds trees.
  std::vector<double> log_loss;
};

// Fits trees sequentially on logistic-loss gradients and curvatures. Leaf
// weight is -G / (H + l2). Labels must be 0 or 1 with at least two examples
// of each class.
GbtModel train_gbt(const SparseMatrix& x, std::span<const int> y,
                   const GbtParams& params, std::uint64_t seed,
                   TrainingTrace* trace = nullptr);

std::vector<double> predict_proba(const GbtModel& model, const SparseMatrix& x);

std::uint64_t column_fingerprint(std::span<const std::string> column_names);

enum class PredictedStance : std::uint8_t { kApruebo, kRechazo, kUndisclosed };

std::string_view to_string(PredictedStance s);
std::optional<PredictedStance> parse_predicted_stance(std::string_view text);
PredictedStance from_stance(Stance s);

// apruebo iff p >= threshold; rechazo iff 1 - p >= threshold.
PredictedStance label_for_probability(double p_apruebo, double threshold);

struct StancePrediction {
  AccountId account;
  double p_apruebo = 0.5;
  PredictedStance model_label = PredictedStance::kUndisclosed;
  std::optional<StanceLabel> seed_label;

  // The seed/manual label where one exists, the model label otherwise.
  PredictedStance stance() const {
    return seed_label ? from_stance(seed_label->stance) : model_label;
  }
};

// Trains on the labeled rows of `features` (apruebo = 1).
GbtModel train_stance_model(const FeatureMatrix& features,
                            const LabelSet& labels, const GbtParams& params,
                            std::uint64_t seed, TrainingTrace* trace = nullptr);

// Throws InvalidArgument when the column space differs from training.
std::vector<StancePrediction> predict_stances(const GbtModel& model,
                                              const FeatureMatrix& features,
                                              const LabelSet& labels,
                                              double threshold = 0.55);

struct StanceShares {
  std::size_t accounts = 0;
  double apruebo = 0.0;  // percent
  double rechazo = 0.0;
  double undisclosed = 0.0;
};

StanceShares stance_shares(std::span<const StancePrediction> predictions);

// Smoothed log-odds ratio per feature:
//   ln((fa+a)/(Na-fa+a)) - ln((fr+a)/(Nr-fr+a))
// with N the total count of each group. Positive favours apruebo.
std::vector<double> log_odds_scores(std::span<const double> counts_apruebo,
                                    std::span<const double> counts_rechazo,
                                    double alpha);

struct TermAssociation {
  std::size_t column = 0;
  std::string name;
  double count_apruebo = 0.0;
  double count_rechazo = 0.0;
  double score = 0.0;
};

// Groups are the accounts whose final stance is apruebo / rechazo. Sorted by
// score, descending; ties by column. Throws if either group is empty.
std::vector<TermAssociation> log_odds_terms(
    const FeatureMatrix& features,
    std::span<const StancePrediction> predictions, double alpha = 0.5);

void write_predictions_csv(std::span<const StancePrediction> predictions,
                           std::ostream& out);
std::vector<StancePrediction> read_predictions_csv(std::istream& in);

}  // namespace stancebot

#endif  // STANCEBOT_CLASSIFIER_H_
