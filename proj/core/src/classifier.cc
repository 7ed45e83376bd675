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

#include "stancebot/classifier.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "stancebot/csv.h"

namespace stancebot {
namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double mean_log_loss(std::span<const double> margins, std::span<const int> y) {
  double sum = 0.0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    sum += y[i] == 1 ? softplus(-margins[i]) : softplus(margins[i]);
  }
  return margins.empty() ? 0.0 : sum / static_cast<double>(margins.size());
}

std::optional<double> lookup(std::span<const std::uint32_t> columns,
                             std::span<const double> values,
                             std::uint32_t feature) {
  const auto it = std::lower_bound(columns.begin(), columns.end(), feature);
  if (it == columns.end() || *it != feature) return std::nullopt;
  return values[static_cast<std::size_t>(it - columns.begin())];
}

// Column-major copy of the training matrix, entries sorted by value.
struct SortedColumns {
  struct Entry {
    double value;
    std::uint32_t row;
  };
  std::vector<std::size_t> offsets;
  std::vector<Entry> entries;

  explicit SortedColumns(const SparseMatrix& x) : offsets(x.cols() + 1, 0) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
      for (const auto c : x.row_columns(r)) ++offsets[c + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    entries.resize(x.nnz());
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      const auto cols = x.row_columns(r);
      const auto vals = x.row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        entries[fill[cols[k]]++] =
            Entry{vals[k], static_cast<std::uint32_t>(r)};
      }
    }
    for (std::size_t c = 0; c + 1 < offsets.size(); ++c) {
      std::sort(entries.begin() + static_cast<std::ptrdiff_t>(offsets[c]),
                entries.begin() + static_cast<std::ptrdiff_t>(offsets[c + 1]),
                [](const Entry& a, const Entry& b) {
                  return a.value != b.value ? a.value < b.value : a.row < b.row;
                });
    }
  }

  std::span<const Entry> column(std::size_t c) const {
    return std::span(entries).subspan(offsets[c], offsets[c + 1] - offsets[c]);
  }
};

struct GradStats {
  double g = 0.0;
  double h = 0.0;
};

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
  bool default_left = true;
};

class TreeGrower {
 public:
  TreeGrower(const SparseMatrix& x, const SortedColumns& columns,
             const GbtParams& params)
      : x_(x), columns_(columns), params_(params) {}

  // rows_in_use[i] == false excludes row i from fitting.
  RegressionTree grow(std::span<const double> grad, std::span<const double> hess,
                      std::span<const char> rows_in_use) {
    RegressionTree tree;
    const std::size_t n = x_.rows();
    node_of_row_.assign(n, -1);
    GradStats root;
    for (std::size_t i = 0; i < n; ++i) {
      if (!rows_in_use[i]) continue;
      node_of_row_[i] = 0;
      root.g += grad[i];
      root.h += hess[i];
    }
    tree.nodes.push_back(TreeNode{});
    std::vector<std::int32_t> frontier{0};
    std::vector<GradStats> stats{root};

    for (int depth = 0; depth < params_.max_depth && !frontier.empty();
         ++depth) {
      const auto best = find_splits(frontier, stats, grad, hess);
      std::vector<std::int32_t> next;
      std::vector<std::int32_t> child_of(tree.nodes.size() * 2 + 2, -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        const std::int32_t id = frontier[s];
        const SplitCandidate& c = best[s];
        if (c.feature < 0 || !(c.gain > params_.min_split_gain)) {
          finalize_leaf(tree, id, stats[id]);
          continue;
        }
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = c.feature;
        node.threshold = c.threshold;
        node.default_left = c.default_left;
        node.left = static_cast<std::int32_t>(tree.nodes.size());
        node.right = node.left + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();
        next.push_back(node.left);
        next.push_back(node.right);
      }
      stats.resize(tree.nodes.size());
      for (const auto id : next) stats[static_cast<std::size_t>(id)] = {};
      for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t id = node_of_row_[i];
        if (id < 0) continue;
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        if (node.is_leaf()) {
          node_of_row_[i] = -1;
          continue;
        }
        const auto v = lookup(x_.row_columns(i), x_.row_values(i),
                              static_cast<std::uint32_t>(node.feature));
        const bool go_left = v ? *v < node.threshold : node.default_left;
        const std::int32_t child = go_left ? node.left : node.right;
        node_of_row_[i] = child;
        stats[static_cast<std::size_t>(child)].g += grad[i];
        stats[static_cast<std::size_t>(child)].h += hess[i];
      }
      frontier = std::move(next);
    }
    for (const auto id : frontier) {
      finalize_leaf(tree, id, stats[static_cast<std::size_t>(id)]);
    }
    return tree;
  }

 private:
  void finalize_leaf(RegressionTree& tree, std::int32_t id,
                     const GradStats& s) const {
    TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
    node.feature = -1;
    node.value = -s.g / (s.h + params_.l2);
  }

  double score(double g, double h) const { return g * g / (h + params_.l2); }

  void consider(SplitCandidate& best, const GradStats& total,
                const GradStats& left, std::int32_t feature, double threshold,
                bool default_left) const {
    const GradStats right{total.g - left.g, total.h - left.h};
    if (left.h < params_.min_child_weight || right.h < params_.min_child_weight) {
      return;
    }
    const double gain =
        score(left.g, left.h) + score(right.g, right.h) - score(total.g, total.h);
    if (gain > best.gain) {
      best = SplitCandidate{gain, feature, threshold, default_left};
    }
  }

  std::vector<SplitCandidate> find_splits(
      std::span<const std::int32_t> frontier, std::span<const GradStats> stats,
      std::span<const double> grad, std::span<const double> hess) {
    const std::size_t k = frontier.size();
    std::vector<std::int32_t> slot_of_node(stats.size(), -1);
    for (std::size_t s = 0; s < k; ++s) {
      slot_of_node[static_cast<std::size_t>(frontier[s])] =
          static_cast<std::int32_t>(s);
    }
    std::vector<SplitCandidate> best(k);
    std::vector<GradStats> present(k), prefix(k);
    std::vector<double> last(k);
    std::vector<std::size_t> seen(k);

    for (std::size_t f = 0; f < x_.cols(); ++f) {
      const auto col = columns_.column(f);
      if (col.empty()) continue;
      std::fill(present.begin(), present.end(), GradStats{});
      for (const auto& e : col) {
        const std::int32_t node = node_of_row_[e.row];
        if (node < 0) continue;
        auto& p = present[static_cast<std::size_t>(
            slot_of_node[static_cast<std::size_t>(node)])];
        p.g += grad[e.row];
        p.h += hess[e.row];
      }
      std::fill(prefix.begin(), prefix.end(), GradStats{});
      std::fill(seen.begin(), seen.end(), 0);
      const auto feature = static_cast<std::int32_t>(f);
      for (const auto& e : col) {
        const std::int32_t node = node_of_row_[e.row];
        if (node < 0) continue;
        const auto s = static_cast<std::size_t>(
            slot_of_node[static_cast<std::size_t>(node)]);
        const GradStats& total = stats[static_cast<std::size_t>(node)];
        const GradStats missing{total.g - present[s].g,
                                total.h - present[s].h};
        if (seen[s] == 0) {
          // absent entries left, every present entry right
          consider(best[s], total, missing, feature, e.value, true);
        } else if (e.value > last[s]) {
          double threshold = last[s] + (e.value - last[s]) / 2.0;
          if (!(threshold > last[s])) threshold = e.value;
          consider(best[s], total, prefix[s], feature, threshold, false);
          consider(best[s], total,
                   GradStats{prefix[s].g + missing.g, prefix[s].h + missing.h},
                   feature, threshold, true);
        }
        prefix[s].g += grad[e.row];
        prefix[s].h += hess[e.row];
        last[s] = e.value;
        ++seen[s];
      }
    }
    return best;
  }

  const SparseMatrix& x_;
  const SortedColumns& columns_;
  const GbtParams& params_;
  std::vector<std::int32_t> node_of_row_;
};

}  // namespace

double RegressionTree::evaluate(std::span<const std::uint32_t> columns,
                                std::span<const double> values) const {
  std::size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& n = nodes[id];
    const auto v = lookup(columns, values, static_cast<std::uint32_t>(n.feature));
    const bool go_left = v ? *v < n.threshold : n.default_left;
    id = static_cast<std::size_t>(go_left ? n.left : n.right);
  }
  return nodes[id].value;
}

double GbtModel::margin(std::span<const std::uint32_t> columns,
                        std::span<const double> values) const {
  double m = base_score;
  for (const auto& t : trees) m += learning_rate * t.evaluate(columns, values);
  return m;
}

double GbtModel::probability(std::span<const std::uint32_t> columns,
                             std::span<const double> values) const {
  return sigmoid(margin(columns, values));
}

void GbtModel::save(std::ostream& out) const {
  out << "stancebot-gbt 1\n";
  out << "features " << num_features << '\n';
  std::ostringstream fp;
  fp << std::hex << std::setw(16) << std::setfill('0') << column_fingerprint;
  out << "fingerprint " << fp.str() << '\n';
  out << "base_score " << format_double(base_score) << '\n';
  out << "learning_rate " << format_double(learning_rate) << '\n';
  out << "trees " << trees.size() << '\n';
  for (std::size_t t = 0; t < trees.size(); ++t) {
    out << "tree " << t << " nodes " << trees[t].nodes.size() << '\n';
    for (std::size_t i = 0; i < trees[t].nodes.size(); ++i) {
      const TreeNode& n = trees[t].nodes[i];
      if (n.is_leaf()) {
        out << "leaf " << i << ' ' << format_double(n.value) << '\n';
      } else {
        out << "split " << i << ' ' << n.feature << ' '
            << format_double(n.threshold) << ' ' << (n.default_left ? 1 : 0)
            << ' ' << n.left << ' ' << n.right << '\n';
      }
    }
  }
}

GbtModel GbtModel::load(std::istream& in) {
  auto fail = [](const std::string& what) -> GbtModel {
    throw DataError("model file: " + what);
  };
  std::string line;
  if (!std::getline(in, line) || line != "stancebot-gbt 1") {
    return fail("bad magic line");
  }
  GbtModel m;
  std::string key, hex;
  std::size_t ntrees = 0;
  if (!(in >> key >> m.num_features) || key != "features") {
    return fail("missing features");
  }
  if (!(in >> key >> hex) || key != "fingerprint") {
    return fail("missing fingerprint");
  }
  m.column_fingerprint = std::stoull(hex, nullptr, 16);
  if (!(in >> key >> m.base_score) || key != "base_score") {
    return fail("missing base_score");
  }
  if (!(in >> key >> m.learning_rate) || key != "learning_rate") {
    return fail("missing learning_rate");
  }
  if (!(in >> key >> ntrees) || key != "trees") return fail("missing trees");
  m.trees.resize(ntrees);
  for (std::size_t t = 0; t < ntrees; ++t) {
    std::size_t index = 0, nnodes = 0;
    std::string nodes_kw;
    if (!(in >> key >> index >> nodes_kw >> nnodes) || key != "tree" ||
        index != t || nodes_kw != "nodes") {
      return fail("bad tree header");
    }
    auto& nodes = m.trees[t].nodes;
    nodes.resize(nnodes);
    for (std::size_t i = 0; i < nnodes; ++i) {
      std::size_t id = 0;
      if (!(in >> key >> id) || id != i) return fail("bad node id");
      TreeNode& n = nodes[i];
      if (key == "leaf") {
        if (!(in >> n.value)) return fail("bad leaf");
      } else if (key == "split") {
        int dl = 0;
        if (!(in >> n.feature >> n.threshold >> dl >> n.left >> n.right)) {
          return fail("bad split");
        }
        n.default_left = dl != 0;
        const auto limit = static_cast<std::int32_t>(nnodes);
        if (n.feature < 0 ||
            static_cast<std::size_t>(n.feature) >= m.num_features ||
            n.left <= static_cast<std::int32_t>(i) || n.left >= limit ||
            n.right <= static_cast<std::int32_t>(i) || n.right >= limit) {
          return fail("split references out of range");
        }
      } else {
        return fail("unknown node kind '" + key + "'");
      }
    }
  }
  return m;
}

GbtModel train_gbt(const SparseMatrix& x, std::span<const int> y,
                   const GbtParams& params, std::uint64_t seed,
                   TrainingTrace* trace) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw InvalidArgument("train_gbt: empty feature matrix");
  }
  if (y.size() != x.rows()) {
    throw InvalidArgument("train_gbt: label count does not match rows");
  }
  std::size_t positives = 0;
  for (const int label : y) {
    if (label != 0 && label != 1) {
      throw InvalidArgument("train_gbt: labels must be 0 or 1");
    }
    positives += static_cast<std::size_t>(label);
  }
  const std::size_t negatives = y.size() - positives;
  if (positives < 2 || negatives < 2) {
    throw InvalidArgument(
        "train_gbt: need at least two examples of each class");
  }
  if (params.rounds < 0 || params.max_depth < 1 || params.learning_rate <= 0 ||
      params.l2 < 0 || params.subsample <= 0 || params.subsample > 1) {
    throw InvalidArgument("train_gbt: invalid hyperparameters");
  }

  GbtModel model;
  model.num_features = x.cols();
  model.learning_rate = params.learning_rate;
  model.base_score = std::log(static_cast<double>(positives) /
                              static_cast<double>(negatives));

  const std::size_t n = x.rows();
  const SortedColumns columns(x);
  TreeGrower grower(x, columns, params);
  std::vector<double> margins(n, model.base_score), grad(n), hess(n);
  std::vector<char> in_use(n, 1);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution draw(params.subsample);

  if (trace) trace->log_loss = {mean_log_loss(margins, y)};
  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margins[i]);
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    if (params.subsample < 1.0) {
      for (auto& u : in_use) u = draw(rng) ? 1 : 0;
    }
    RegressionTree tree = grower.grow(grad, hess, in_use);
    for (std::size_t i = 0; i < n; ++i) {
      margins[i] += params.learning_rate *
                    tree.evaluate(x.row_columns(i), x.row_values(i));
    }
    model.trees.push_back(std::move(tree));
    if (trace) trace->log_loss.push_back(mean_log_loss(margins, y));
  }
  return model;
}

std::vector<double> predict_proba(const GbtModel& model,
                                  const SparseMatrix& x) {
  if (x.cols() != model.num_features) {
    throw InvalidArgument("predict: matrix has " + std::to_string(x.cols()) +
                          " columns, model expects " +
                          std::to_string(model.num_features));
  }
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    out[i] = model.probability(x.row_columns(i), x.row_values(i));
  }
  return out;
}

std::uint64_t column_fingerprint(std::span<const std::string> column_names) {
  std::string joined;
  for (const auto& name : column_names) {
    joined += name;
    joined += '\n';
  }
  return fnv1a64(joined);
}

std::string_view to_string(PredictedStance s) {
  switch (s) {
    case PredictedStance::kApruebo:
      return "apruebo";
    case PredictedStance::kRechazo:
      return "rechazo";
    case PredictedStance::kUndisclosed:
      return "undisclosed";
  }
  return "undisclosed";
}

std::optional<PredictedStance> parse_predicted_stance(std::string_view text) {
  if (text == "apruebo") return PredictedStance::kApruebo;
  if (text == "rechazo") return PredictedStance::kRechazo;
  if (text == "undisclosed") return PredictedStance::kUndisclosed;
  return std::nullopt;
}

PredictedStance from_stance(Stance s) {
  return s == Stance::kApruebo ? PredictedStance::kApruebo
                               : PredictedStance::kRechazo;
}

PredictedStance label_for_probability(double p_apruebo, double threshold) {
  if (p_apruebo >= threshold) return PredictedStance::kApruebo;
  if (1.0 - p_apruebo >= threshold) return PredictedStance::kRechazo;
  return PredictedStance::kUndisclosed;
}

GbtModel train_stance_model(const FeatureMatrix& features,
                            const LabelSet& labels, const GbtParams& params,
                            std::uint64_t seed, TrainingTrace* trace) {
  std::vector<std::size_t> rows;
  std::vector<int> y;
  for (std::size_t r = 0; r < features.row_accounts.size(); ++r) {
    const auto it = labels.find(features.row_accounts[r]);
    if (it == labels.end()) continue;
    rows.push_back(r);
    y.push_back(it->second.stance == Stance::kApruebo ? 1 : 0);
  }
  GbtModel model =
      train_gbt(features.values.select_rows(rows), y, params, seed, trace);
  model.column_fingerprint = column_fingerprint(features.column_names);
  return model;
}

std::vector<StancePrediction> predict_stances(const GbtModel& model,
                                              const FeatureMatrix& features,
                                              const LabelSet& labels,
                                              double threshold) {
  if (model.column_fingerprint != 0 &&
      model.column_fingerprint != column_fingerprint(features.column_names)) {
    throw InvalidArgument(
        "predict: feature columns differ from the training column space");
  }
  const auto proba = predict_proba(model, features.values);
  std::vector<StancePrediction> out;
  out.reserve(proba.size());
  for (std::size_t r = 0; r < proba.size(); ++r) {
    StancePrediction p;
    p.account = features.row_accounts[r];
    p.p_apruebo = proba[r];
    p.model_label = label_for_probability(proba[r], threshold);
    if (const auto it = labels.find(p.account); it != labels.end()) {
      p.seed_label = it->second;
    }
    out.push_back(p);
  }
  return out;
}

StanceShares stance_shares(std::span<const StancePrediction> predictions) {
  StanceShares shares;
  shares.accounts = predictions.size();
  if (predictions.empty()) return shares;
  std::array<std::size_t, 3> counts{};
  for (const auto& p : predictions) ++counts[static_cast<std::size_t>(p.stance())];
  const double n = static_cast<double>(predictions.size());
  shares.apruebo = 100.0 * static_cast<double>(counts[0]) / n;
  shares.rechazo = 100.0 * static_cast<double>(counts[1]) / n;
  shares.undisclosed = 100.0 * static_cast<double>(counts[2]) / n;
  return shares;
}

std::vector<double> log_odds_scores(std::span<const double> counts_apruebo,
                                    std::span<const double> counts_rechazo,
                                    double alpha) {
  if (!(alpha > 0)) throw InvalidArgument("log-odds smoothing must be > 0");
  if (counts_apruebo.size() != counts_rechazo.size()) {
    throw InvalidArgument("log-odds: count vectors differ in length");
  }
  const double na =
      std::accumulate(counts_apruebo.begin(), counts_apruebo.end(), 0.0);
  const double nr =
      std::accumulate(counts_rechazo.begin(), counts_rechazo.end(), 0.0);
  std::vector<double> out(counts_apruebo.size());
  for (std::size_t t = 0; t < out.size(); ++t) {
    const double fa = counts_apruebo[t];
    const double fr = counts_rechazo[t];
    out[t] = std::log((fa + alpha) / (na - fa + alpha)) -
             std::log((fr + alpha) / (nr - fr + alpha));
  }
  return out;
}

std::vector<TermAssociation> log_odds_terms(
    const FeatureMatrix& features,
    std::span<const StancePrediction> predictions, double alpha) {
  std::unordered_map<AccountId, PredictedStance> stance;
  for (const auto& p : predictions) stance.emplace(p.account, p.stance());
  std::vector<double> fa(features.cols(), 0.0), fr(features.cols(), 0.0);
  std::size_t na = 0, nr = 0;
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const auto it = stance.find(features.row_accounts[r]);
    if (it == stance.end() || it->second == PredictedStance::kUndisclosed) {
      continue;
    }
    auto& target = it->second == PredictedStance::kApruebo ? fa : fr;
    (it->second == PredictedStance::kApruebo ? na : nr) += 1;
    const auto cols = features.values.row_columns(r);
    const auto vals = features.values.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) target[cols[k]] += vals[k];
  }
  if (na == 0 || nr == 0) {
    throw InvalidArgument("log-odds: both stance groups must be non-empty");
  }
  const auto scores = log_odds_scores(fa, fr, alpha);
  std::vector<TermAssociation> out(features.cols());
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = TermAssociation{c, features.column_names[c], fa[c], fr[c],
                             scores[c]};
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.column < b.column;
  });
  return out;
}

void write_predictions_csv(std::span<const StancePrediction> predictions,
                           std::ostream& out) {
  csv::Writer w(out);
  w.row({"account_id", "p_apruebo", "model_label", "seed_label", "seed_source",
         "stance"});
  for (const auto& p : predictions) {
    w.row({p.account.str(), format_double(p.p_apruebo),
           std::string(to_string(p.model_label)),
           p.seed_label ? std::string(to_string(p.seed_label->stance)) : "",
           p.seed_label ? std::string(to_string(p.seed_label->source)) : "",
           std::string(to_string(p.stance()))});
  }
}

std::vector<StancePrediction> read_predictions_csv(std::istream& in) {
  const auto table = csv::Table::read(in);
  const std::size_t c_id = table.column("account_id");
  const std::size_t c_p = table.column("p_apruebo");
  const std::size_t c_model = table.column("model_label");
  const std::size_t c_seed = table.column("seed_label");
  const std::size_t c_src = table.column("seed_source");
  std::vector<StancePrediction> out;
  for (const auto& row : table.rows()) {
    StancePrediction p;
    const auto id = parse_u64(row[c_id]);
    const auto label = parse_predicted_stance(row[c_model]);
    const auto prob = parse_double(row[c_p]);
    if (!id || !label || !prob) throw DataError("predictions: malformed row");
    p.account = AccountId{*id};
    p.p_apruebo = *prob;
    p.model_label = *label;
    if (!row[c_seed].empty()) {
      const auto s = parse_stance(row[c_seed]);
      if (!s) throw DataError("predictions: bad seed label");
      p.seed_label = StanceLabel{
          *s, row[c_src] == "manual" ? LabelSource::kManual : LabelSource::kSeed};
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace stancebot
