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

#ifndef STANCEBOT_NETCOMM_H_
#define STANCEBOT_NETCOMM_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "stancebot/botcrit.h"
#include "stancebot/classifier.h"
#include "stancebot/corpus.h"

namespace stancebot {

struct GraphEdge {
  std::uint32_t source = 0;  // node index
  std::uint32_t target = 0;
  std::int64_t weight = 0;

  friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

// Directed weighted graph over account ids. Nodes are sorted by id and every
// node has at least one edge; edges are sorted by (source, target), have
// positive weight, and contain no self-loops.
class RetweetGraph {
 public:
  RetweetGraph() = default;

  // Aggregates repeated pairs and drops self-loops and non-positive weights.
  static RetweetGraph from_edges(
      std::span<const std::tuple<AccountId, AccountId, std::int64_t>> edges);

  std::span<const AccountId> nodes() const { return nodes_; }
  std::span<const GraphEdge> edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::int64_t total_weight() const { return total_weight_; }
  bool empty() const { return nodes_.empty(); }
  std::optional<std::uint32_t> index_of(AccountId id) const;

  // Indices into edges() of the edges leaving / entering a node.
  std::span<const std::uint32_t> out_edges(std::uint32_t node) const;
  std::span<const std::uint32_t> in_edges(std::uint32_t node) const;

  // Induced subgraph on the given node indices.
  RetweetGraph subgraph(std::span<const std::uint32_t> node_indices) const;

  friend bool operator==(const RetweetGraph& a, const RetweetGraph& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  void index();

  std::vector<AccountId> nodes_;
  std::vector<GraphEdge> edges_;
  std::int64_t total_weight_ = 0;
  std::vector<std::uint32_t> out_offsets_, out_list_;
  std::vector<std::uint32_t> in_offsets_, in_list_;
};

// Edges run from the retweeting account to the retweeted one.
RetweetGraph build_retweet_graph(const Corpus& corpus);

// Weak component label per node: 0 is the largest component, ties broken by
// the smallest contained account id.
std::vector<std::uint32_t> weak_components(const RetweetGraph& graph);

// Throws InvalidArgument on an empty graph.
RetweetGraph extract_lcc(const RetweetGraph& graph);

bool is_weakly_connected(const RetweetGraph& graph);

// sum_rs f(m_rs) - sum_r f(kout_r) - sum_s f(kin_s), f(x) = x ln x.
// Block ids need not be contiguous.
double dcsbm_log_likelihood(const RetweetGraph& graph,
                            std::span<const std::uint32_t> blocks);

// -L + N ln B + B^2 ln E, E the total edge weight.
double description_length(double log_likelihood, std::size_t nodes,
                          std::size_t blocks, std::int64_t total_weight);

struct SbmParams {
  std::size_t min_blocks = 1;
  std::size_t max_blocks = 50;
  // Node-move sweeps after each merge step.
  int sweeps_per_level = 4;
};

struct BlockScan {
  std::size_t blocks = 0;
  double log_likelihood = 0.0;
  double description_length = 0.0;
};

// Objective values recorded during node-move passes. Each segment starts at
// the objective before a pass and appends the value after every accepted
// move.
struct SbmTrace {
  std::vector<std::vector<double>> segments;
};

struct Partition {
  std::vector<std::uint32_t> block;  // per node, contiguous ids
  std::size_t num_blocks = 0;
  double log_likelihood = 0.0;
  double description_length = 0.0;
  std::vector<BlockScan> scan;  // one entry per block count visited
};

// Agglomerative merging from singletons with interleaved single-node moves;
// the block count minimizing the description length inside
// [min_blocks, max_blocks] is kept and polished to a local optimum of L
// over single-node moves that keep every block non-empty. Throws
// InvalidArgument if the graph is not weakly connected or the range is
// invalid.
Partition fit_dcsbm(const RetweetGraph& graph, const SbmParams& params,
                    std::uint64_t seed, SbmTrace* trace = nullptr);

// Largest L gain over single-node moves that keep every block non-empty
// (<= 0 at a local optimum). Exhaustive; meant for verification.
double best_single_move_gain(const RetweetGraph& graph,
                             std::span<const std::uint32_t> blocks,
                             std::size_t num_blocks);

// Arithmetic-mean normalized mutual information of two labelings.
double normalized_mutual_information(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b);

enum class CommunityClass : std::uint8_t {
  kBotHeavy,
  kMixed,
  kBotScarce,
  kIneligible,  // below the minimum size; no z-score
};

std::string_view to_string(CommunityClass c);

struct CommunityProfile {
  std::uint32_t block = 0;
  std::size_t size = 0;
  std::size_t bots = 0;
  double bot_fraction = 0.0;
  double z = 0.0;  // NaN for ineligible communities
  CommunityClass cls = CommunityClass::kMixed;
  std::int64_t intra = 0;
  std::int64_t inter_out = 0;
  std::int64_t inter_in = 0;
  std::size_t apruebo = 0;
  std::size_t rechazo = 0;
  std::size_t undisclosed = 0;
};

struct ProfileParams {
  std::size_t min_size = 10;
  double z_threshold = 1.0;
};

// Bot fractions are standardized (sample standard deviation) over
// communities of at least min_size nodes. Nodes without a verdict count as
// non-bots; nodes without a prediction as undisclosed. Sorted by size
// descending, ties by block. Throws InvalidArgument with fewer than two
// eligible communities.
std::vector<CommunityProfile> community_bot_profile(
    const Partition& partition, const RetweetGraph& graph,
    std::span<const BotVerdict> verdicts,
    std::span<const StancePrediction> predictions = {},
    const ProfileParams& params = {});

// source, target, weight (account ids)
void write_edges_csv(const RetweetGraph& graph, std::ostream& out);
// account_id, block
void write_partition_csv(const RetweetGraph& graph, const Partition& partition,
                         std::ostream& out);
// blocks, log_likelihood, description_length
void write_block_scan_csv(const Partition& partition, std::ostream& out);
void write_profiles_csv(std::span<const CommunityProfile> profiles,
                        std::ostream& out);

}  // namespace stancebot

#endif  // STANCEBOT_NETCOMM_H_
