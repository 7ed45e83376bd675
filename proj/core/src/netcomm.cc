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

#include "stancebot/netcomm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>

#include "stancebot/csv.h"

namespace stancebot {
namespace {

double xlogx(std::int64_t x) {
  return x > 0 ? static_cast<double>(x) * std::log(static_cast<double>(x)) : 0.0;
}

// Renumbers labels 0..B-1 in order of first appearance.
std::size_t relabel(std::vector<std::uint32_t>& labels) {
  std::unordered_map<std::uint32_t, std::uint32_t> map;
  for (auto& l : labels) {
    const auto [it, inserted] =
        map.emplace(l, static_cast<std::uint32_t>(map.size()));
    l = it->second;
  }
  return map.size();
}

struct BlockPairDelta {
  std::uint32_t from = 0;
  std::uint32_t to = 0;
  std::int64_t delta = 0;
};

// Block-level sufficient statistics of a partition plus incremental updates
// of the log-likelihood.
class BlockState {
 public:
  BlockState(const RetweetGraph& g, std::vector<std::uint32_t> assignment)
      : g_(g), block_(std::move(assignment)) {
    num_blocks_ = relabel(block_);
    const std::size_t n = g.node_count();
    dout_.assign(n, 0);
    din_.assign(n, 0);
    for (const auto& e : g.edges()) {
      dout_[e.source] += e.weight;
      din_[e.target] += e.weight;
    }
    out_.assign(num_blocks_, {});
    in_.assign(num_blocks_, {});
    kout_.assign(num_blocks_, 0);
    kin_.assign(num_blocks_, 0);
    size_.assign(num_blocks_, 0);
    for (std::size_t v = 0; v < n; ++v) ++size_[block_[v]];
    for (const auto& e : g.edges()) {
      const auto r = block_[e.source], s = block_[e.target];
      out_[r][s] += e.weight;
      in_[s][r] += e.weight;
      kout_[r] += e.weight;
      kin_[s] += e.weight;
    }
    cout_.assign(num_blocks_, 0);
    cin_.assign(num_blocks_, 0);
    log_likelihood_ = compute_log_likelihood();
  }

  std::size_t num_blocks() const { return num_blocks_; }
  double log_likelihood() const { return log_likelihood_; }
  const std::vector<std::uint32_t>& assignment() const { return block_; }

  double compute_log_likelihood() const {
    double l = 0.0;
    for (std::size_t r = 0; r < num_blocks_; ++r) {
      for (const auto& [s, w] : out_[r]) l += xlogx(w);
      l -= xlogx(kout_[r]) + xlogx(kin_[r]);
    }
    return l;
  }

  // Fills the per-block edge weights between v and each neighbouring block.
  void collect(std::uint32_t v) {
    clear_scratch();
    for (const auto idx : g_.out_edges(v)) {
      const auto& e = g_.edges()[idx];
      const auto t = block_[e.target];
      if (cout_[t] == 0 && cin_[t] == 0) touched_.push_back(t);
      cout_[t] += e.weight;
    }
    for (const auto idx : g_.in_edges(v)) {
      const auto& e = g_.edges()[idx];
      const auto t = block_[e.source];
      if (cout_[t] == 0 && cin_[t] == 0) touched_.push_back(t);
      cin_[t] += e.weight;
    }
  }

  void clear_scratch() {
    for (const auto t : touched_) cout_[t] = cin_[t] = 0;
    touched_.clear();
  }

  const std::vector<std::uint32_t>& touched() const { return touched_; }

  // Gain in L from moving v (after collect(v)) to block s.
  double move_gain(std::uint32_t v, std::uint32_t s) {
    const std::uint32_t r = block_[v];
    if (r == s) return 0.0;
    move_entries(r, s);
    double gain = pair_gain();
    gain -= xlogx(kout_[r] - dout_[v]) - xlogx(kout_[r]) +
            xlogx(kout_[s] + dout_[v]) - xlogx(kout_[s]);
    gain -= xlogx(kin_[r] - din_[v]) - xlogx(kin_[r]) +
            xlogx(kin_[s] + din_[v]) - xlogx(kin_[s]);
    return gain;
  }

  // Moves v (after collect(v)) to block s.
  void apply_move(std::uint32_t v, std::uint32_t s, double gain) {
    const std::uint32_t r = block_[v];
    move_entries(r, s);
    apply_entries();
    kout_[r] -= dout_[v];
    kout_[s] += dout_[v];
    kin_[r] -= din_[v];
    kin_[s] += din_[v];
    --size_[r];
    ++size_[s];
    block_[v] = s;
    log_likelihood_ += gain;
  }

  std::size_t block_size(std::uint32_t r) const { return size_[r]; }

  // Gain in L from merging block r into block t.
  double merge_gain(std::uint32_t r, std::uint32_t t) {
    entries_.clear();
    for (const auto& [y, w] : out_[r]) {
      entries_.push_back({r, y, -w});
      entries_.push_back({t, y == r ? t : y, w});
    }
    for (const auto& [x, w] : in_[r]) {
      if (x == r) continue;
      entries_.push_back({x, r, -w});
      entries_.push_back({x, t, w});
    }
    double gain = pair_gain();
    gain -= xlogx(kout_[t] + kout_[r]) - xlogx(kout_[t]) - xlogx(kout_[r]);
    gain -= xlogx(kin_[t] + kin_[r]) - xlogx(kin_[t]) - xlogx(kin_[r]);
    return gain;
  }

  // Blocks sharing at least one edge with r, excluding r.
  std::vector<std::uint32_t> neighbor_blocks(std::uint32_t r) const {
    std::vector<std::uint32_t> out;
    for (const auto& [y, w] : out_[r]) {
      if (y != r) out.push_back(y);
    }
    for (const auto& [x, w] : in_[r]) {
      if (x != r) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  void move_entries(std::uint32_t r, std::uint32_t s) {
    entries_.clear();
    for (const auto t : touched_) {
      if (cout_[t] != 0) {
        entries_.push_back({r, t, -cout_[t]});
        entries_.push_back({s, t, cout_[t]});
      }
      if (cin_[t] != 0) {
        entries_.push_back({t, r, -cin_[t]});
        entries_.push_back({t, s, cin_[t]});
      }
    }
  }

  std::int64_t weight(std::uint32_t x, std::uint32_t y) const {
    const auto it = out_[x].find(y);
    return it == out_[x].end() ? 0 : it->second;
  }

  void combine_entries() {
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return a.from != b.from ? a.from < b.from : a.to < b.to;
    });
    std::size_t k = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (k > 0 && entries_[k - 1].from == entries_[i].from &&
          entries_[k - 1].to == entries_[i].to) {
        entries_[k - 1].delta += entries_[i].delta;
      } else {
        entries_[k++] = entries_[i];
      }
    }
    entries_.resize(k);
  }

  double pair_gain() {
    combine_entries();
    double gain = 0.0;
    for (const auto& e : entries_) {
      if (e.delta == 0) continue;
      const std::int64_t m = weight(e.from, e.to);
      gain += xlogx(m + e.delta) - xlogx(m);
    }
    return gain;
  }

  void apply_entries() {
    combine_entries();
    for (const auto& e : entries_) {
      if (e.delta == 0) continue;
      auto& o = out_[e.from][e.to];
      o += e.delta;
      if (o == 0) out_[e.from].erase(e.to);
      auto& i = in_[e.to][e.from];
      i += e.delta;
      if (i == 0) in_[e.to].erase(e.from);
    }
  }

  const RetweetGraph& g_;
  std::vector<std::uint32_t> block_;
  std::size_t num_blocks_ = 0;
  std::vector<std::int64_t> dout_, din_;
  std::vector<std::unordered_map<std::uint32_t, std::int64_t>> out_, in_;
  std::vector<std::int64_t> kout_, kin_;
  std::vector<std::size_t> size_;
  std::vector<std::int64_t> cout_, cin_;
  std::vector<std::uint32_t> touched_;
  std::vector<BlockPairDelta> entries_;
  double log_likelihood_ = 0.0;
};

constexpr double kMinGain = 1e-12;

// One pass over nodes in random order; returns the number of moves.
std::size_t sweep(BlockState& state, const RetweetGraph& g, bool all_blocks,
                  std::mt19937_64& rng, std::vector<double>* segment) {
  std::vector<std::uint32_t> order(g.node_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t moves = 0;
  for (const auto v : order) {
    const std::uint32_t r = state.assignment()[v];
    if (state.block_size(r) <= 1) continue;
    state.collect(v);
    double best_gain = kMinGain;
    std::optional<std::uint32_t> best;
    auto consider = [&](std::uint32_t s) {
      if (s == r) return;
      const double gain = state.move_gain(v, s);
      if (gain > best_gain) {
        best_gain = gain;
        best = s;
      }
    };
    if (all_blocks) {
      for (std::uint32_t s = 0; s < state.num_blocks(); ++s) consider(s);
    } else {
      auto candidates = state.touched();
      std::sort(candidates.begin(), candidates.end());
      for (const auto s : candidates) consider(s);
    }
    if (best) {
      state.apply_move(v, *best, best_gain);
      ++moves;
      if (segment) segment->push_back(state.log_likelihood());
    }
    state.clear_scratch();
  }
  return moves;
}

void run_sweeps(BlockState& state, const RetweetGraph& g, bool all_blocks,
                int max_sweeps, std::mt19937_64& rng, SbmTrace* trace) {
  for (int i = 0; max_sweeps < 0 || i < max_sweeps; ++i) {
    std::vector<double>* segment = nullptr;
    if (trace) {
      trace->segments.push_back({state.log_likelihood()});
      segment = &trace->segments.back();
    }
    if (sweep(state, g, all_blocks, rng, segment) == 0) break;
  }
}

// Merges up to `count` disjoint block pairs, best gain first. Returns the
// new assignment.
std::vector<std::uint32_t> merge_blocks(BlockState& state, std::size_t count) {
  struct Proposal {
    double gain;
    std::uint32_t a, b;
  };
  std::vector<Proposal> proposals;
  for (std::uint32_t r = 0; r < state.num_blocks(); ++r) {
    std::optional<Proposal> best;
    for (const auto t : state.neighbor_blocks(r)) {
      const double gain = state.merge_gain(r, t);
      if (!best || gain > best->gain) {
        best = Proposal{gain, std::min(r, t), std::max(r, t)};
      }
    }
    if (best) proposals.push_back(*best);
  }
  std::sort(proposals.begin(), proposals.end(), [](const auto& x, const auto& y) {
    if (x.gain != y.gain) return x.gain > y.gain;
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  std::vector<std::uint32_t> target(state.num_blocks());
  std::iota(target.begin(), target.end(), 0);
  std::vector<char> used(state.num_blocks(), 0);
  std::size_t merged = 0;
  for (const auto& p : proposals) {
    if (merged == count) break;
    if (used[p.a] || used[p.b]) continue;
    used[p.a] = used[p.b] = 1;
    target[p.b] = p.a;
    ++merged;
  }
  auto assignment = state.assignment();
  for (auto& b : assignment) b = target[b];
  return assignment;
}

}  // namespace

RetweetGraph RetweetGraph::from_edges(
    std::span<const std::tuple<AccountId, AccountId, std::int64_t>> edges) {
  RetweetGraph g;
  for (const auto& [a, b, w] : edges) {
    if (a == b || w <= 0) continue;
    g.nodes_.push_back(a);
    g.nodes_.push_back(b);
  }
  std::sort(g.nodes_.begin(), g.nodes_.end());
  g.nodes_.erase(std::unique(g.nodes_.begin(), g.nodes_.end()), g.nodes_.end());
  for (const auto& [a, b, w] : edges) {
    if (a == b || w <= 0) continue;
    g.edges_.push_back(GraphEdge{*g.index_of(a), *g.index_of(b), w});
  }
  std::sort(g.edges_.begin(), g.edges_.end(), [](const auto& x, const auto& y) {
    return x.source != y.source ? x.source < y.source : x.target < y.target;
  });
  std::size_t k = 0;
  for (std::size_t i = 0; i < g.edges_.size(); ++i) {
    if (k > 0 && g.edges_[k - 1].source == g.edges_[i].source &&
        g.edges_[k - 1].target == g.edges_[i].target) {
      g.edges_[k - 1].weight += g.edges_[i].weight;
    } else {
      g.edges_[k++] = g.edges_[i];
    }
  }
  g.edges_.resize(k);
  g.index();
  return g;
}

void RetweetGraph::index() {
  const std::size_t n = nodes_.size();
  total_weight_ = 0;
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.source + 1];
    ++in_offsets_[e.target + 1];
    total_weight_ += e.weight;
  }
  std::partial_sum(out_offsets_.begin(), out_offsets_.end(),
                   out_offsets_.begin());
  std::partial_sum(in_offsets_.begin(), in_offsets_.end(), in_offsets_.begin());
  out_list_.resize(edges_.size());
  in_list_.resize(edges_.size());
  std::vector<std::uint32_t> fo(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::uint32_t> fi(in_offsets_.begin(), in_offsets_.end() - 1);
  for (std::uint32_t i = 0; i < edges_.size(); ++i) {
    out_list_[fo[edges_[i].source]++] = i;
    in_list_[fi[edges_[i].target]++] = i;
  }
}

std::optional<std::uint32_t> RetweetGraph::index_of(AccountId id) const {
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id);
  if (it == nodes_.end() || *it != id) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes_.begin());
}

std::span<const std::uint32_t> RetweetGraph::out_edges(
    std::uint32_t node) const {
  return std::span(out_list_)
      .subspan(out_offsets_[node], out_offsets_[node + 1] - out_offsets_[node]);
}

std::span<const std::uint32_t> RetweetGraph::in_edges(std::uint32_t node) const {
  return std::span(in_list_).subspan(in_offsets_[node],
                                     in_offsets_[node + 1] - in_offsets_[node]);
}

RetweetGraph RetweetGraph::subgraph(
    std::span<const std::uint32_t> node_indices) const {
  std::vector<char> keep(nodes_.size(), 0);
  for (const auto v : node_indices) keep[v] = 1;
  std::vector<std::tuple<AccountId, AccountId, std::int64_t>> kept;
  for (const auto& e : edges_) {
    if (keep[e.source] && keep[e.target]) {
      kept.emplace_back(nodes_[e.source], nodes_[e.target], e.weight);
    }
  }
  return from_edges(kept);
}

RetweetGraph build_retweet_graph(const Corpus& corpus) {
  std::vector<std::tuple<AccountId, AccountId, std::int64_t>> edges;
  for (const auto& t : corpus.tweets()) {
    if (t.kind == TweetKind::kRetweet && t.target) {
      edges.emplace_back(t.author, *t.target, 1);
    }
  }
  return RetweetGraph::from_edges(edges);
}

std::vector<std::uint32_t> weak_components(const RetweetGraph& graph) {
  const std::size_t n = graph.node_count();
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> raw(n, kUnset);
  std::vector<std::size_t> sizes;
  std::vector<std::uint32_t> queue;
  for (std::uint32_t start = 0; start < n; ++start) {
    if (raw[start] != kUnset) continue;
    const auto label = static_cast<std::uint32_t>(sizes.size());
    raw[start] = label;
    queue.assign(1, start);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const auto v = queue[head];
      auto visit = [&](std::uint32_t u) {
        if (raw[u] == kUnset) {
          raw[u] = label;
          queue.push_back(u);
        }
      };
      for (const auto idx : graph.out_edges(v)) visit(graph.edges()[idx].target);
      for (const auto idx : graph.in_edges(v)) visit(graph.edges()[idx].source);
    }
    sizes.push_back(queue.size());
  }
  // Components are discovered in order of their smallest node, so a stable
  // sort by size keeps the smallest-id tie-break.
  std::vector<std::uint32_t> order(sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return sizes[a] > sizes[b];
  });
  std::vector<std::uint32_t> rank(sizes.size());
  for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
  for (auto& l : raw) l = rank[l];
  return raw;
}

RetweetGraph extract_lcc(const RetweetGraph& graph) {
  if (graph.empty()) throw InvalidArgument("largest component of empty graph");
  const auto labels = weak_components(graph);
  std::vector<std::uint32_t> keep;
  for (std::uint32_t v = 0; v < labels.size(); ++v) {
    if (labels[v] == 0) keep.push_back(v);
  }
  if (keep.size() == graph.node_count()) return graph;
  return graph.subgraph(keep);
}

bool is_weakly_connected(const RetweetGraph& graph) {
  const auto labels = weak_components(graph);
  return std::all_of(labels.begin(), labels.end(),
                     [](std::uint32_t l) { return l == 0; });
}

double dcsbm_log_likelihood(const RetweetGraph& graph,
                            std::span<const std::uint32_t> blocks) {
  if (blocks.size() != graph.node_count()) {
    throw InvalidArgument("block assignment does not cover the graph");
  }
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::int64_t> m;
  std::unordered_map<std::uint32_t, std::int64_t> kout, kin;
  for (const auto& e : graph.edges()) {
    const auto r = blocks[e.source], s = blocks[e.target];
    m[{r, s}] += e.weight;
    kout[r] += e.weight;
    kin[s] += e.weight;
  }
  double l = 0.0;
  for (const auto& [rs, w] : m) l += xlogx(w);
  for (const auto& [r, k] : kout) l -= xlogx(k);
  for (const auto& [s, k] : kin) l -= xlogx(k);
  return l;
}

double description_length(double log_likelihood, std::size_t nodes,
                          std::size_t blocks, std::int64_t total_weight) {
  const double b = static_cast<double>(blocks);
  return -log_likelihood + static_cast<double>(nodes) * std::log(b) +
         b * b * std::log(static_cast<double>(std::max<std::int64_t>(total_weight, 1)));
}

Partition fit_dcsbm(const RetweetGraph& graph, const SbmParams& params,
                    std::uint64_t seed, SbmTrace* trace) {
  const std::size_t n = graph.node_count();
  if (n == 0) throw InvalidArgument("block model of an empty graph");
  if (!is_weakly_connected(graph)) {
    throw InvalidArgument(
        "block model input is not weakly connected; pass the largest "
        "component");
  }
  if (params.min_blocks < 1 || params.min_blocks > params.max_blocks ||
      params.min_blocks > n) {
    throw InvalidArgument("invalid block-count range");
  }
  const std::size_t max_blocks = std::min(params.max_blocks, n);
  std::mt19937_64 rng(seed);

  std::vector<std::uint32_t> initial(n);
  std::iota(initial.begin(), initial.end(), 0);
  auto state = std::make_unique<BlockState>(graph, std::move(initial));

  while (state->num_blocks() > max_blocks) {
    const std::size_t b = state->num_blocks();
    const std::size_t target = std::max(max_blocks, (b + 1) / 2);
    auto next = merge_blocks(*state, b - target);
    state = std::make_unique<BlockState>(graph, std::move(next));
    run_sweeps(*state, graph, false, params.sweeps_per_level, rng, trace);
  }

  Partition result;
  std::vector<std::uint32_t> best;
  double best_dl = std::numeric_limits<double>::infinity();
  for (;;) {
    const std::size_t b = state->num_blocks();
    const double dl = description_length(state->log_likelihood(), n, b,
                                         graph.total_weight());
    result.scan.push_back(BlockScan{b, state->log_likelihood(), dl});
    if (b >= params.min_blocks && dl < best_dl) {
      best_dl = dl;
      best = state->assignment();
    }
    if (b <= params.min_blocks) break;
    auto next = merge_blocks(*state, 1);
    state = std::make_unique<BlockState>(graph, std::move(next));
    run_sweeps(*state, graph, false, params.sweeps_per_level, rng, trace);
  }
  std::reverse(result.scan.begin(), result.scan.end());

  state = std::make_unique<BlockState>(graph, std::move(best));
  run_sweeps(*state, graph, true, -1, rng, trace);

  result.block = state->assignment();
  result.num_blocks = relabel(result.block);
  result.log_likelihood = dcsbm_log_likelihood(graph, result.block);
  result.description_length = description_length(
      result.log_likelihood, n, result.num_blocks, graph.total_weight());
  return result;
}

double best_single_move_gain(const RetweetGraph& graph,
                             std::span<const std::uint32_t> blocks,
                             std::size_t num_blocks) {
  std::vector<std::uint32_t> work(blocks.begin(), blocks.end());
  std::vector<std::size_t> size(num_blocks, 0);
  for (const auto b : work) ++size.at(b);
  const double base = dcsbm_log_likelihood(graph, work);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < work.size(); ++v) {
    const auto r = work[v];
    if (size[r] <= 1) continue;
    for (std::uint32_t s = 0; s < num_blocks; ++s) {
      if (s == r) continue;
      work[v] = s;
      best = std::max(best, dcsbm_log_likelihood(graph, work) - base);
    }
    work[v] = r;
  }
  return best;
}

double normalized_mutual_information(std::span<const std::uint32_t> a,
                                     std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("labelings differ in length");
  }
  if (a.empty()) throw InvalidArgument("labelings are empty");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> joint;
  std::map<std::uint32_t, std::size_t> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  auto entropy = [&](const std::map<std::uint32_t, std::size_t>& c) {
    double h = 0.0;
    for (const auto& [k, cnt] : c) {
      const double p = static_cast<double>(cnt) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha + hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [k, cnt] : joint) {
    const double pxy = static_cast<double>(cnt) / n;
    const double px = static_cast<double>(ca[k.first]) / n;
    const double py = static_cast<double>(cb[k.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  return std::clamp(mi / ((ha + hb) / 2.0), 0.0, 1.0);
}

std::string_view to_string(CommunityClass c) {
  switch (c) {
    case CommunityClass::kBotHeavy:
      return "bot_heavy";
    case CommunityClass::kMixed:
      return "mixed";
    case CommunityClass::kBotScarce:
      return "bot_scarce";
    case CommunityClass::kIneligible:
      return "ineligible";
  }
  return "mixed";
}

std::vector<CommunityProfile> community_bot_profile(
    const Partition& partition, const RetweetGraph& graph,
    std::span<const BotVerdict> verdicts,
    std::span<const StancePrediction> predictions,
    const ProfileParams& params) {
  if (partition.block.size() != graph.node_count()) {
    throw InvalidArgument("partition does not cover the graph");
  }
  std::unordered_map<AccountId, bool> is_bot;
  for (const auto& v : verdicts) is_bot.emplace(v.account, v.is_bot);
  std::unordered_map<AccountId, PredictedStance> stance;
  for (const auto& p : predictions) stance.emplace(p.account, p.stance());

  std::vector<CommunityProfile> profiles(partition.num_blocks);
  for (std::uint32_t b = 0; b < profiles.size(); ++b) profiles[b].block = b;
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    CommunityProfile& p = profiles.at(partition.block[v]);
    const AccountId id = graph.nodes()[v];
    ++p.size;
    if (const auto it = is_bot.find(id); it != is_bot.end() && it->second) {
      ++p.bots;
    }
    const auto s = stance.find(id);
    switch (s == stance.end() ? PredictedStance::kUndisclosed : s->second) {
      case PredictedStance::kApruebo:
        ++p.apruebo;
        break;
      case PredictedStance::kRechazo:
        ++p.rechazo;
        break;
      case PredictedStance::kUndisclosed:
        ++p.undisclosed;
        break;
    }
  }
  for (const auto& e : graph.edges()) {
    const auto r = partition.block[e.source], s = partition.block[e.target];
    if (r == s) {
      profiles[r].intra += e.weight;
    } else {
      profiles[r].inter_out += e.weight;
      profiles[s].inter_in += e.weight;
    }
  }

  std::vector<double> fractions;
  for (auto& p : profiles) {
    p.bot_fraction = p.size > 0 ? static_cast<double>(p.bots) /
                                      static_cast<double>(p.size)
                                : 0.0;
    if (p.size >= params.min_size) fractions.push_back(p.bot_fraction);
  }
  if (fractions.size() < 2) {
    throw InvalidArgument("fewer than two communities reach the minimum size " +
                          std::to_string(params.min_size));
  }
  const double k = static_cast<double>(fractions.size());
  const double mean = std::accumulate(fractions.begin(), fractions.end(), 0.0) / k;
  double ss = 0.0;
  for (const double f : fractions) ss += (f - mean) * (f - mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  for (auto& p : profiles) {
    if (p.size < params.min_size) {
      p.z = std::numeric_limits<double>::quiet_NaN();
      p.cls = CommunityClass::kIneligible;
      continue;
    }
    p.z = sd > 0.0 ? (p.bot_fraction - mean) / sd : 0.0;
    p.cls = p.z > params.z_threshold    ? CommunityClass::kBotHeavy
            : p.z < -params.z_threshold ? CommunityClass::kBotScarce
                                        : CommunityClass::kMixed;
  }
  std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) {
    return a.size != b.size ? a.size > b.size : a.block < b.block;
  });
  return profiles;
}

void write_edges_csv(const RetweetGraph& graph, std::ostream& out) {
  csv::Writer w(out);
  w.row({"source", "target", "weight"});
  for (const auto& e : graph.edges()) {
    w.row({graph.nodes()[e.source].str(), graph.nodes()[e.target].str(),
           std::to_string(e.weight)});
  }
}

void write_partition_csv(const RetweetGraph& graph, const Partition& partition,
                         std::ostream& out) {
  csv::Writer w(out);
  w.row({"account_id", "block"});
  for (std::size_t v = 0; v < graph.node_count(); ++v) {
    w.row({graph.nodes()[v].str(), std::to_string(partition.block[v])});
  }
}

void write_block_scan_csv(const Partition& partition, std::ostream& out) {
  csv::Writer w(out);
  w.row({"blocks", "log_likelihood", "description_length"});
  for (const auto& s : partition.scan) {
    w.row({std::to_string(s.blocks), format_double(s.log_likelihood),
           format_double(s.description_length)});
  }
}

void write_profiles_csv(std::span<const CommunityProfile> profiles,
                        std::ostream& out) {
  csv::Writer w(out);
  w.row({"block", "size", "bots", "bot_fraction", "z", "class", "intra",
         "inter_out", "inter_in", "apruebo", "rechazo", "undisclosed"});
  for (const auto& p : profiles) {
    w.row({std::to_string(p.block), std::to_string(p.size),
           std::to_string(p.bots), format_double(p.bot_fraction),
           format_double(p.z), std::string(to_string(p.cls)),
           std::to_string(p.intra), std::to_string(p.inter_out),
           std::to_string(p.inter_in), std::to_string(p.apruebo),
           std::to_string(p.rechazo), std::to_string(p.undisclosed)});
  }
}

}  // namespace stancebot
