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

#include "stancebot/pipeline.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "stancebot/csv.h"

namespace stancebot {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 13> kStages = {
    "synth",   "ingest",    "seed",    "featurize", "train",
    "predict", "associate", "anomaly", "nullmodel", "botflag",
    "network", "report",    "evaluate"};

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

[[noreturn]] void config_error(const std::string& what) {
  throw InvalidArgument("config: " + what);
}

void check_keys(const json& j, std::string_view section,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) config_error(std::string(section) + " must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_error("unknown key '" + key + "' in " + std::string(section));
    }
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

Date get_date(const json& j, const char* key, Date fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) config_error(std::string(key) + " must be a date string");
  const auto d = parse_date(j.at(key).get<std::string>());
  if (!d) config_error(std::string("bad date for '") + key + "'");
  return *d;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

struct ArtifactInfo {
  std::string name;
  std::uintmax_t bytes = 0;
  std::uint64_t checksum = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class StageContext {
 public:
  StageContext(const PipelineConfig& config, std::string_view stage,
               const LogFn& log)
      : config_(config), stage_(stage), log_(log) {}

  const PipelineConfig& config() const { return config_; }
  const std::string& stage() const { return stage_; }
  std::uint64_t seed() const { return derive_seed(config_.seed, stage_); }
  fs::path dir() const { return config_.output / stage_; }
  fs::path upstream(std::string_view stage, std::string_view name) const {
    return config_.output / std::string(stage) / std::string(name);
  }

  void log(const std::string& message) const {
    if (log_) log_("[" + stage_ + "] " + message);
  }

  template <typename Fn>
  void write(const std::string& name, Fn&& fn) {
    fs::create_directories(dir());
    const fs::path path = dir() / name;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("cannot write " + path.string());
      fn(out);
      if (!out) throw DataError("write failed for " + path.string());
    }
    const std::string content = read_file(path);
    artifacts_.push_back(ArtifactInfo{name, content.size(), fnv1a64(content)});
  }

  void write_summary(const std::vector<std::pair<std::string, std::string>>& rows) {
    write("summary.csv", [&](std::ostream& out) {
      csv::Writer w(out);
      w.row({"metric", "value"});
      for (const auto& [k, v] : rows) w.row({k, v});
    });
  }

  void write_manifest() const {
    const fs::path dir = config_.output / "manifests";
    fs::create_directories(dir);
    json m;
    m["stage"] = stage_;
    m["config_hash"] = hex64(config_.hash());
    m["seed"] = seed();
    m["created_at"] = format_timestamp(std::chrono::time_point_cast<std::chrono::seconds>(
        std::chrono::system_clock::now()));
    json list = json::array();
    for (const auto& a : artifacts_) {
      list.push_back({{"path", stage_ + "/" + a.name},
                      {"bytes", a.bytes},
                      {"fnv1a64", hex64(a.checksum)}});
    }
    m["artifacts"] = list;
    std::ofstream out(dir / (stage_ + ".json"), std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
  }

 private:
  const PipelineConfig& config_;
  std::string stage_;
  const LogFn& log_;
  std::vector<ArtifactInfo> artifacts_;
};

fs::path manifest_path(const PipelineConfig& config, std::string_view stage) {
  return config.output / "manifests" / (std::string(stage) + ".json");
}

void require_upstream(const StageContext& ctx, std::string_view upstream) {
  const fs::path path = manifest_path(ctx.config(), upstream);
  const std::string needed = "requires the '" + std::string(upstream) +
                             "' stage; run it first";
  if (!fs::exists(path)) throw StageError(ctx.stage(), needed);
  json m;
  try {
    m = json::parse(read_file(path));
  } catch (const json::exception&) {
    throw StageError(ctx.stage(), "unreadable manifest for '" +
                                      std::string(upstream) + "'");
  }
  if (m.value("config_hash", "") != hex64(ctx.config().hash())) {
    throw StageError(ctx.stage(), "artifacts of '" + std::string(upstream) +
                                      "' were produced under a different config");
  }
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

Corpus load_corpus(const StageContext& ctx) {
  Corpus corpus = ingest_jsonl(ctx.upstream("ingest", "corpus.jsonl"));
  if (ctx.config().window) corpus = filter_corpus(corpus, *ctx.config().window);
  return corpus;
}

LabelSet load_labels(const StageContext& ctx) {
  auto in = open_input(ctx.upstream("seed", "labels.csv"));
  const auto table = csv::Table::read(in);
  const std::size_t c_id = table.column("account_id");
  const std::size_t c_stance = table.column("stance");
  const std::size_t c_source = table.column("source");
  LabelSet labels;
  for (const auto& row : table.rows()) {
    const auto id = parse_u64(row[c_id]);
    const auto stance = parse_stance(row[c_stance]);
    if (!id || !stance) throw DataError("labels: malformed row");
    labels.emplace(AccountId{*id},
                   StanceLabel{*stance, row[c_source] == "manual"
                                            ? LabelSource::kManual
                                            : LabelSource::kSeed});
  }
  return labels;
}

FeatureMatrix load_features(const StageContext& ctx) {
  auto in = open_input(ctx.upstream("featurize", "features.triplet"));
  return read_triplets(in);
}

std::vector<StancePrediction> load_predictions(const StageContext& ctx) {
  auto in = open_input(ctx.upstream("predict", "predictions.csv"));
  return read_predictions_csv(in);
}

std::vector<AnomalyRecord> load_anomaly(const StageContext& ctx) {
  auto in = open_input(ctx.upstream("anomaly", "records.csv"));
  return read_anomaly_csv(in);
}

VerdictTable load_verdicts(const StageContext& ctx) {
  auto in = open_input(ctx.upstream("botflag", "verdicts.csv"));
  return read_verdicts_csv(in);
}

std::string count(std::size_t n) { return std::to_string(n); }

// ---------------------------------------------------------------------------
// Stages

void stage_synth(StageContext& ctx) {
  const auto& spec = *ctx.config().synth;
  const SynthOutput out = generate_corpus(spec, ctx.seed());
  ctx.log("generated " + count(out.corpus.accounts().size()) + " accounts, " +
          count(out.corpus.tweets().size()) + " tweets");
  ctx.write("corpus.jsonl", [&](std::ostream& o) { write_jsonl(out.corpus, o); });
  ctx.write("truth.csv", [&](std::ostream& o) { write_truth_csv(out.truth, o); });
  ctx.write("spec.json",
            [&](std::ostream& o) { o << spec.to_json().dump(2) << '\n'; });
}

void stage_ingest(StageContext& ctx) {
  const auto& config = ctx.config();
  const fs::path input = config.input.empty()
                             ? ctx.upstream("synth", "corpus.jsonl")
                             : config.input;
  IngestReport report;
  Corpus corpus = ingest_jsonl(input, {}, &report);
  for (const auto& w : report.warnings) ctx.log(w);
  if (config.window) corpus = filter_corpus(corpus, *config.window);
  ctx.log("kept " + count(corpus.accounts().size()) + " accounts, " +
          count(corpus.tweets().size()) + " tweets");
  const CorpusStats stats = corpus_stats(corpus);
  ctx.write("corpus.jsonl", [&](std::ostream& o) { write_jsonl(corpus, o); });
  ctx.write("kind_stats.csv",
            [&](std::ostream& o) { write_kind_stats_csv(stats, o); });
  ctx.write("weekly_volume.csv",
            [&](std::ostream& o) { write_weekly_volume_csv(stats, o); });
  ctx.write_summary({{"lines", count(report.lines)},
                     {"malformed", count(report.malformed)},
                     {"duplicates", count(report.duplicates)},
                     {"accounts", count(stats.n_accounts)},
                     {"tweets", count(stats.n_tweets)},
                     {"window_start", format_date(corpus.window().start)},
                     {"window_end", format_date(corpus.window().end)}});
}

void stage_seed(StageContext& ctx) {
  const Corpus corpus = load_corpus(ctx);
  const SeedingResult result =
      apply_seeds(corpus, ctx.config().lexicon, ctx.config().overrides);
  for (const auto id : result.unknown_overrides) {
    ctx.log("override for unknown account " + id.str() + " skipped");
  }
  std::size_t apruebo = 0;
  ctx.write("labels.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"account_id", "stance", "source"});
    for (const auto& [id, label] : result.labels) {
      if (label.stance == Stance::kApruebo) ++apruebo;
      w.row({id.str(), std::string(to_string(label.stance)),
             std::string(to_string(label.source))});
    }
  });
  ctx.write("conflicts.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"account_id"});
    for (const auto id : result.conflicts) w.row({id.str()});
  });
  ctx.write("profile_hashtags.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"hashtag", "accounts"});
    for (const auto& h : extract_profile_hashtags(corpus)) {
      w.row({h.hashtag, count(h.accounts)});
    }
  });
  ctx.write_summary({{"labeled", count(result.labels.size())},
                     {"labeled_apruebo", count(apruebo)},
                     {"labeled_rechazo", count(result.labels.size() - apruebo)},
                     {"conflicts", count(result.conflicts.size())},
                     {"unknown_overrides", count(result.unknown_overrides.size())}});
}

void stage_featurize(StageContext& ctx) {
  const Corpus corpus = load_corpus(ctx);
  const LabelSet labels = load_labels(ctx);
  const FeatureMatrix m = build_feature_matrix(corpus, labels, ctx.config().lexicon,
                                               ctx.config().features);
  ctx.log(count(m.rows()) + " rows, " + count(m.cols()) + " columns, " +
          count(m.values.nnz()) + " non-zeros");
  ctx.write("features.triplet", [&](std::ostream& o) { write_triplets(m, o); });
  ctx.write("blocks.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"block", "begin", "end", "columns"});
    for (const auto& b : m.blocks) {
      w.row({std::string(block_name(b.kind)), count(b.begin), count(b.end),
             count(b.end - b.begin)});
    }
  });
}

void stage_train(StageContext& ctx) {
  const FeatureMatrix m = load_features(ctx);
  const LabelSet labels = load_labels(ctx);
  TrainingTrace trace;
  const GbtModel model = train_stance_model(m, labels, ctx.config().classifier,
                                            ctx.seed(), &trace);
  ctx.log("trained " + count(model.trees.size()) + " trees, final log-loss " +
          format_double(trace.log_loss.back()));
  ctx.write("model.txt", [&](std::ostream& o) { model.save(o); });
  ctx.write("log_loss.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"round", "log_loss"});
    for (std::size_t r = 0; r < trace.log_loss.size(); ++r) {
      w.row({count(r), format_double(trace.log_loss[r])});
    }
  });
}

void stage_predict(StageContext& ctx) {
  const FeatureMatrix m = load_features(ctx);
  const LabelSet labels = load_labels(ctx);
  auto in = open_input(ctx.upstream("train", "model.txt"));
  const GbtModel model = GbtModel::load(in);
  const auto predictions =
      predict_stances(model, m, labels, ctx.config().threshold);
  const StanceShares shares = stance_shares(predictions);
  ctx.log("apruebo " + format_double(shares.apruebo) + "%, rechazo " +
          format_double(shares.rechazo) + "%, undisclosed " +
          format_double(shares.undisclosed) + "%");
  ctx.write("predictions.csv",
            [&](std::ostream& o) { write_predictions_csv(predictions, o); });
  ctx.write_summary({{"accounts", count(shares.accounts)},
                     {"apruebo_percent", format_double(shares.apruebo)},
                     {"rechazo_percent", format_double(shares.rechazo)},
                     {"undisclosed_percent", format_double(shares.undisclosed)}});
}

void stage_associate(StageContext& ctx) {
  const FeatureMatrix m = load_features(ctx);
  const auto predictions = load_predictions(ctx);
  const auto terms = log_odds_terms(m, predictions, ctx.config().log_odds_alpha);
  ctx.write("log_odds.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"column", "count_apruebo", "count_rechazo", "log_odds"});
    for (const auto& t : terms) {
      w.row({t.name, format_double(t.count_apruebo),
             format_double(t.count_rechazo), format_double(t.score)});
    }
  });
  const std::size_t k = std::min(ctx.config().top_terms, terms.size());
  ctx.write("top_terms.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"stance", "rank", "column", "log_odds"});
    for (std::size_t i = 0; i < k; ++i) {
      w.row({"apruebo", count(i + 1), terms[i].name,
             format_double(terms[i].score)});
    }
    for (std::size_t i = 0; i < k; ++i) {
      const auto& t = terms[terms.size() - 1 - i];
      w.row({"rechazo", count(i + 1), t.name, format_double(t.score)});
    }
  });
}

void stage_anomaly(StageContext& ctx) {
  const Corpus corpus = load_corpus(ctx);
  const InteractionComponents components = interaction_components(corpus);
  const auto rows = behavior_features(corpus, components);
  const IsolationForestModel model =
      fit_iforest(behavior_matrix(rows), ctx.config().forest, ctx.seed());
  const auto records = score_accounts(model, rows);
  const AnomalyCurves curves = anomaly_curves(records, corpus);
  ctx.write("records.csv", [&](std::ostream& o) { write_anomaly_csv(records, o); });
  ctx.write("curves.csv",
            [&](std::ostream& o) { write_anomaly_curves_csv(records, curves, o); });
  ctx.write("components.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"rank", "size"});
    for (std::size_t r = 0; r < components.sizes.size(); ++r) {
      w.row({count(r), count(components.sizes[r])});
    }
  });
}

void stage_nullmodel(StageContext& ctx) {
  const auto records = load_anomaly(ctx);
  const auto predictions = load_predictions(ctx);
  const StanceCurve curve = stance_anomaly_curve(records, predictions);
  const PermutationEnvelope env = permutation_envelope(
      records, predictions, ctx.config().null_model, ctx.seed());
  ctx.write("envelope.csv",
            [&](std::ostream& o) { write_envelope_csv(curve, env, o); });
  ctx.write_summary(
      {{"accounts", count(curve.size())},
       {"global_apruebo_fraction", format_double(curve.fraction.back())},
       {"inside_fraction", format_double(env.inside_fraction())},
       {"longest_outside_run", count(env.longest_outside_run())}});
}

void stage_botflag(StageContext& ctx) {
  const Corpus corpus = load_corpus(ctx);
  const auto records = load_anomaly(ctx);
  const auto predictions = load_predictions(ctx);
  const AnomalyGroups groups = assign_anomaly_groups(records, ctx.config().groups);
  const auto verdicts = flag_bots(groups, corpus.accounts(), ctx.config().bots);
  const std::size_t bots = bot_count(verdicts);
  const double share = verdicts.empty() ? 0.0
                                        : static_cast<double>(bots) /
                                              static_cast<double>(verdicts.size());
  ctx.log(count(bots) + " accounts flagged (" + format_double(100.0 * share) + "%)");
  ctx.write("verdicts.csv",
            [&](std::ostream& o) { write_verdicts_csv(verdicts, groups, o); });
  ctx.write("registrations.csv", [&](std::ostream& o) {
    write_registrations_csv(
        registrations_by_week(corpus.accounts(), groups, predictions), o);
  });
  ctx.write("content.csv", [&](std::ostream& o) {
    write_content_csv(content_distribution(predictions, verdicts, corpus), o);
  });
  ctx.write("digit_scores.csv", [&](std::ostream& o) {
    write_digit_scores_csv(score_by_digits(records), o);
  });
  std::vector<std::pair<std::string, std::string>> summary{
      {"accounts", count(verdicts.size())}};
  for (std::size_t g = 0; g < kNumAnomalyGroups; ++g) {
    summary.emplace_back("group_" + count(g), count(groups.sizes[g]));
  }
  summary.emplace_back("bots", count(bots));
  summary.emplace_back("bot_share", format_double(share));
  summary.emplace_back("reference_bot_share", "0.0066");
  ctx.write_summary(summary);
}

void stage_network(StageContext& ctx) {
  const Corpus corpus = load_corpus(ctx);
  const auto predictions = load_predictions(ctx);
  const auto verdicts = load_verdicts(ctx);
  const RetweetGraph graph = build_retweet_graph(corpus);
  std::vector<std::pair<std::string, std::string>> summary{
      {"graph_nodes", count(graph.node_count())},
      {"graph_edges", count(graph.edge_count())}};
  if (graph.empty()) {
    ctx.log("no retweets; nothing to partition");
    ctx.write_summary(summary);
    return;
  }
  const RetweetGraph lcc = extract_lcc(graph);
  const Partition partition = fit_dcsbm(lcc, ctx.config().network, ctx.seed());
  ctx.log("largest component: " + count(lcc.node_count()) + " nodes, " +
          count(partition.num_blocks) + " blocks");
  ctx.write("edges.csv", [&](std::ostream& o) { write_edges_csv(lcc, o); });
  ctx.write("partition.csv",
            [&](std::ostream& o) { write_partition_csv(lcc, partition, o); });
  ctx.write("block_scan.csv",
            [&](std::ostream& o) { write_block_scan_csv(partition, o); });
  summary.emplace_back("lcc_nodes", count(lcc.node_count()));
  summary.emplace_back("lcc_edges", count(lcc.edge_count()));
  summary.emplace_back("lcc_weight", std::to_string(lcc.total_weight()));
  summary.emplace_back("blocks", count(partition.num_blocks));
  summary.emplace_back("log_likelihood", format_double(partition.log_likelihood));
  summary.emplace_back("description_length",
                       format_double(partition.description_length));
  std::vector<CommunityProfile> profiles;
  try {
    profiles = community_bot_profile(partition, lcc, verdicts.verdicts,
                                     predictions, ctx.config().profiles);
  } catch (const InvalidArgument& e) {
    ctx.log(std::string("community profile skipped: ") + e.what());
  }
  ctx.write("profiles.csv",
            [&](std::ostream& o) { write_profiles_csv(profiles, o); });
  std::map<CommunityClass, std::size_t> classes;
  for (const auto& p : profiles) ++classes[p.cls];
  for (const auto c : {CommunityClass::kBotHeavy, CommunityClass::kMixed,
                       CommunityClass::kBotScarce, CommunityClass::kIneligible}) {
    summary.emplace_back("communities_" + std::string(to_string(c)),
                         count(classes[c]));
  }
  ctx.write_summary(summary);
}

void stage_report(StageContext& ctx) {
  ctx.write("summary.csv", [&](std::ostream& o) {
    csv::Writer w(o);
    w.row({"stage", "metric", "value"});
    for (const auto stage : {"ingest", "seed", "predict", "nullmodel", "botflag",
                             "network"}) {
      const fs::path path = ctx.upstream(stage, "summary.csv");
      if (!fs::exists(path)) continue;
      const auto table = csv::Table::read_file(path);
      const std::size_t c_metric = table.column("metric");
      const std::size_t c_value = table.column("value");
      for (const auto& row : table.rows()) {
        w.row({stage, row[c_metric], row[c_value]});
      }
    }
  });
}

void stage_evaluate(StageContext& ctx) {
  auto truth_in = open_input(ctx.upstream("synth", "truth.csv"));
  const GroundTruth truth = read_truth_csv(truth_in);
  const auto predictions = load_predictions(ctx);
  const auto verdicts = load_verdicts(ctx);

  const Corpus corpus = load_corpus(ctx);
  const RetweetGraph graph = build_retweet_graph(corpus);
  std::optional<RetweetGraph> lcc;
  std::optional<Partition> partition;
  const fs::path partition_path = ctx.upstream("network", "partition.csv");
  if (!graph.empty() && fs::exists(partition_path)) {
    lcc = extract_lcc(graph);
    const auto table = csv::Table::read_file(partition_path);
    const std::size_t c_id = table.column("account_id");
    const std::size_t c_block = table.column("block");
    if (table.size() != lcc->node_count()) {
      throw DataError("partition does not match the largest component");
    }
    Partition p;
    p.block.resize(lcc->node_count());
    std::set<std::uint32_t> blocks;
    for (const auto& row : table.rows()) {
      const auto id = parse_u64(row[c_id]);
      const auto block = parse_u64(row[c_block]);
      const auto index = id ? lcc->index_of(AccountId{*id}) : std::nullopt;
      if (!index || !block) throw DataError("partition: malformed row");
      p.block[*index] = static_cast<std::uint32_t>(*block);
      blocks.insert(static_cast<std::uint32_t>(*block));
    }
    p.num_blocks = blocks.size();
    partition = std::move(p);
  }
  const EvaluationMetrics m = evaluate_against_truth(
      predictions, verdicts.verdicts, truth, lcc ? &*lcc : nullptr,
      partition ? &*partition : nullptr);
  ctx.log("stance accuracy " + format_double(m.stance_accuracy) +
          ", bot precision " + format_double(m.bot_precision) + ", recall " +
          format_double(m.bot_recall));
  ctx.write("metrics.csv", [&](std::ostream& o) { write_metrics_csv(m, o); });
}

using StageFn = void (*)(StageContext&);

StageFn stage_function(std::string_view stage) {
  static const std::map<std::string_view, StageFn> fns = {
      {"synth", stage_synth},         {"ingest", stage_ingest},
      {"seed", stage_seed},           {"featurize", stage_featurize},
      {"train", stage_train},         {"predict", stage_predict},
      {"associate", stage_associate}, {"anomaly", stage_anomaly},
      {"nullmodel", stage_nullmodel}, {"botflag", stage_botflag},
      {"network", stage_network},     {"report", stage_report},
      {"evaluate", stage_evaluate}};
  const auto it = fns.find(stage);
  if (it == fns.end()) {
    throw InvalidArgument("unknown stage '" + std::string(stage) + "'");
  }
  return it->second;
}

}  // namespace

std::uint64_t PipelineConfig::hash() const { return fnv1a64(canonical.dump()); }

PipelineConfig PipelineConfig::from_json(const json& j, const fs::path& base_dir,
                                         std::optional<std::uint64_t> seed_override) {
  check_keys(j, "config",
             {"seed", "paths", "window", "seeds", "features", "classifier",
              "forest", "bots", "null_model", "network", "synth"});
  PipelineConfig c;

  if (seed_override) {
    c.seed = *seed_override;
  } else {
    if (!j.contains("seed")) config_error("'seed' is required");
    if (!j.at("seed").is_number_unsigned()) {
      config_error("'seed' must be a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }

  if (!j.contains("paths")) config_error("'paths' is required");
  const json& paths = j.at("paths");
  check_keys(paths, "paths", {"input", "output"});
  if (!paths.contains("output")) config_error("'paths.output' is required");
  c.output = resolve(base_dir, get_or<std::string>(paths, "output", ""));
  if (paths.contains("input")) {
    c.input = resolve(base_dir, get_or<std::string>(paths, "input", ""));
  }

  if (j.contains("window")) {
    const json& w = j.at("window");
    check_keys(w, "window", {"start", "end"});
    if (!w.contains("start") || !w.contains("end")) {
      config_error("window needs start and end");
    }
    c.window = DateWindow{get_date(w, "start", {}), get_date(w, "end", {})};
    if (c.window->start > c.window->end) config_error("window start after end");
  }

  const json seeds = j.value("seeds", json::object());
  check_keys(seeds, "seeds", {"use_default", "apruebo", "rechazo", "overrides"});
  if (get_or<bool>(seeds, "use_default", true)) {
    c.lexicon = SeedLexicon::default_lexicon();
  }
  try {
    for (const auto& t : get_or<std::vector<std::string>>(seeds, "apruebo", {})) {
      c.lexicon.add(t, Stance::kApruebo);
    }
    for (const auto& t : get_or<std::vector<std::string>>(seeds, "rechazo", {})) {
      c.lexicon.add(t, Stance::kRechazo);
    }
  } catch (const InvalidArgument& e) {
    config_error(e.what());
  }
  if (c.lexicon.terms().empty()) config_error("seed lexicon is empty");
  if (seeds.contains("overrides")) {
    if (!seeds.at("overrides").is_array()) config_error("overrides must be a list");
    for (const auto& o : seeds.at("overrides")) {
      check_keys(o, "override", {"account_id", "stance"});
      const auto id = parse_u64(get_or<std::string>(o, "account_id", ""));
      const auto stance = parse_stance(get_or<std::string>(o, "stance", ""));
      if (!id || !stance) config_error("malformed override");
      c.overrides.push_back(ManualLabel{AccountId{*id}, *stance});
    }
  }

  const json features = j.value("features", json::object());
  check_keys(features, "features",
             {"min_document_frequency", "min_target_occurrences"});
  c.features.min_document_frequency = get_or(
      features, "min_document_frequency", c.features.min_document_frequency);
  c.features.min_target_occurrences = get_or(
      features, "min_target_occurrences", c.features.min_target_occurrences);

  const json cl = j.value("classifier", json::object());
  check_keys(cl, "classifier",
             {"rounds", "max_depth", "learning_rate", "l2", "min_child_weight",
              "min_split_gain", "subsample", "threshold", "log_odds_alpha",
              "top_terms"});
  c.classifier.rounds = get_or(cl, "rounds", c.classifier.rounds);
  c.classifier.max_depth = get_or(cl, "max_depth", c.classifier.max_depth);
  c.classifier.learning_rate =
      get_or(cl, "learning_rate", c.classifier.learning_rate);
  c.classifier.l2 = get_or(cl, "l2", c.classifier.l2);
  c.classifier.min_child_weight =
      get_or(cl, "min_child_weight", c.classifier.min_child_weight);
  c.classifier.min_split_gain =
      get_or(cl, "min_split_gain", c.classifier.min_split_gain);
  c.classifier.subsample = get_or(cl, "subsample", c.classifier.subsample);
  c.threshold = get_or(cl, "threshold", c.threshold);
  c.log_odds_alpha = get_or(cl, "log_odds_alpha", c.log_odds_alpha);
  c.top_terms = get_or(cl, "top_terms", c.top_terms);
  if (c.classifier.rounds < 1 || c.classifier.max_depth < 1 ||
      !(c.classifier.learning_rate > 0) || !(c.classifier.l2 >= 0) ||
      !(c.classifier.subsample > 0 && c.classifier.subsample <= 1)) {
    config_error("invalid classifier hyperparameters");
  }
  if (!(c.threshold > 0.5 && c.threshold <= 1.0)) {
    config_error("classifier threshold must lie in (0.5, 1]");
  }
  if (!(c.log_odds_alpha > 0)) config_error("log_odds_alpha must be > 0");

  const json forest = j.value("forest", json::object());
  check_keys(forest, "forest", {"trees", "sample_size"});
  c.forest.trees = get_or(forest, "trees", c.forest.trees);
  c.forest.sample_size = get_or(forest, "sample_size", c.forest.sample_size);
  if (c.forest.trees < 1 || c.forest.sample_size < 2) {
    config_error("forest needs trees >= 1 and sample_size >= 2");
  }

  const json bots = j.value("bots", json::object());
  check_keys(bots, "bots", {"top_fraction", "cutoff", "digit_threshold"});
  c.groups.top_fraction = get_or(bots, "top_fraction", c.groups.top_fraction);
  c.bots.cutoff = get_date(bots, "cutoff", c.bots.cutoff);
  c.bots.digit_threshold =
      get_or(bots, "digit_threshold", c.bots.digit_threshold);
  if (!(c.groups.top_fraction > 0 && c.groups.top_fraction < 1)) {
    config_error("bots.top_fraction must lie in (0, 1)");
  }

  const json nm = j.value("null_model", json::object());
  check_keys(nm, "null_model", {"permutations"});
  c.null_model.permutations = get_or(nm, "permutations", c.null_model.permutations);
  if (c.null_model.permutations < 2) config_error("null_model.permutations < 2");

  const json net = j.value("network", json::object());
  check_keys(net, "network",
             {"min_blocks", "max_blocks", "sweeps_per_level",
              "min_community_size", "z_threshold"});
  c.network.min_blocks = get_or(net, "min_blocks", c.network.min_blocks);
  c.network.max_blocks = get_or(net, "max_blocks", c.network.max_blocks);
  c.network.sweeps_per_level =
      get_or(net, "sweeps_per_level", c.network.sweeps_per_level);
  c.profiles.min_size = get_or(net, "min_community_size", c.profiles.min_size);
  c.profiles.z_threshold = get_or(net, "z_threshold", c.profiles.z_threshold);
  if (c.network.min_blocks < 1 || c.network.min_blocks > c.network.max_blocks) {
    config_error("network block range is invalid");
  }

  if (j.contains("synth")) {
    json s = j.at("synth");
    if (!s.is_object()) config_error("synth must be an object");
    const auto accounts = get_or<std::size_t>(s, "accounts", 5000);
    s.erase("accounts");
    try {
      c.synth = SynthSpec::from_json(s, SynthSpec::reference(accounts));
    } catch (const InvalidArgument& e) {
      config_error(e.what());
    }
  }
  if (c.input.empty() && !c.synth) {
    config_error("paths.input is required unless a synth section is present");
  }

  json canon;
  canon["seed"] = c.seed;
  canon["paths"] = {{"input", c.input.string()}, {"output", c.output.string()}};
  if (c.window) {
    canon["window"] = {{"start", format_date(c.window->start)},
                       {"end", format_date(c.window->end)}};
  }
  json terms = json::array();
  for (const auto& t : c.lexicon.terms()) {
    terms.push_back({t.term, std::string(to_string(t.stance)), t.scopes});
  }
  json overrides = json::array();
  for (const auto& o : c.overrides) {
    overrides.push_back({o.account.str(), std::string(to_string(o.stance))});
  }
  canon["seeds"] = {{"terms", terms}, {"overrides", overrides}};
  canon["features"] = {{"min_document_frequency", c.features.min_document_frequency},
                       {"min_target_occurrences", c.features.min_target_occurrences}};
  canon["classifier"] = {{"rounds", c.classifier.rounds},
                         {"max_depth", c.classifier.max_depth},
                         {"learning_rate", c.classifier.learning_rate},
                         {"l2", c.classifier.l2},
                         {"min_child_weight", c.classifier.min_child_weight},
                         {"min_split_gain", c.classifier.min_split_gain},
                         {"subsample", c.classifier.subsample},
                         {"threshold", c.threshold},
                         {"log_odds_alpha", c.log_odds_alpha},
                         {"top_terms", c.top_terms}};
  canon["forest"] = {{"trees", c.forest.trees},
                     {"sample_size", c.forest.sample_size}};
  canon["bots"] = {{"top_fraction", c.groups.top_fraction},
                   {"cutoff", format_date(c.bots.cutoff)},
                   {"digit_threshold", c.bots.digit_threshold}};
  canon["null_model"] = {{"permutations", c.null_model.permutations}};
  canon["network"] = {{"min_blocks", c.network.min_blocks},
                      {"max_blocks", c.network.max_blocks},
                      {"sweeps_per_level", c.network.sweeps_per_level},
                      {"min_community_size", c.profiles.min_size},
                      {"z_threshold", c.profiles.z_threshold}};
  if (c.synth) canon["synth"] = c.synth->to_json();
  c.canonical = std::move(canon);
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path,
                                    std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument("config: " + path.string() + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path(), seed_override);
}

std::span<const std::string_view> stage_names() { return kStages; }

std::vector<std::string_view> stage_dependencies(std::string_view stage,
                                                 const PipelineConfig& config) {
  if (stage == "synth") return {};
  if (stage == "ingest") {
    return config.input.empty() ? std::vector<std::string_view>{"synth"}
                                : std::vector<std::string_view>{};
  }
  if (stage == "seed") return {"ingest"};
  if (stage == "featurize") return {"ingest", "seed"};
  if (stage == "train") return {"seed", "featurize"};
  if (stage == "predict") return {"seed", "featurize", "train"};
  if (stage == "associate") return {"featurize", "predict"};
  if (stage == "anomaly") return {"ingest"};
  if (stage == "nullmodel") return {"predict", "anomaly"};
  if (stage == "botflag") return {"ingest", "predict", "anomaly"};
  if (stage == "network") return {"ingest", "predict", "botflag"};
  if (stage == "report") {
    return {"ingest", "seed", "predict", "anomaly", "nullmodel", "botflag",
            "network"};
  }
  if (stage == "evaluate") return {"synth", "ingest", "predict", "botflag", "network"};
  throw InvalidArgument("unknown stage '" + std::string(stage) + "'");
}

std::vector<std::string> parse_stage_list(std::string_view text,
                                          const PipelineConfig& config) {
  std::set<std::string_view> wanted;
  if (text == "all") {
    for (const auto s : kStages) {
      if ((s == "synth" || s == "evaluate") && !config.synth) continue;
      wanted.insert(s);
    }
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      std::string_view name = text.substr(pos, comma - pos);
      while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
      while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
      const auto it = std::find(kStages.begin(), kStages.end(), name);
      if (it == kStages.end()) {
        throw InvalidArgument("unknown stage '" + std::string(name) + "'");
      }
      wanted.insert(*it);
      pos = comma + 1;
    }
  }
  std::vector<std::string> out;
  for (const auto s : kStages) {
    if (wanted.contains(s)) out.emplace_back(s);
  }
  return out;
}

void run_stage(const PipelineConfig& config, std::string_view stage,
               const LogFn& log) {
  const StageFn fn = stage_function(stage);
  StageContext ctx(config, stage, log);
  if ((stage == "synth" || stage == "evaluate") && !config.synth) {
    throw StageError(std::string(stage), "config has no synth section");
  }
  std::error_code ec;
  fs::remove(manifest_path(config, stage), ec);
  for (const auto dep : stage_dependencies(stage, config)) {
    require_upstream(ctx, dep);
  }
  try {
    fn(ctx);
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), e.what());
  }
  ctx.write_manifest();
  ctx.log("done");
}

void run_pipeline(const PipelineConfig& config,
                  std::span<const std::string> stages, const LogFn& log) {
  const fs::path manifests = config.output / "manifests";
  if (fs::exists(manifests)) {
    const std::string expected = hex64(config.hash());
    for (const auto& entry : fs::directory_iterator(manifests)) {
      if (entry.path().extension() != ".json") continue;
      std::string hash;
      try {
        hash = json::parse(read_file(entry.path())).value("config_hash", "");
      } catch (const json::exception&) {
      }
      if (hash != expected) {
        throw StageError(entry.path().stem().string(),
                         "output directory " + config.output.string() +
                             " holds artifacts from a different config");
      }
    }
  }
  for (const auto& stage : stages) run_stage(config, stage, log);
}

}  // namespace stancebot
