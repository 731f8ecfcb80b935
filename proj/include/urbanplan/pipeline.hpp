#pragma once

// File-based pipeline stages. Each stage reads the outputs of earlier stages
// under one root directory, writes its own directory, and records a
// manifest.json (input hashes, effective configuration, format version).
//
//   raw/                 synth       five CSV sources + grid.json
//   dataset/             ingest      cleaned CSVs + dataset.json + load_report.json
//   features/            features    features.json
//   graph/               graph       graphs.json
//   embed/               embed       vgae.json, embeddings.csv, train_log.csv
//   quantify/n{n}/       quantify    configs.json, labels.csv, labeling.json
//   train/{model}_n{n}/  train       checkpoint.json, train_log.csv
//   generate/{model}_n{n}/ generate  configs.json
//   evaluate/{model}_n{n}/ evaluate  metric_report.json
//   score/n{n}/          score       scoring_model.json, scores.csv, summary.json
//   sweep/               sweep       n{n}/{model}/metric_report.json, sweep.csv
//   render/              render      heatmaps, CSVs, sidecars

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "urbanplan/configplan.hpp"
#include "urbanplan/errors.hpp"
#include "urbanplan/evalsuite.hpp"
#include "urbanplan/features.hpp"
#include "urbanplan/geodata.hpp"
#include "urbanplan/lucgan.hpp"
#include "urbanplan/render.hpp"
#include "urbanplan/serialize.hpp"
#include "urbanplan/spatialgraph.hpp"
#include "urbanplan/synth.hpp"
#include "urbanplan/vgae.hpp"

namespace urbanplan::pipeline {

namespace fs = std::filesystem;

inline constexpr const char* kUntrained = "untrained";

struct PipelineConfig {
  std::uint64_t seed = 0;
  SynthParams synth;
  VgaeConfig vgae;
  TrainConfig train;
  ScoringConfig scoring;
  double threshold = 0.5;
  int n = 10;
  std::vector<int> sweep_n{5, 10, 25, 50, 100};
  std::vector<std::string> sweep_models{kUntrained, "lucgan", "lucgan-plus"};
  double score_train_fraction = 0.7;

  /// Collects every violated field before throwing.
  void validate() const {
    std::vector<std::string> problems;
    auto check = [&](auto&& fn) {
      try {
        fn();
      } catch (const ConfigError& e) {
        problems.emplace_back(e.what());
      }
    };
    check([&] { synth.validate(); });
    check([&] { train.validate(); });
    if (vgae.hidden < 1) problems.emplace_back("vgae.hidden must be >= 1");
    if (vgae.latent < 1) problems.emplace_back("vgae.latent must be >= 1");
    if (!(vgae.lr > 0.0)) problems.emplace_back("vgae.lr must be > 0");
    if (vgae.epochs < 1) problems.emplace_back("vgae.epochs must be >= 1");
    if (!(vgae.kl_weight >= 0.0)) problems.emplace_back("vgae.kl_weight must be >= 0");
    if (!(threshold > 0.0 && threshold < 1.0)) problems.emplace_back("threshold must be in (0, 1)");
    if (n < 1) problems.emplace_back("n must be >= 1");
    if (sweep_n.empty()) problems.emplace_back("sweep n list must not be empty");
    for (int v : sweep_n)
      if (v < 1) problems.emplace_back("sweep n values must be >= 1 (got " + std::to_string(v) + ")");
    for (const auto& m : sweep_models)
      if (m != kUntrained && m != "lucgan" && m != "lucgan-plus")
        problems.emplace_back("unknown sweep model '" + m + "'");
    if (scoring.steps < 1) problems.emplace_back("scoring.steps must be >= 1");
    if (!(scoring.lr > 0.0)) problems.emplace_back("scoring.lr must be > 0");
    if (!(scoring.l2 >= 0.0)) problems.emplace_back("scoring.l2 must be >= 0");
    if (!(score_train_fraction > 0.0 && score_train_fraction < 1.0))
      problems.emplace_back("score_train_fraction must be in (0, 1)");
    if (!problems.empty()) {
      std::string msg = "invalid configuration:";
      for (const auto& p : problems) msg += "\n  " + p;
      throw ConfigError(msg);
    }
  }

  /// One seed drives every stage.
  void propagate_seed() {
    vgae.seed = seed;
    train.seed = seed;
  }
};

inline json config_to_json(const PipelineConfig& c) {
  return json{{"seed", c.seed},
              {"synth", c.synth},
              {"vgae",
               {{"hidden", c.vgae.hidden},
                {"latent", c.vgae.latent},
                {"lr", c.vgae.lr},
                {"epochs", c.vgae.epochs},
                {"self_loops", c.vgae.self_loops},
                {"kl_weight", c.vgae.kl_weight},
                {"pooling", c.vgae.pooling == Pooling::kMean ? "mean" : "flatten"}}},
              {"train", train_config_to_json(c.train)},
              {"scoring", {{"steps", c.scoring.steps}, {"lr", c.scoring.lr}, {"l2", c.scoring.l2}}},
              {"threshold", c.threshold},
              {"n", c.n},
              {"sweep_n", c.sweep_n},
              {"sweep_models", c.sweep_models},
              {"score_train_fraction", c.score_train_fraction}};
}

/// Overlays the keys present in `j` on `c`.
inline void apply_config_json(const json& j, PipelineConfig& c) {
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("synth")) from_json(j.at("synth"), c.synth);
    if (j.contains("vgae")) {
      const auto& v = j.at("vgae");
      c.vgae.hidden = v.value("hidden", c.vgae.hidden);
      c.vgae.latent = v.value("latent", c.vgae.latent);
      c.vgae.lr = v.value("lr", c.vgae.lr);
      c.vgae.epochs = v.value("epochs", c.vgae.epochs);
      c.vgae.self_loops = v.value("self_loops", c.vgae.self_loops);
      c.vgae.kl_weight = v.value("kl_weight", c.vgae.kl_weight);
      if (v.contains("pooling")) {
        const auto p = v.at("pooling").get<std::string>();
        if (p != "mean" && p != "flatten") throw ConfigError("vgae.pooling must be mean or flatten");
        c.vgae.pooling = p == "mean" ? Pooling::kMean : Pooling::kFlatten;
      }
    }
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
    if (j.contains("scoring")) {
      const auto& s = j.at("scoring");
      c.scoring.steps = s.value("steps", c.scoring.steps);
      c.scoring.lr = s.value("lr", c.scoring.lr);
      c.scoring.l2 = s.value("l2", c.scoring.l2);
    }
    c.threshold = j.value("threshold", c.threshold);
    c.n = j.value("n", c.n);
    c.sweep_n = j.value("sweep_n", c.sweep_n);
    c.sweep_models = j.value("sweep_models", c.sweep_models);
    c.score_train_fraction = j.value("score_train_fraction", c.score_train_fraction);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Layout

struct Layout {
  fs::path root;

  fs::path raw() const { return root / "raw"; }
  fs::path dataset() const { return root / "dataset"; }
  fs::path features() const { return root / "features"; }
  fs::path graph() const { return root / "graph"; }
  fs::path embed() const { return root / "embed"; }
  fs::path quantify(int n) const { return root / "quantify" / ("n" + std::to_string(n)); }
  fs::path train(const std::string& model, int n) const { return root / "train" / (model + "_n" + std::to_string(n)); }
  fs::path generate(const std::string& model, int n) const {
    return root / "generate" / (model + "_n" + std::to_string(n));
  }
  fs::path evaluate(const std::string& model, int n) const {
    return root / "evaluate" / (model + "_n" + std::to_string(n));
  }
  fs::path score(int n) const { return root / "score" / ("n" + std::to_string(n)); }
  fs::path sweep() const { return root / "sweep"; }
  fs::path render() const { return root / "render"; }
};

/// Throws DataError naming the subcommand that produces a missing input.
inline void require_input(const fs::path& path, const std::string& producer) {
  if (!fs::exists(path)) {
    throw DataError("missing stage input " + path.string() + " (produced by `urbanplan " + producer + "`)");
  }
}

/// Records what a stage consumed. Paths are stored relative to the root so
/// manifests do not depend on where the run lives; files outside the root
/// are keyed as external/<filename>.
class Manifest {
 public:
  Manifest(const Layout& layout, std::string stage) : layout_(layout), stage_(std::move(stage)) {}

  void input(const fs::path& path) {
    std::string key = fs::relative(path, layout_.root).generic_string();
    if (key.empty() || key.rfind("..", 0) == 0) key = "external/" + path.filename().string();
    inputs_[key] = file_hash(path);
  }
  void set(const std::string& key, json value) { extra_[key] = std::move(value); }

  void write(const fs::path& dir, const PipelineConfig& cfg) const {
    json j{{"stage", stage_}, {"format", kFormatVersion}, {"config", config_to_json(cfg)}, {"inputs", inputs_}};
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    write_json(dir / "manifest.json", j);
  }

 private:
  const Layout& layout_;
  std::string stage_;
  json inputs_ = json::object();
  json extra_ = json::object();
};

// ---------------------------------------------------------------------------
// Loaders shared by several stages

inline CityDataset load_clean_dataset(const Layout& l, Manifest* manifest = nullptr) {
  const fs::path meta_path = l.dataset() / "dataset.json";
  require_input(meta_path, "ingest");
  const json meta = read_json(meta_path);
  const auto paths = DataPaths::in_directory(l.dataset());
  return decode_json(meta_path.string(), [&] {
    LoadOptions options;
    options.categories = meta.at("categories").get<int>();
    options.days = meta.at("days").get<int>();
    if (manifest) {
      manifest->input(meta_path);
      for (const auto& p : {paths.pois, paths.checkins, paths.prices, paths.taxi, paths.bus}) manifest->input(p);
    }
    return load_dataset(paths, meta.at("grid").get<GridSpec>(), options);
  });
}

inline std::vector<SpatialGraph> load_graphs(const Layout& l, Manifest* manifest = nullptr) {
  const fs::path path = l.graph() / "graphs.json";
  require_input(path, "graph");
  if (manifest) manifest->input(path);
  const json j = read_json(path);
  return decode_json(path.string(), [&] {
    std::vector<SpatialGraph> graphs;
    for (const auto& g : j.at("graphs")) graphs.push_back(graph_from_json(g));
    return graphs;
  });
}

inline std::map<AreaId, std::vector<double>> load_embeddings(const Layout& l, Manifest* manifest = nullptr) {
  const fs::path path = l.embed() / "embeddings.csv";
  require_input(path, "embed");
  if (manifest) manifest->input(path);
  return read_embeddings_csv(path);
}

struct QuantifiedSet {
  std::map<AreaId, LandUseConfig> configs;
  std::map<AreaId, PlanLabel> labels;

  std::map<AreaId, LandUseConfig> with_label(PlanLabel label) const {
    std::map<AreaId, LandUseConfig> out;
    for (const auto& [id, c] : configs)
      if (labels.at(id) == label) out.emplace(id, c);
    return out;
  }
};

inline QuantifiedSet load_quantified(const Layout& l, int n, Manifest* manifest = nullptr) {
  const fs::path configs_path = l.quantify(n) / "configs.json";
  const fs::path labels_path = l.quantify(n) / "labels.csv";
  require_input(configs_path, "quantify --n " + std::to_string(n));
  require_input(labels_path, "quantify --n " + std::to_string(n));
  if (manifest) {
    manifest->input(configs_path);
    manifest->input(labels_path);
  }
  QuantifiedSet out;
  const json j = read_json(configs_path);
  out.configs = decode_json(configs_path.string(), [&] { return config_set_from_json(j); });
  csv::Reader reader(labels_path.string(), {"area_id", "label", "q", "freq", "div", "freq_raw", "div_raw"});
  while (reader.next()) {
    const auto id = static_cast<AreaId>(reader.integer(0));
    const std::string label(reader.field(1));
    if (label != "well" && label != "poor") throw DataError(reader.location(2) + ": label must be well or poor");
    out.labels[id] = label == "well" ? PlanLabel::kWell : PlanLabel::kPoor;
  }
  for (const auto& [id, c] : out.configs)
    if (!out.labels.count(id)) throw DataError(labels_path.string() + ": no label for area " + std::to_string(id));
  return out;
}

inline std::map<AreaId, LandUseConfig> load_generated(const Layout& l, const std::string& model, int n,
                                                      Manifest* manifest = nullptr) {
  const fs::path path = l.generate(model, n) / "configs.json";
  require_input(path, "generate --model " + model + " --n " + std::to_string(n));
  if (manifest) manifest->input(path);
  const json j = read_json(path);
  return decode_json(path.string(), [&] { return config_set_from_json(j); });
}

// ---------------------------------------------------------------------------
// In-memory stage bodies (also used directly by the acceptance suite)

inline std::vector<SpatialGraph> graphs_from_features(const std::vector<ContextFeatures>& features) {
  std::vector<SpatialGraph> graphs;
  for (const auto& f : features) graphs.push_back(build_graph(f));
  return graphs;
}

inline std::map<AreaId, std::vector<double>> embed_all(const VgaeModel& model, const std::vector<SpatialGraph>& graphs) {
  std::map<AreaId, std::vector<double>> out;
  for (const auto& g : graphs) out[g.area] = embed(model, g);
  return out;
}

/// Checkpoint for `model`: trained for the LUCGAN variants, freshly seeded
/// LUCGAN weights for the untrained baseline.
inline GanCheckpoint checkpoint_for(const std::string& model, const Labeling& labels,
                                    const std::map<AreaId, std::vector<double>>& embeddings, const TrainConfig& base) {
  if (embeddings.empty()) throw DataError("no context embeddings");
  const std::size_t width = embeddings.begin()->second.size();
  const int m = labels.well.begin()->second.m;
  if (model == kUntrained) {
    TrainConfig cfg = base;
    cfg.model = GanModel::kLucgan;
    cfg.epochs = 0;
    return init_checkpoint(cfg, labels.n, m, width, false);
  }
  TrainConfig cfg = base;
  cfg.model = parse_model(model);
  return train_gan(make_training_data(labels, embeddings), labels.n, m, cfg);
}

/// One configuration per target area, in AreaId order. Augmentation noise
/// comes from a stream of the checkpoint's seed.
inline std::map<AreaId, LandUseConfig> generate_all(const GanCheckpoint& c, const std::vector<AreaId>& areas,
                                                    const std::map<AreaId, std::vector<double>>& embeddings) {
  Rng noise = Rng::stream(c.config.seed, 301);
  std::map<AreaId, LandUseConfig> out;
  for (AreaId id : areas) {
    const auto it = embeddings.find(id);
    if (it == embeddings.end()) throw DataError("no context embedding for area " + std::to_string(id));
    out.emplace(id, generate_for_embedding(c, it->second, noise));
  }
  return out;
}

inline std::vector<AreaId> labeled_areas(const Labeling& l) {
  std::vector<AreaId> out;
  for (const auto& [id, s] : l.scores) out.push_back(id);
  return out;
}

struct ScoreSplit {
  std::vector<AreaId> train;
  std::vector<AreaId> test;
};

/// Seeded shuffle of each class separately, first `fraction` of each to
/// training, so both sides keep both classes.
inline ScoreSplit split_areas(const Labeling& l, double fraction, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 401);
  ScoreSplit out;
  for (const auto* pool : {&l.well, &l.poor}) {
    std::vector<AreaId> ids;
    for (const auto& [id, c] : *pool) ids.push_back(id);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    auto cut = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size())));
    cut = std::clamp<std::size_t>(cut, 1, ids.size() > 1 ? ids.size() - 1 : 1);
    out.train.insert(out.train.end(), ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cut));
    out.test.insert(out.test.end(), ids.begin() + static_cast<std::ptrdiff_t>(cut), ids.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

struct ScoringOutcome {
  ScoringModel model;
  ScoreSplit split;
  std::map<AreaId, double> scores;
  double well_mean = 0.0;
  double poor_mean = 0.0;
  double auc = 0.0;  // on the held-out areas
};

inline ScoringOutcome score_holdout(const Labeling& l, double fraction, std::uint64_t seed, const ScoringConfig& cfg) {
  ScoringOutcome out;
  out.split = split_areas(l, fraction, seed);
  auto config_of = [&](AreaId id) -> const LandUseConfig& {
    const auto it = l.well.find(id);
    return it != l.well.end() ? it->second : l.poor.at(id);
  };
  std::vector<LandUseConfig> well, poor;
  for (AreaId id : out.split.train) (l.well.count(id) ? well : poor).push_back(config_of(id));
  out.model = train_scoring(well, poor, cfg);
  std::vector<double> pos, neg;
  for (AreaId id : out.split.train) out.scores[id] = score(out.model, config_of(id));
  for (AreaId id : out.split.test) {
    const double s = score(out.model, config_of(id));
    out.scores[id] = s;
    (l.well.count(id) ? pos : neg).push_back(s);
  }
  if (pos.empty() || neg.empty()) throw DataError("held-out split lacks one of the classes");
  for (double s : pos) out.well_mean += s / static_cast<double>(pos.size());
  for (double s : neg) out.poor_mean += s / static_cast<double>(neg.size());
  out.auc = rank_auc(pos, neg);
  return out;
}

// ---------------------------------------------------------------------------
// Stages

inline void run_synth(const Layout& l, const PipelineConfig& cfg) {
  const SynthResult res = synth_city(cfg.synth, cfg.seed);
  write_dataset(res.dataset, l.raw());
  write_json(l.raw() / "grid.json", json(cfg.synth.grid));
  json truth = json::array();
  for (std::size_t id = 0; id < res.well_planned.size(); ++id)
    truth.push_back({{"area", id}, {"mode", res.well_planned[id] ? "well" : "poor"}});
  write_json(l.raw() / "synth.json",
             {{"params", cfg.synth}, {"categories", res.dataset.categories}, {"months", res.dataset.months},
              {"days", res.dataset.days}, {"construction", truth}});
  Manifest m(l, "synth");
  m.write(l.raw(), cfg);
}

/// Parses the CSV sources in `input` (default raw/) against the grid in
/// `input/grid.json` and writes the cleaned dataset.
inline LoadReport run_ingest(const Layout& l, const PipelineConfig& cfg, const fs::path& input = {}) {
  const fs::path dir = input.empty() ? l.raw() : input;
  const fs::path grid_path = dir / "grid.json";
  require_input(grid_path, "synth");
  Manifest m(l, "ingest");
  const auto paths = DataPaths::in_directory(dir);
  for (const auto& p : {paths.pois, paths.checkins, paths.prices, paths.taxi, paths.bus}) require_input(p, "synth");
  const GridSpec grid = decode_json(grid_path.string(), [&] { return read_json(grid_path).get<GridSpec>(); });
  LoadOptions options;
  options.categories = cfg.synth.categories;
  LoadReport report;
  const CityDataset ds = load_dataset(paths, grid, options, &report);
  for (const auto& p : {grid_path, paths.pois, paths.checkins, paths.prices, paths.taxi, paths.bus}) m.input(p);
  write_dataset(ds, l.dataset());
  write_json(l.dataset() / "dataset.json",
             {{"grid", ds.grid}, {"categories", ds.categories}, {"months", ds.months}, {"days", ds.days}});
  json rep = report;
  for (auto& [key, value] : rep.items())
    if (value.is_object() && value.contains("path"))
      value["path"] = fs::path(value["path"].get<std::string>()).filename().string();
  write_json(l.dataset() / "load_report.json", rep);
  m.write(l.dataset(), cfg);
  return report;
}

inline void run_features(const Layout& l, const PipelineConfig& cfg) {
  Manifest m(l, "features");
  const CityDataset ds = load_clean_dataset(l, &m);
  const auto features = extract_all(ds);
  json arr = json::array();
  for (const auto& f : features) arr.push_back(f);
  write_json(l.features() / "features.json",
             {{"months", ds.months}, {"categories", ds.categories}, {"ring", kRingNames}, {"features", arr}});
  m.write(l.features(), cfg);
}

inline void run_graph(const Layout& l, const PipelineConfig& cfg) {
  Manifest m(l, "graph");
  const fs::path path = l.features() / "features.json";
  require_input(path, "features");
  m.input(path);
  const json j = read_json(path);
  const auto [features, columns] = decode_json(path.string(), [&] {
    std::vector<ContextFeatures> fs;
    for (const auto& f : j.at("features")) fs.push_back(f.get<ContextFeatures>());
    return std::make_pair(fs, feature_columns(j.at("months").get<int>(), j.at("categories").get<int>()));
  });
  json arr = json::array();
  for (const auto& g : graphs_from_features(features)) arr.push_back(graph_to_json(g, columns));
  write_json(l.graph() / "graphs.json", {{"graphs", arr}});
  m.write(l.graph(), cfg);
}

inline VgaeModel run_embed(const Layout& l, const PipelineConfig& cfg) {
  Manifest m(l, "embed");
  const auto graphs = load_graphs(l, &m);
  const VgaeModel model = train_vgae(graphs, cfg.vgae);
  write_json(l.embed() / "vgae.json", vgae_to_json(model));
  write_text(l.embed() / "embeddings.csv", embeddings_csv(embed_all(model, graphs)));
  std::string log = "epoch,loss,recon\n";
  for (std::size_t e = 0; e < model.loss_history.size(); ++e)
    log += std::to_string(e + 1) + "," + csv::format(model.loss_history[e]) + "," +
           csv::format(model.recon_history[e]) + "\n";
  write_text(l.embed() / "train_log.csv", log);
  m.write(l.embed(), cfg);
  return model;
}

inline Labeling run_quantify(const Layout& l, const PipelineConfig& cfg, int n) {
  Manifest m(l, "quantify");
  const CityDataset ds = load_clean_dataset(l, &m);
  const Labeling labels = label_dataset(ds, n, cfg.threshold);
  std::map<AreaId, LandUseConfig> all = labels.well;
  all.insert(labels.poor.begin(), labels.poor.end());
  const fs::path dir = l.quantify(n);
  write_json(dir / "configs.json", config_set_to_json(all, n, ds.categories));
  write_text(dir / "labels.csv", labels_csv(labels));
  write_json(dir / "labeling.json", {{"n", n},
                                     {"threshold", labels.threshold},
                                     {"well", labels.well.size()},
                                     {"poor", labels.poor.size()},
                                     {"freq_min", labels.stats.freq_min},
                                     {"freq_max", labels.stats.freq_max},
                                     {"div_min", labels.stats.div_min},
                                     {"div_max", labels.stats.div_max},
                                     {"warnings", labels.warnings}});
  m.set("n", n);
  m.write(dir, cfg);
  return labels;
}

/// Rebuilds the Labeling of a quantify output (scores are not needed past
/// this stage, only the partition).
inline Labeling labeling_from(const QuantifiedSet& q, int n, double threshold) {
  Labeling l;
  l.n = n;
  l.threshold = threshold;
  for (const auto& [id, c] : q.configs) {
    QualityScore s;
    s.area = id;
    s.label = q.labels.at(id);
    l.scores.emplace(id, s);
    (s.label == PlanLabel::kWell ? l.well : l.poor).emplace(id, c);
  }
  if (l.well.empty() || l.poor.empty()) throw DataError("quantified set lacks one of the classes");
  return l;
}

inline GanCheckpoint run_train(const Layout& l, const PipelineConfig& cfg, const std::string& model, int n) {
  if (model == kUntrained) throw ConfigError("train: --model must be lucgan or lucgan-plus");
  Manifest m(l, "train");
  const Labeling labels = labeling_from(load_quantified(l, n, &m), n, cfg.threshold);
  const auto embeddings = load_embeddings(l, &m);
  const GanCheckpoint c = checkpoint_for(model, labels, embeddings, cfg.train);
  const fs::path dir = l.train(model, n);
  write_json(dir / "checkpoint.json", checkpoint_to_json(c));
  write_text(dir / "train_log.csv", train_log_csv(c.history));
  m.set("model", model);
  m.set("n", n);
  m.write(dir, cfg);
  return c;
}

inline void run_generate(const Layout& l, const PipelineConfig& cfg, const std::string& model, int n) {
  Manifest m(l, "generate");
  const Labeling labels = labeling_from(load_quantified(l, n, &m), n, cfg.threshold);
  const auto embeddings = load_embeddings(l, &m);
  GanCheckpoint c;
  if (model == kUntrained) {
    c = checkpoint_for(model, labels, embeddings, cfg.train);
  } else {
    const fs::path path = l.train(model, n) / "checkpoint.json";
    require_input(path, "train --model " + model + " --n " + std::to_string(n));
    m.input(path);
    const json j = read_json(path);
    c = decode_json(path.string(), [&] { return checkpoint_from_json(j); });
  }
  const auto generated = generate_all(c, labeled_areas(labels), embeddings);
  const fs::path dir = l.generate(model, n);
  write_json(dir / "configs.json", config_set_to_json(generated, c.n, c.m));
  m.set("model", model);
  m.set("n", n);
  m.write(dir, cfg);
}

/// Compares the well-planned quantified set with `generated` (default: the
/// generate output for model/n).
inline MetricReport run_evaluate(const Layout& l, const PipelineConfig& cfg, const std::string& model, int n,
                                 const fs::path& generated_path = {}) {
  Manifest m(l, "evaluate");
  const QuantifiedSet q = load_quantified(l, n, &m);
  std::map<AreaId, LandUseConfig> generated;
  if (generated_path.empty()) {
    generated = load_generated(l, model, n, &m);
  } else {
    if (!fs::exists(generated_path)) throw DataError("missing generated set " + generated_path.string());
    m.set("generated_hash", file_hash(generated_path));
    const json j = read_json(generated_path);
    generated = decode_json(generated_path.string(), [&] { return config_set_from_json(j); });
  }
  const MetricReport report = metric_report(values_of(q.with_label(PlanLabel::kWell)), values_of(generated));
  const fs::path dir = l.evaluate(model, n);
  write_json(dir / "metric_report.json", json(report));
  m.set("model", model);
  m.set("n", n);
  m.write(dir, cfg);
  return report;
}

inline ScoringOutcome run_score(const Layout& l, const PipelineConfig& cfg, int n) {
  Manifest m(l, "score");
  const Labeling labels = labeling_from(load_quantified(l, n, &m), n, cfg.threshold);
  const ScoringOutcome out = score_holdout(labels, cfg.score_train_fraction, cfg.seed, cfg.scoring);
  const fs::path dir = l.score(n);
  write_json(dir / "scoring_model.json", json(out.model));
  std::string rows = "area_id,split,label,score\n";
  for (const auto& [id, s] : out.scores) {
    const bool train = std::binary_search(out.split.train.begin(), out.split.train.end(), id);
    rows += std::to_string(id) + "," + (train ? "train" : "test") + "," + (labels.well.count(id) ? "well" : "poor") +
            "," + csv::format(s) + "\n";
  }
  write_text(dir / "scores.csv", rows);
  write_json(dir / "summary.json", {{"n", n},
                                    {"train_areas", out.split.train.size()},
                                    {"test_areas", out.split.test.size()},
                                    {"test_well_mean", out.well_mean},
                                    {"test_poor_mean", out.poor_mean},
                                    {"test_rank_auc", out.auc}});
  m.set("n", n);
  m.write(dir, cfg);
  return out;
}

struct SweepRow {
  int n = 0;
  std::string model;
  MetricReport report;
};

/// For every n: quantify and label, then build each model's checkpoint,
/// generate for all labeled areas and compare with the well-planned set.
inline std::vector<SweepRow> run_sweep(const Layout& l, const PipelineConfig& cfg) {
  Manifest m(l, "sweep");
  const CityDataset ds = load_clean_dataset(l, &m);
  const auto embeddings = load_embeddings(l, &m);
  std::vector<SweepRow> rows;
  std::string table = "n,model,kl,js,hd,wd\n";
  for (int n : cfg.sweep_n) {
    const Labeling labels = label_dataset(ds, n, cfg.threshold);
    const auto well = values_of(labels.well);
    for (const auto& model : cfg.sweep_models) {
      const GanCheckpoint c = checkpoint_for(model, labels, embeddings, cfg.train);
      const MetricReport r = metric_report(well, values_of(generate_all(c, labeled_areas(labels), embeddings)));
      write_json(l.sweep() / ("n" + std::to_string(n)) / model / "metric_report.json", json(r));
      table += std::to_string(n) + "," + model + "," + csv::format(r.kl) + "," + csv::format(r.js) + "," +
               csv::format(r.hd) + "," + csv::format(r.wd) + "\n";
      rows.push_back({n, model, r});
    }
  }
  write_text(l.sweep() / "sweep.csv", table);
  m.write(l.sweep(), cfg);
  return rows;
}

/// Heatmap, channel CSV and sidecar for `channel` plus the category ratio
/// summary. `config_path` holds one configuration or a keyed set, in which
/// case `area` selects the entry.
inline fs::path run_render(const Layout& l, const PipelineConfig& cfg, const fs::path& config_path, int channel,
                           std::optional<AreaId> area = std::nullopt) {
  if (!fs::exists(config_path)) throw DataError("missing configuration file " + config_path.string());
  Manifest m(l, "render");
  m.set("config_hash", file_hash(config_path));
  const json j = read_json(config_path);
  const LandUseConfig c = decode_json(config_path.string(), [&] {
    if (!j.contains("configs")) return config_from_json(j);
    const auto set = config_set_from_json(j);
    if (!area) {
      if (set.size() != 1) throw ConfigError("configuration set holds several areas; pick one with --area");
      return set.begin()->second;
    }
    const auto it = set.find(*area);
    if (it == set.end()) throw ConfigError("area " + std::to_string(*area) + " is not in " + config_path.string());
    return it->second;
  });
  const Heatmap h = render_heatmap(c, channel);
  std::string stem = config_path.stem().string();
  if (area) stem += "_area" + std::to_string(*area);
  const fs::path base = l.render() / (stem + "_ch" + std::to_string(channel));
  write_text(base.string() + ".pgm", pgm_bytes(h));
  write_text(base.string() + ".csv", channel_csv(c, channel));
  json sidecar = heatmap_sidecar(h);
  if (channel < static_cast<int>(kPoiCategories.size())) sidecar["category"] = kPoiCategories[channel];
  write_json(base.string() + ".json", sidecar);
  std::vector<std::string> names(kPoiCategories.begin(), kPoiCategories.end());
  write_text(l.render() / (stem + "_summary.csv"), render_summary(c, names));
  m.set("channel", channel);
  m.write(l.render(), cfg);
  return base.string() + ".pgm";
}

}  // namespace urbanplan::pipeline
