#pragma once

// JSON and CSV forms of the pipeline artifacts. Doubles are written in
// shortest round-trip form, so write -> read -> write is byte-stable.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "urbanplan/configplan.hpp"
#include "urbanplan/csv.hpp"
#include "urbanplan/errors.hpp"
#include "urbanplan/evalsuite.hpp"
#include "urbanplan/features.hpp"
#include "urbanplan/geodata.hpp"
#include "urbanplan/lucgan.hpp"
#include "urbanplan/spatialgraph.hpp"
#include "urbanplan/synth.hpp"
#include "urbanplan/vgae.hpp"

namespace urbanplan {

using json = nlohmann::json;

inline constexpr const char* kFormatVersion = "urbanplan-1";

// ---------------------------------------------------------------------------
// File helpers

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": invalid JSON: " + e.what());
  }
}

inline void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

/// Runs `fn` and rewraps JSON access errors (missing keys, wrong types) as
/// DataError naming `what`.
template <class F>
auto decode_json(const std::string& what, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(what + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Numerical core

inline void to_json(json& j, const Tensor& t) { j = json{{"shape", t.shape()}, {"values", t.values()}}; }

inline void from_json(const json& j, Tensor& t) {
  t = Tensor(j.at("shape").get<Shape>(), j.at("values").get<std::vector<double>>());
}

inline json params_to_json(const ParamSet& p) {
  json j = json::object();
  for (const auto& [name, t] : p) j[name] = t;
  return j;
}

inline ParamSet params_from_json(const json& j) {
  ParamSet p;
  for (const auto& [name, t] : j.items()) p[name] = t.get<Tensor>();
  return p;
}

// ---------------------------------------------------------------------------
// Geodata

inline void to_json(json& j, const GridSpec& g) {
  j = json{{"origin_lat", g.origin_lat}, {"origin_lon", g.origin_lon}, {"cell_size", g.cell_size},
           {"n", g.n},                   {"region_rows", g.region_rows}, {"region_cols", g.region_cols}};
}

inline void from_json(const json& j, GridSpec& g) {
  GridSpec d;
  g.origin_lat = j.value("origin_lat", d.origin_lat);
  g.origin_lon = j.value("origin_lon", d.origin_lon);
  g.cell_size = j.value("cell_size", d.cell_size);
  g.n = j.value("n", d.n);
  g.region_rows = j.value("region_rows", d.region_rows);
  g.region_cols = j.value("region_cols", d.region_cols);
}

inline void to_json(json& j, const SynthParams& p) {
  j = json{{"grid", p.grid},
           {"categories", p.categories},
           {"months", p.months},
           {"days", p.days},
           {"planned_fraction", p.planned_fraction},
           {"poi_count", p.poi_count},
           {"checkin_count", p.checkin_count},
           {"taxi_count", p.taxi_count},
           {"bus_count", p.bus_count},
           {"bus_stop_count", p.bus_stop_count}};
}

/// Missing keys keep their defaults, so a config file may list only what it
/// changes.
inline void from_json(const json& j, SynthParams& p) {
  if (j.contains("grid")) p.grid = j.at("grid").get<GridSpec>();
  p.categories = j.value("categories", p.categories);
  p.months = j.value("months", p.months);
  p.days = j.value("days", p.days);
  p.planned_fraction = j.value("planned_fraction", p.planned_fraction);
  p.poi_count = j.value("poi_count", p.poi_count);
  p.checkin_count = j.value("checkin_count", p.checkin_count);
  p.taxi_count = j.value("taxi_count", p.taxi_count);
  p.bus_count = j.value("bus_count", p.bus_count);
  p.bus_stop_count = j.value("bus_stop_count", p.bus_stop_count);
}

inline void to_json(json& j, const FileReport& r) {
  j = json{{"path", r.path}, {"rows", r.rows}, {"kept", r.kept}, {"dropped", r.dropped}};
}

inline void to_json(json& j, const LoadReport& r) {
  j = json{{"pois", r.pois}, {"checkins", r.checkins}, {"prices", r.prices}, {"taxi", r.taxi},
           {"bus", r.bus},   {"months", r.months},     {"days", r.days}};
}

// ---------------------------------------------------------------------------
// Features and graphs

inline void to_json(json& j, const ContextFeatures& f) {
  j = json{{"area", f.area}, {"V", f.V}, {"R", f.R}, {"O", f.O}, {"U", f.U}};
}

inline void from_json(const json& j, ContextFeatures& f) {
  f.area = j.at("area").get<AreaId>();
  f.V = j.at("V").get<Tensor>();
  f.R = j.at("R").get<Tensor>();
  f.O = j.at("O").get<Tensor>();
  f.U = j.at("U").get<Tensor>();
}

/// Adjacency as an undirected edge list (i < j), features row-major with
/// column names.
inline json graph_to_json(const SpatialGraph& g, const std::vector<std::string>& columns) {
  json edges = json::array();
  for (std::size_t i = 0; i < g.adjacency.rows(); ++i)
    for (std::size_t k = i + 1; k < g.adjacency.cols(); ++k)
      if (g.adjacency(i, k) != 0.0) edges.push_back({i, k});
  return json{{"area", g.area},
              {"nodes", g.adjacency.rows()},
              {"edges", edges},
              {"columns", columns},
              {"features", g.features.values()}};
}

inline SpatialGraph graph_from_json(const json& j) {
  SpatialGraph g;
  g.area = j.at("area").get<AreaId>();
  const auto nodes = j.at("nodes").get<std::size_t>();
  g.adjacency = Tensor({nodes, nodes});
  for (const auto& e : j.at("edges")) {
    const auto a = e.at(0).get<std::size_t>(), b = e.at(1).get<std::size_t>();
    if (a >= nodes || b >= nodes) throw DataError("graph edge references a missing node");
    g.adjacency(a, b) = g.adjacency(b, a) = 1.0;
  }
  const auto cols = j.at("columns").size();
  g.features = Tensor({nodes, cols}, j.at("features").get<std::vector<double>>());
  return g;
}

// ---------------------------------------------------------------------------
// VGAE

inline json vgae_to_json(const VgaeModel& m) {
  const auto& c = m.config;
  return json{{"format", kFormatVersion},
              {"kind", "vgae"},
              {"config",
               {{"hidden", c.hidden},
                {"latent", c.latent},
                {"lr", c.lr},
                {"epochs", c.epochs},
                {"self_loops", c.self_loops},
                {"kl_weight", c.kl_weight},
                {"pooling", c.pooling == Pooling::kMean ? "mean" : "flatten"},
                {"seed", c.seed}}},
              {"standardizer", {{"mean", m.standardizer.mean}, {"stddev", m.standardizer.stddev}}},
              {"params", params_to_json(m.params)},
              {"loss_history", m.loss_history},
              {"recon_history", m.recon_history}};
}

inline VgaeModel vgae_from_json(const json& j) {
  VgaeModel m;
  const auto& c = j.at("config");
  m.config.hidden = c.at("hidden").get<std::size_t>();
  m.config.latent = c.at("latent").get<std::size_t>();
  m.config.lr = c.at("lr").get<double>();
  m.config.epochs = c.at("epochs").get<int>();
  m.config.self_loops = c.at("self_loops").get<bool>();
  m.config.kl_weight = c.at("kl_weight").get<double>();
  m.config.pooling = c.at("pooling").get<std::string>() == "flatten" ? Pooling::kFlatten : Pooling::kMean;
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
  m.standardizer.stddev = j.at("standardizer").at("stddev").get<std::vector<double>>();
  m.params = params_from_json(j.at("params"));
  m.loss_history = j.at("loss_history").get<std::vector<double>>();
  m.recon_history = j.at("recon_history").get<std::vector<double>>();
  return m;
}

/// area_id,e0,...,e{H-1}
inline std::string embeddings_csv(const std::map<AreaId, std::vector<double>>& embeddings) {
  std::string out = "area_id";
  const std::size_t width = embeddings.empty() ? 0 : embeddings.begin()->second.size();
  for (std::size_t k = 0; k < width; ++k) out += ",e" + std::to_string(k);
  out += "\n";
  for (const auto& [id, e] : embeddings) {
    out += std::to_string(id);
    for (double v : e) out += "," + csv::format(v);
    out += "\n";
  }
  return out;
}

inline std::map<AreaId, std::vector<double>> read_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = csv::split(line);
  if (header.empty() || csv::trim(header.front()) != "area_id") throw DataError(path.string() + ": bad header");
  std::map<AreaId, std::vector<double>> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != header.size()) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " fields");
    }
    std::vector<double> e;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      try {
        e.push_back(std::stod(std::string(csv::trim(fields[k]))));
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ":" + std::to_string(k + 1) + ": not a number");
      }
    }
    out[static_cast<AreaId>(std::stoll(std::string(csv::trim(fields[0]))))] = std::move(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Configurations

inline json config_to_json(const LandUseConfig& c) {
  return json{{"n", c.n}, {"m", c.m}, {"dtype", "float64"}, {"layout", "row-major (i, j, channel)"}, {"values", c.counts}};
}

inline LandUseConfig config_from_json(const json& j) {
  if (j.contains("dtype") && j.at("dtype").get<std::string>() != "float64") {
    throw DataError("configuration dtype must be float64");
  }
  return LandUseConfig(j.at("n").get<int>(), j.at("m").get<int>(), j.at("values").get<std::vector<double>>());
}

/// i,j,channel,value
inline std::string config_csv(const LandUseConfig& c) {
  std::string out = "i,j,channel,value\n";
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      for (int ch = 0; ch < c.m; ++ch)
        out += std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(ch) + "," +
               csv::format(c.at(i, j, ch)) + "\n";
  return out;
}

/// A set of configurations keyed by area: shared header, one entry per area.
inline json config_set_to_json(const std::map<AreaId, LandUseConfig>& configs, int n, int m) {
  json entries = json::array();
  for (const auto& [id, c] : configs) entries.push_back({{"area", id}, {"values", c.counts}});
  return json{{"n", n}, {"m", m}, {"dtype", "float64"}, {"layout", "row-major (i, j, channel)"}, {"configs", entries}};
}

inline std::map<AreaId, LandUseConfig> config_set_from_json(const json& j) {
  const int n = j.at("n").get<int>(), m = j.at("m").get<int>();
  std::map<AreaId, LandUseConfig> out;
  for (const auto& e : j.at("configs"))
    out.emplace(e.at("area").get<AreaId>(), LandUseConfig(n, m, e.at("values").get<std::vector<double>>()));
  return out;
}

inline std::vector<LandUseConfig> values_of(const std::map<AreaId, LandUseConfig>& configs) {
  std::vector<LandUseConfig> out;
  for (const auto& [id, c] : configs) out.push_back(c);
  return out;
}

/// area_id,label,q,freq,div,freq_raw,div_raw
inline std::string labels_csv(const Labeling& l) {
  std::string out = "area_id,label,q,freq,div,freq_raw,div_raw\n";
  for (const auto& [id, s] : l.scores) {
    out += std::to_string(id) + "," + (s.label == PlanLabel::kWell ? "well" : "poor") + "," + csv::format(s.q) + "," +
           csv::format(s.freq) + "," + csv::format(s.div) + "," + csv::format(s.freq_raw) + "," +
           csv::format(s.div_raw) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// GAN

inline json train_config_to_json(const TrainConfig& c) {
  return json{{"model", model_name(c.model)}, {"kappa", c.kappa},       {"batch", c.batch},
              {"epochs", c.epochs},           {"lr_g", c.lr_g},         {"lr_d", c.lr_d},
              {"momentum_d", c.momentum_d},   {"noise_dim", c.noise_dim}, {"ca_dim", c.ca_dim},
              {"hidden", c.hidden},           {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const json& j, TrainConfig c = {}) {
  if (j.contains("model")) c.model = parse_model(j.at("model").get<std::string>());
  c.kappa = j.value("kappa", c.kappa);
  c.batch = j.value("batch", c.batch);
  c.epochs = j.value("epochs", c.epochs);
  c.lr_g = j.value("lr_g", c.lr_g);
  c.lr_d = j.value("lr_d", c.lr_d);
  c.momentum_d = j.value("momentum_d", c.momentum_d);
  c.noise_dim = j.value("noise_dim", c.noise_dim);
  c.ca_dim = j.value("ca_dim", c.ca_dim);
  c.hidden = j.value("hidden", c.hidden);
  c.seed = j.value("seed", c.seed);
  return c;
}

inline json checkpoint_to_json(const GanCheckpoint& c) {
  json history = json::array();
  for (const auto& h : c.history)
    history.push_back({{"epoch", h.epoch}, {"disc_loss", h.disc_loss}, {"gen_loss", h.gen_loss}, {"kl_term", h.kl_term}});
  json j{{"format", kFormatVersion},
         {"kind", "gan"},
         {"config", train_config_to_json(c.config)},
         {"n", c.n},
         {"m", c.m},
         {"embed_dim", c.embed_dim},
         {"epoch", c.epoch},
         {"history", history},
         {"generator", params_to_json(c.generator)},
         {"discriminator", params_to_json(c.discriminator)}};
  if (c.ca) j["ca"] = params_to_json(*c.ca);
  return j;
}

inline GanCheckpoint checkpoint_from_json(const json& j) {
  GanCheckpoint c;
  c.config = train_config_from_json(j.at("config"));
  c.n = j.at("n").get<int>();
  c.m = j.at("m").get<int>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.epoch = j.at("epoch").get<int>();
  for (const auto& h : j.at("history")) {
    c.history.push_back({h.at("epoch").get<int>(), h.at("disc_loss").get<double>(), h.at("gen_loss").get<double>(),
                         h.at("kl_term").get<double>()});
  }
  c.generator = params_from_json(j.at("generator"));
  c.discriminator = params_from_json(j.at("discriminator"));
  if (j.contains("ca")) c.ca = params_from_json(j.at("ca"));
  if ((c.config.model == GanModel::kLucganPlus) != c.ca.has_value()) {
    throw DataError("checkpoint model and augmentation parameters disagree");
  }
  return c;
}

/// epoch,disc_loss,gen_loss,kl_term
inline std::string train_log_csv(const std::vector<EpochLog>& history) {
  std::string out = "epoch,disc_loss,gen_loss,kl_term\n";
  for (const auto& h : history) {
    out += std::to_string(h.epoch) + "," + csv::format(h.disc_loss) + "," + csv::format(h.gen_loss) + "," +
           csv::format(h.kl_term) + "\n";
  }
  return out;
}

inline std::vector<EpochLog> read_train_log_csv(const std::filesystem::path& path) {
  csv::Reader reader(path, {"epoch", "disc_loss", "gen_loss", "kl_term"});
  std::vector<EpochLog> out;
  while (reader.next()) {
    out.push_back({static_cast<int>(reader.integer(0)), reader.real(1), reader.real(2), reader.real(3)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

inline void to_json(json& j, const MetricReport& r) {
  j = json{{"kl", r.kl},
           {"js", r.js},
           {"hd", r.hd},
           {"wd", r.wd},
           {"well_count", r.well_count},
           {"generated_count", r.generated_count},
           {"well_skipped", r.well_skipped},
           {"generated_skipped", r.generated_skipped},
           {"n", r.n},
           {"m", r.m},
           {"epsilon", r.epsilon},
           {"profile_method", r.profile_method},
           {"wd_method", r.wd_method}};
}

inline void from_json(const json& j, MetricReport& r) {
  r.kl = j.at("kl").get<double>();
  r.js = j.at("js").get<double>();
  r.hd = j.at("hd").get<double>();
  r.wd = j.at("wd").get<double>();
  r.well_count = j.at("well_count").get<std::size_t>();
  r.generated_count = j.at("generated_count").get<std::size_t>();
  r.well_skipped = j.at("well_skipped").get<std::size_t>();
  r.generated_skipped = j.at("generated_skipped").get<std::size_t>();
  r.n = j.at("n").get<int>();
  r.m = j.at("m").get<int>();
  r.epsilon = j.at("epsilon").get<double>();
  r.profile_method = j.at("profile_method").get<std::string>();
  r.wd_method = j.at("wd_method").get<std::string>();
}

inline void to_json(json& j, const ScoringModel& s) {
  j = json{{"m", s.m},
           {"mean", s.mean},
           {"stddev", s.stddev},
           {"weights", s.weights},
           {"bias", s.bias},
           {"config", {{"steps", s.config.steps}, {"lr", s.config.lr}, {"l2", s.config.l2}}},
           {"well_count", s.well_count},
           {"poor_count", s.poor_count},
           {"final_loss", s.final_loss}};
}

inline void from_json(const json& j, ScoringModel& s) {
  s.m = j.at("m").get<int>();
  s.mean = j.at("mean").get<std::vector<double>>();
  s.stddev = j.at("stddev").get<std::vector<double>>();
  s.weights = j.at("weights").get<std::vector<double>>();
  s.bias = j.at("bias").get<double>();
  s.config.steps = j.at("config").at("steps").get<int>();
  s.config.lr = j.at("config").at("lr").get<double>();
  s.config.l2 = j.at("config").at("l2").get<double>();
  s.well_count = j.at("well_count").get<std::size_t>();
  s.poor_count = j.at("poor_count").get<std::size_t>();
  s.final_loss = j.at("final_loss").get<double>();
}

// ---------------------------------------------------------------------------
// Run manifest

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

inline std::string file_hash(const std::filesystem::path& path) { return hex64(fnv1a64(read_text(path))); }

}  // namespace urbanplan
