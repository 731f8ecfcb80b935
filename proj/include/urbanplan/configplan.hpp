#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "urbanplan/errors.hpp"
#include "urbanplan/features.hpp"
#include "urbanplan/geodata.hpp"

namespace urbanplan {

/// n x n x m land-use configuration. Entry (i, j, c) counts category-c POIs
/// in the cell at latitude row i and longitude column j of the area.
/// Quantified areas hold integer counts; generated ones hold reals.
struct LandUseConfig {
  int n = 0;
  int m = 0;
  std::vector<double> counts;

  LandUseConfig() = default;
  LandUseConfig(int side, int channels)
      : n(side), m(channels), counts(static_cast<std::size_t>(side) * side * channels, 0.0) {}
  LandUseConfig(int side, int channels, std::vector<double> values) : n(side), m(channels), counts(std::move(values)) {
    if (counts.size() != static_cast<std::size_t>(side) * side * channels) {
      throw ShapeError("LandUseConfig: " + std::to_string(counts.size()) + " values for shape " + std::to_string(side) +
                       "x" + std::to_string(side) + "x" + std::to_string(channels));
    }
  }

  std::size_t size() const noexcept { return counts.size(); }
  std::size_t offset(int i, int j, int c) const {
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * m + static_cast<std::size_t>(c);
  }
  double& at(int i, int j, int c) { return counts[offset(i, j, c)]; }
  double at(int i, int j, int c) const { return counts[offset(i, j, c)]; }

  double total() const {
    double s = 0.0;
    for (double v : counts) s += v;
    return s;
  }

  friend bool operator==(const LandUseConfig&, const LandUseConfig&) = default;
};

/// Counts the POIs of `area` into an n x n x m tensor. Cells follow the
/// half-open convention of cell_of on the grid refined to n cells per side.
inline LandUseConfig quantify(const CityDataset& ds, AreaIndex area, int n) {
  if (n < 1) throw ConfigError("quantify: n must be >= 1");
  if (!contains(ds.grid, area)) throw DataError("quantify: area outside the region");
  const GridSpec grid = ds.grid.with_n(n);
  LandUseConfig config(n, ds.categories);
  for (const auto& p : ds.pois) {
    const auto cell = cell_of(grid, p.lat, p.lon);
    if (!cell) continue;
    if (cell->row / n != area.row || cell->col / n != area.col) continue;
    config.at(static_cast<int>(cell->row % n), static_cast<int>(cell->col % n), p.category) += 1.0;
  }
  return config;
}

/// Quantifies many areas in one pass over the POIs.
inline std::map<AreaId, LandUseConfig> quantify_all(const CityDataset& ds, const std::vector<AreaIndex>& areas, int n) {
  if (n < 1) throw ConfigError("quantify: n must be >= 1");
  const GridSpec grid = ds.grid.with_n(n);
  std::map<AreaId, LandUseConfig> out;
  for (const auto& a : areas) out.emplace(area_id(ds.grid, a), LandUseConfig(n, ds.categories));
  for (const auto& p : ds.pois) {
    const auto cell = cell_of(grid, p.lat, p.lon);
    if (!cell) continue;
    const AreaIndex a{static_cast<int>(cell->row / n), static_cast<int>(cell->col / n)};
    const auto it = out.find(area_id(ds.grid, a));
    if (it == out.end()) continue;
    it->second.at(static_cast<int>(cell->row % n), static_cast<int>(cell->col % n), p.category) += 1.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Quality score

struct RawActivity {
  double freq = 0.0;  // check-ins inside the area
  double div = 0.0;   // distinct POI categories inside the area
};

struct NormStats {
  double freq_min = 0.0, freq_max = 0.0;
  double div_min = 0.0, div_max = 0.0;

  bool freq_degenerate() const { return !(freq_max > freq_min); }
  bool div_degenerate() const { return !(div_max > div_min); }
};

enum class PlanLabel { kPoor, kWell };

struct QualityScore {
  AreaId area = 0;
  double freq_raw = 0.0;
  double div_raw = 0.0;
  double freq = 0.0;
  double div = 0.0;
  double q = 0.0;
  PlanLabel label = PlanLabel::kPoor;
};

/// Harmonic mean 2 f d / (f + d), zero when both are zero.
inline double harmonic_quality(double freq, double div) {
  const double denom = freq + div;
  return denom > 0.0 ? 2.0 * freq * div / denom : 0.0;
}

inline std::map<AreaId, RawActivity> raw_activity(const CityDataset& ds, const std::vector<AreaIndex>& areas) {
  std::map<AreaId, RawActivity> out;
  std::map<AreaId, std::vector<bool>> seen;
  for (const auto& a : areas) {
    out.emplace(area_id(ds.grid, a), RawActivity{});
    seen.emplace(area_id(ds.grid, a), std::vector<bool>(static_cast<std::size_t>(ds.categories), false));
  }
  for (const auto& c : ds.checkins) {
    const auto a = area_of(ds.grid, c.lat, c.lon);
    if (!a) continue;
    if (const auto it = out.find(area_id(ds.grid, *a)); it != out.end()) it->second.freq += 1.0;
  }
  for (const auto& p : ds.pois) {
    const auto a = area_of(ds.grid, p.lat, p.lon);
    if (!a) continue;
    const AreaId id = area_id(ds.grid, *a);
    const auto it = seen.find(id);
    if (it == seen.end() || it->second[p.category]) continue;
    it->second[p.category] = true;
    out[id].div += 1.0;
  }
  return out;
}

inline NormStats norm_stats(const std::map<AreaId, RawActivity>& raw) {
  if (raw.empty()) throw DataError("norm_stats: no areas");
  NormStats s{raw.begin()->second.freq, raw.begin()->second.freq, raw.begin()->second.div, raw.begin()->second.div};
  for (const auto& [id, r] : raw) {
    s.freq_min = std::min(s.freq_min, r.freq);
    s.freq_max = std::max(s.freq_max, r.freq);
    s.div_min = std::min(s.div_min, r.div);
    s.div_max = std::max(s.div_max, r.div);
  }
  return s;
}

/// Min-max normalises freq and div, then combines them. A degenerate
/// component (min == max) is 0 for every area.
inline QualityScore quality(const RawActivity& raw, const NormStats& stats, double threshold) {
  QualityScore s;
  s.freq_raw = raw.freq;
  s.div_raw = raw.div;
  s.freq = stats.freq_degenerate() ? 0.0 : (raw.freq - stats.freq_min) / (stats.freq_max - stats.freq_min);
  s.div = stats.div_degenerate() ? 0.0 : (raw.div - stats.div_min) / (stats.div_max - stats.div_min);
  s.freq = std::clamp(s.freq, 0.0, 1.0);
  s.div = std::clamp(s.div, 0.0, 1.0);
  s.q = harmonic_quality(s.freq, s.div);
  s.label = s.q > threshold ? PlanLabel::kWell : PlanLabel::kPoor;
  return s;
}

struct Labeling {
  int n = 0;
  double threshold = 0.5;
  NormStats stats;
  std::vector<std::string> warnings;
  std::map<AreaId, QualityScore> scores;
  std::map<AreaId, LandUseConfig> well;
  std::map<AreaId, LandUseConfig> poor;
};

/// Scores and partitions the interior target areas (those with a full ring
/// of surrounding areas).
inline Labeling label_dataset(const CityDataset& ds, int n, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
  const auto areas = interior_areas(ds.grid);
  Labeling out;
  out.n = n;
  out.threshold = threshold;
  const auto raw = raw_activity(ds, areas);
  out.stats = norm_stats(raw);
  if (out.stats.freq_degenerate()) out.warnings.push_back("check-in frequency is identical in every area; freq set to 0");
  if (out.stats.div_degenerate()) out.warnings.push_back("POI diversity is identical in every area; div set to 0");
  auto configs = quantify_all(ds, areas, n);
  for (const auto& [id, r] : raw) {
    QualityScore s = quality(r, out.stats, threshold);
    s.area = id;
    out.scores.emplace(id, s);
    auto& bucket = s.label == PlanLabel::kWell ? out.well : out.poor;
    bucket.emplace(id, std::move(configs.at(id)));
  }
  if (out.well.empty() || out.poor.empty()) {
    throw DataError(std::string("labeling produced no ") + (out.well.empty() ? "well" : "poorly") +
                    "-planned areas at threshold " + std::to_string(threshold) +
                    "; adjust --threshold or the synthesis parameters");
  }
  return out;
}

struct ConfigSummary {
  std::vector<double> totals;  // per channel
  std::vector<double> ratios;  // totals / grand total, zeros if empty
};

inline ConfigSummary config_summary(const LandUseConfig& config) {
  ConfigSummary s{std::vector<double>(static_cast<std::size_t>(config.m), 0.0),
                  std::vector<double>(static_cast<std::size_t>(config.m), 0.0)};
  for (std::size_t k = 0; k < config.size(); ++k) s.totals[k % static_cast<std::size_t>(config.m)] += config.counts[k];
  double grand = 0.0;
  for (double t : s.totals) grand += t;
  if (grand > 0.0)
    for (std::size_t c = 0; c < s.totals.size(); ++c) s.ratios[c] = s.totals[c] / grand;
  return s;
}

}  // namespace urbanplan
