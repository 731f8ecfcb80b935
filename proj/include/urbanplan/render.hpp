#pragma once

// Per-category heatmaps of a configuration as binary PGM (P5). Pixel row r
// shows latitude row n-1-r so north is up. Gray level is
// round(255 * (1 - value / max)): the channel maximum is black, zero white.

#include <cmath>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "urbanplan/configplan.hpp"
#include "urbanplan/csv.hpp"
#include "urbanplan/errors.hpp"

namespace urbanplan {

struct Heatmap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
  double max_value = 0.0;
  int channel = 0;
};

inline std::uint8_t gray_level(double value, double max_value) {
  if (!(max_value > 0.0)) return 255;
  const double t = std::clamp(value / max_value, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(255.0 * (1.0 - t)));
}

inline Heatmap render_heatmap(const LandUseConfig& c, int channel) {
  if (channel < 0 || channel >= c.m) {
    throw ConfigError("channel " + std::to_string(channel) + " out of range [0, " + std::to_string(c.m) + ")");
  }
  Heatmap h{c.n, c.n, std::vector<std::uint8_t>(static_cast<std::size_t>(c.n) * c.n, 255), 0.0, channel};
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j) h.max_value = std::max(h.max_value, c.at(i, j, channel));
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      h.pixels[static_cast<std::size_t>(c.n - 1 - i) * c.n + j] = gray_level(c.at(i, j, channel), h.max_value);
  return h;
}

inline std::string pgm_bytes(const Heatmap& h) {
  std::string out = "P5\n" + std::to_string(h.width) + " " + std::to_string(h.height) + "\n255\n";
  out.append(h.pixels.begin(), h.pixels.end());
  return out;
}

/// i,j,value for one channel.
inline std::string channel_csv(const LandUseConfig& c, int channel) {
  std::string out = "i,j,value\n";
  for (int i = 0; i < c.n; ++i)
    for (int j = 0; j < c.n; ++j)
      out += std::to_string(i) + "," + std::to_string(j) + "," + csv::format(c.at(i, j, channel)) + "\n";
  return out;
}

inline nlohmann::json heatmap_sidecar(const Heatmap& h) {
  return {{"format", "PGM P5"},
          {"width", h.width},
          {"height", h.height},
          {"channel", h.channel},
          {"max_value", h.max_value},
          {"mapping", "gray = round(255 * (1 - clamp(value / max_value, 0, 1))); 255 everywhere when max_value is 0"},
          {"orientation", "pixel row r shows latitude row height-1-r; column j is longitude column j"}};
}

/// channel,name,total,ratio
inline std::string render_summary(const LandUseConfig& c, const std::vector<std::string>& names) {
  const ConfigSummary s = config_summary(c);
  std::string out = "channel,name,total,ratio\n";
  for (int ch = 0; ch < c.m; ++ch) {
    const std::string name = ch < static_cast<int>(names.size()) ? names[static_cast<std::size_t>(ch)] : "";
    out += std::to_string(ch) + "," + name + "," + csv::format(s.totals[static_cast<std::size_t>(ch)]) + "," +
           csv::format(s.ratios[static_cast<std::size_t>(ch)]) + "\n";
  }
  return out;
}

}  // namespace urbanplan
