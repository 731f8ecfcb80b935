#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "urbanplan/synth.hpp"

namespace testing_support {

/// Small synthetic city: 8x8 areas, 36 interior targets.
inline urbanplan::SynthParams small_city() {
  urbanplan::SynthParams p;
  p.grid.region_rows = 8;
  p.grid.region_cols = 8;
  p.poi_count = 6000;
  p.checkin_count = 8000;
  p.taxi_count = 2000;
  p.bus_count = 2000;
  p.bus_stop_count = 200;
  return p;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("urbanplan_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing_support
