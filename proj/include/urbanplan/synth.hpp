#pragma once

// Parametric synthetic city. Stands in for proprietary city data so the
// whole pipeline runs end to end.
//
// Every target area is built in one of two modes:
//   well-planned: POIs spread over most categories, each category placed
//                 around a city-wide preferred spot inside the area, high
//                 check-in intensity, rising prices;
//   poorly-planned: POIs from a handful of categories scattered uniformly,
//                 low check-in intensity, flat prices.
// Exactly round(p * areas) areas are well-planned, chosen by a seeded
// shuffle. Taxi and bus endpoints are drawn with probability proportional
// to the POI count of each area.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "urbanplan/errors.hpp"
#include "urbanplan/geodata.hpp"
#include "urbanplan/rng.hpp"

namespace urbanplan {

struct SynthParams {
  GridSpec grid{39.80, 116.20, 0.001, 10, 18, 18};
  int categories = static_cast<int>(kDefaultCategories);
  int months = 13;
  int days = 7;
  double planned_fraction = 0.5;
  std::size_t poi_count = 40000;
  std::size_t checkin_count = 60000;
  std::size_t taxi_count = 20000;
  std::size_t bus_count = 20000;
  std::size_t bus_stop_count = 1500;

  void validate() const {
    grid.validate();
    std::string problems;
    if (categories < 2) problems += " categories must be >= 2;";
    if (months < 2) problems += " months must be >= 2;";
    if (days < 1) problems += " days must be >= 1;";
    if (!(planned_fraction > 0.0 && planned_fraction < 1.0)) problems += " planned_fraction must be in (0, 1);";
    if (poi_count == 0) problems += " poi_count must be > 0;";
    if (checkin_count == 0) problems += " checkin_count must be > 0;";
    if (taxi_count == 0) problems += " taxi_count must be > 0;";
    if (bus_count == 0) problems += " bus_count must be > 0;";
    if (bus_stop_count == 0) problems += " bus_stop_count must be > 0;";
    if (!problems.empty()) throw ConfigError("invalid synthesis parameters:" + problems);
  }
};

struct SynthResult {
  CityDataset dataset;
  std::vector<bool> well_planned;  // construction mode per AreaId
};

namespace detail {

enum SynthStream : std::uint64_t { kModes = 1, kLayout, kPois, kCheckins, kPrices, kTaxi, kBus, kStops };

/// Index drawn from cumulative weights.
inline std::size_t pick(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

inline std::vector<double> cumsum(const std::vector<double>& w) {
  std::vector<double> c(w.size());
  std::partial_sum(w.begin(), w.end(), c.begin());
  return c;
}

/// Point strictly inside the area at fractional offsets (fy, fx) in [0, 1).
inline std::pair<double, double> area_point(const GridSpec& g, AreaIndex a, double fy, double fx) {
  const double size = g.area_size();
  // Keep a margin so no synthetic point sits on an area boundary.
  fy = std::clamp(fy, 1e-6, 1.0 - 1e-6);
  fx = std::clamp(fx, 1e-6, 1.0 - 1e-6);
  return {g.origin_lat + (a.row + fy) * size, g.origin_lon + (a.col + fx) * size};
}

}  // namespace detail

inline SynthResult synth_city(const SynthParams& params, std::uint64_t seed) {
  params.validate();
  const GridSpec& g = params.grid;
  const int areas = g.area_count();
  const int m = params.categories;
  SynthResult out;
  CityDataset& ds = out.dataset;
  ds.grid = g;
  ds.categories = m;
  ds.months = params.months;
  ds.days = params.days;

  // Modes.
  {
    Rng rng = Rng::stream(seed, detail::kModes);
    std::vector<int> order(areas);
    std::iota(order.begin(), order.end(), 0);
    for (int i = areas - 1; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
    const int well = static_cast<int>(std::lround(params.planned_fraction * areas));
    out.well_planned.assign(areas, false);
    for (int i = 0; i < well; ++i) out.well_planned[order[i]] = true;
  }

  // City-wide layout shared by well-planned areas: a preferred spot and a
  // popularity weight per category.
  std::vector<std::pair<double, double>> spot(m);
  std::vector<double> popularity(m);
  {
    Rng rng = Rng::stream(seed, detail::kLayout);
    for (int c = 0; c < m; ++c) {
      spot[c] = {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)};
      popularity[c] = rng.uniform(0.5, 1.5);
    }
  }

  // POIs.
  std::vector<double> poi_intensity(areas);
  std::vector<std::size_t> poi_per_area(areas, 0);
  {
    Rng rng = Rng::stream(seed, detail::kPois);
    for (int a = 0; a < areas; ++a) poi_intensity[a] = (out.well_planned[a] ? 1.3 : 0.7) * rng.uniform(0.8, 1.2);
    const double total = std::accumulate(poi_intensity.begin(), poi_intensity.end(), 0.0);
    const auto cum_pop = detail::cumsum(popularity);
    for (int a = 0; a < areas; ++a) {
      const AreaIndex idx = area_index(g, a);
      const auto count = rng.poisson(static_cast<double>(params.poi_count) * poi_intensity[a] / total);
      poi_per_area[a] = count;
      if (out.well_planned[a]) {
        for (std::uint64_t k = 0; k < count; ++k) {
          const int c = static_cast<int>(detail::pick(cum_pop, rng));
          const double fy = rng.normal(spot[c].first, 0.08);
          const double fx = rng.normal(spot[c].second, 0.08);
          const auto [lat, lon] = detail::area_point(g, idx, fy, fx);
          ds.pois.push_back({lat, lon, c});
        }
      } else {
        const int kinds = 2 + static_cast<int>(rng.below(3));
        std::vector<int> chosen;
        while (static_cast<int>(chosen.size()) < kinds) {
          const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
          if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
        }
        for (std::uint64_t k = 0; k < count; ++k) {
          const int c = chosen[rng.below(chosen.size())];
          const auto [lat, lon] = detail::area_point(g, idx, rng.uniform(), rng.uniform());
          ds.pois.push_back({lat, lon, c});
        }
      }
    }
  }

  // Check-ins.
  {
    Rng rng = Rng::stream(seed, detail::kCheckins);
    std::vector<double> intensity(areas);
    for (int a = 0; a < areas; ++a) intensity[a] = out.well_planned[a] ? rng.uniform(2.0, 3.0) : rng.uniform(0.3, 0.9);
    const double total = std::accumulate(intensity.begin(), intensity.end(), 0.0);
    const std::int64_t start = 1325376000;  // 2012-01-01T00:00:00Z
    for (int a = 0; a < areas; ++a) {
      const AreaIndex idx = area_index(g, a);
      const auto count = rng.poisson(static_cast<double>(params.checkin_count) * intensity[a] / total);
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto [lat, lon] = detail::area_point(g, idx, rng.uniform(), rng.uniform());
        const auto ts = start + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(params.days) * 86400));
        ds.checkins.push_back({lat, lon, ts});
      }
    }
    // Pin the day span to exactly `days` so a reload reproduces it.
    if (!ds.checkins.empty()) {
      ds.checkins.front().timestamp = start;
      ds.checkins.back().timestamp = start + static_cast<std::int64_t>(params.days) * 86400 - 1;
    }
  }

  // Housing prices: area-specific linear trend plus noise.
  {
    Rng rng = Rng::stream(seed, detail::kPrices);
    for (int a = 0; a < areas; ++a) {
      const double base = rng.uniform(20000.0, 60000.0);
      const double slope = out.well_planned[a] ? rng.uniform(150.0, 400.0) : rng.uniform(-100.0, 120.0);
      for (int t = 0; t < params.months; ++t) {
        const double price = std::max(1000.0, base + slope * t + rng.normal(0.0, 80.0));
        ds.prices.push_back({a, t, price});
      }
    }
  }

  std::vector<double> density(areas);
  for (int a = 0; a < areas; ++a) density[a] = static_cast<double>(poi_per_area[a]) + 1.0;
  const auto cum_density = detail::cumsum(density);

  auto random_point = [&](Rng& rng, AreaIndex idx) { return detail::area_point(g, idx, rng.uniform(), rng.uniform()); };
  auto distance_m = [](double lat1, double lon1, double lat2, double lon2) {
    return std::hypot(lat2 - lat1, lon2 - lon1) * 111000.0;
  };

  // Taxi trips: 20% stay inside the pickup area.
  {
    Rng rng = Rng::stream(seed, detail::kTaxi);
    for (std::size_t k = 0; k < params.taxi_count; ++k) {
      const AreaIndex from = area_index(g, static_cast<AreaId>(detail::pick(cum_density, rng)));
      const AreaIndex to = rng.uniform() < 0.2 ? from : area_index(g, static_cast<AreaId>(detail::pick(cum_density, rng)));
      const auto [plat, plon] = random_point(rng, from);
      const auto [dlat, dlon] = random_point(rng, to);
      TripRecord t{plat, plon, dlat, dlon, rng.uniform(15.0, 55.0), 0.0, static_cast<int>(rng.below(24))};
      t.distance = distance_m(plat, plon, dlat, dlon) * rng.uniform(1.1, 1.5);
      ds.taxi_trips.push_back(t);
    }
  }

  // Bus trips and stop-location records.
  {
    Rng rng = Rng::stream(seed, detail::kBus);
    for (std::size_t k = 0; k < params.bus_count; ++k) {
      const AreaIndex from = area_index(g, static_cast<AreaId>(detail::pick(cum_density, rng)));
      const AreaIndex to = rng.uniform() < 0.15 ? from : area_index(g, static_cast<AreaId>(detail::pick(cum_density, rng)));
      const auto [blat, blon] = random_point(rng, from);
      const auto [alat, alon] = random_point(rng, to);
      ds.bus_events.push_back({blat, blon, alat, alon, std::round(rng.uniform(0.0, 100.0) * 100.0) / 100.0, false});
    }
    Rng stops = Rng::stream(seed, detail::kStops);
    for (std::size_t k = 0; k < params.bus_stop_count; ++k) {
      const AreaIndex at = area_index(g, static_cast<AreaId>(detail::pick(cum_density, stops)));
      const auto [lat, lon] = random_point(stops, at);
      ds.bus_events.push_back({lat, lon, lat, lon, 0.0, true});
    }
  }
  return out;
}

}  // namespace urbanplan
