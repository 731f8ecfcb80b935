#pragma once

// Explicit context features of the 8 target areas that ring a target area.
//
//   V  8 x (t-1)  month-over-month housing price change
//   R  8 x m      POI category ratios (all-zero row for an empty area)
//   O  8 x 5      bus: leaving, arriving, transition volume per day,
//                 stop count, mean card balance
//   U  8 x 5      taxi: leaving, arriving, transition volume per day,
//                 hour-averaged mean speed, hour-averaged mean distance
//
// Ring rows are ordered clockwise from the north-west neighbour:
// NW, N, NE, E, SE, S, SW, W. North is the direction of growing latitude.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "urbanplan/errors.hpp"
#include "urbanplan/geodata.hpp"
#include "urbanplan/tensor.hpp"

namespace urbanplan {

inline constexpr std::size_t kRingSize = 8;

struct ContextWindow {
  AreaIndex target;
  std::array<AreaIndex, kRingSize> ring;
};

inline constexpr std::array<std::pair<int, int>, kRingSize> kRingOffsets = {
    {{1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}}};

inline constexpr std::array<const char*, kRingSize> kRingNames = {"NW", "N", "NE", "E", "SE", "S", "SW", "W"};

inline ContextWindow make_window(const GridSpec& grid, AreaIndex target) {
  ContextWindow w{target, {}};
  for (std::size_t k = 0; k < kRingSize; ++k) {
    w.ring[k] = AreaIndex{target.row + kRingOffsets[k].first, target.col + kRingOffsets[k].second};
    if (!contains(grid, w.ring[k])) {
      throw DataError("target area (" + std::to_string(target.row) + ", " + std::to_string(target.col) +
                      ") has no complete ring of surrounding areas");
    }
  }
  return w;
}

/// Target areas whose full ring lies inside the region, in AreaId order.
inline std::vector<AreaIndex> interior_areas(const GridSpec& grid) {
  std::vector<AreaIndex> out;
  for (int r = 1; r + 1 < grid.region_rows; ++r)
    for (int c = 1; c + 1 < grid.region_cols; ++c) out.push_back({r, c});
  return out;
}

struct ContextFeatures {
  AreaId area = 0;
  Tensor V, R, O, U;

  std::size_t width() const { return V.cols() + R.cols() + O.cols() + U.cols(); }
};

namespace detail {

/// Ring position of the area containing a point, if any.
class RingLookup {
 public:
  RingLookup(const GridSpec& grid, const ContextWindow& w) : grid_(grid) {
    for (std::size_t k = 0; k < kRingSize; ++k) slot_.emplace(area_id(grid, w.ring[k]), static_cast<int>(k));
  }

  std::optional<int> slot(double lat, double lon) const {
    const auto a = area_of(grid_, lat, lon);
    if (!a) return std::nullopt;
    const auto it = slot_.find(area_id(grid_, *a));
    if (it == slot_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<AreaId> area(double lat, double lon) const {
    const auto a = area_of(grid_, lat, lon);
    if (!a) return std::nullopt;
    return area_id(grid_, *a);
  }

 private:
  const GridSpec& grid_;
  std::map<AreaId, int> slot_;
};

}  // namespace detail

inline Tensor value_added(const CityDataset& ds, const ContextWindow& w) {
  const int t = ds.months;
  if (t < 2) throw DataError("value_added: need at least 2 months of prices");
  std::map<AreaId, int> slot;
  for (std::size_t k = 0; k < kRingSize; ++k) slot.emplace(area_id(ds.grid, w.ring[k]), static_cast<int>(k));
  std::vector<std::vector<std::optional<double>>> price(kRingSize, std::vector<std::optional<double>>(t));
  for (const auto& p : ds.prices) {
    const auto it = slot.find(p.area_id);
    if (it == slot.end() || p.month_index >= t) continue;
    price[it->second][p.month_index] = p.price;
  }
  Tensor v({kRingSize, static_cast<std::size_t>(t - 1)});
  for (std::size_t k = 0; k < kRingSize; ++k) {
    for (int j = 0; j < t; ++j) {
      if (!price[k][j]) {
        throw DataError("value_added: area " + std::to_string(area_id(ds.grid, w.ring[k])) + " has no price for month " +
                        std::to_string(j));
      }
    }
    for (int j = 0; j + 1 < t; ++j) v(k, j) = *price[k][j + 1] - *price[k][j];
  }
  return v;
}

inline Tensor poi_ratio(const CityDataset& ds, const ContextWindow& w) {
  const detail::RingLookup ring(ds.grid, w);
  Tensor r({kRingSize, static_cast<std::size_t>(ds.categories)});
  std::array<double, kRingSize> total{};
  for (const auto& p : ds.pois) {
    const auto k = ring.slot(p.lat, p.lon);
    if (!k) continue;
    r(*k, p.category) += 1.0;
    total[*k] += 1.0;
  }
  for (std::size_t k = 0; k < kRingSize; ++k) {
    if (total[k] == 0.0) continue;
    for (std::size_t c = 0; c < r.cols(); ++c) r(k, c) /= total[k];
  }
  return r;
}

inline Tensor public_transport(const CityDataset& ds, const ContextWindow& w) {
  const detail::RingLookup ring(ds.grid, w);
  Tensor o({kRingSize, 5});
  std::array<double, kRingSize> balance_sum{}, balance_n{};
  for (const auto& b : ds.bus_events) {
    if (b.stop_flag) {
      if (const auto k = ring.slot(b.board_lat, b.board_lon)) o(*k, 3) += 1.0;
      continue;
    }
    const auto from_area = ring.area(b.board_lat, b.board_lon);
    const auto to_area = ring.area(b.alight_lat, b.alight_lon);
    const auto from = ring.slot(b.board_lat, b.board_lon);
    const auto to = ring.slot(b.alight_lat, b.alight_lon);
    if (from && from_area == to_area) {
      o(*from, 2) += 1.0;
    } else {
      if (from) o(*from, 0) += 1.0;
      if (to) o(*to, 1) += 1.0;
    }
    if (from) {
      balance_sum[*from] += b.card_balance;
      balance_n[*from] += 1.0;
    }
    if (to && to != from) {
      balance_sum[*to] += b.card_balance;
      balance_n[*to] += 1.0;
    }
  }
  const double days = ds.days;
  for (std::size_t k = 0; k < kRingSize; ++k) {
    for (int j = 0; j < 3; ++j) o(k, j) /= days;
    o(k, 4) = balance_n[k] > 0.0 ? balance_sum[k] / balance_n[k] : 0.0;
  }
  return o;
}

inline Tensor private_transport(const CityDataset& ds, const ContextWindow& w) {
  const detail::RingLookup ring(ds.grid, w);
  Tensor u({kRingSize, 5});
  // Per ring cell and hour: trip count, speed sum, distance sum.
  std::array<std::array<double, 24>, kRingSize> n{}, speed{}, dist{};
  for (const auto& t : ds.taxi_trips) {
    const auto from_area = ring.area(t.pickup_lat, t.pickup_lon);
    const auto to_area = ring.area(t.dropoff_lat, t.dropoff_lon);
    const auto from = ring.slot(t.pickup_lat, t.pickup_lon);
    const auto to = ring.slot(t.dropoff_lat, t.dropoff_lon);
    if (from && from_area == to_area) {
      u(*from, 2) += 1.0;
    } else {
      if (from) u(*from, 0) += 1.0;
      if (to) u(*to, 1) += 1.0;
    }
    auto touch = [&](int k) {
      n[k][t.hour] += 1.0;
      speed[k][t.hour] += t.speed;
      dist[k][t.hour] += t.distance;
    };
    if (from) touch(*from);
    if (to && to != from) touch(*to);
  }
  const double days = ds.days;
  for (std::size_t k = 0; k < kRingSize; ++k) {
    for (int j = 0; j < 3; ++j) u(k, j) /= days;
    double speed_avg = 0.0, dist_avg = 0.0;
    int hours = 0;
    for (int h = 0; h < 24; ++h) {
      if (n[k][h] == 0.0) continue;
      speed_avg += speed[k][h] / n[k][h];
      dist_avg += dist[k][h] / n[k][h];
      ++hours;
    }
    if (hours > 0) {
      u(k, 3) = speed_avg / hours;
      u(k, 4) = dist_avg / hours;
    }
  }
  return u;
}

inline ContextFeatures extract_features(const CityDataset& ds, const ContextWindow& w) {
  return ContextFeatures{area_id(ds.grid, w.target), value_added(ds, w), poi_ratio(ds, w), public_transport(ds, w),
                         private_transport(ds, w)};
}

/// Features of every interior target area, in AreaId order.
inline std::vector<ContextFeatures> extract_all(const CityDataset& ds) {
  std::vector<ContextFeatures> out;
  for (const auto& a : interior_areas(ds.grid)) out.push_back(extract_features(ds, make_window(ds.grid, a)));
  return out;
}

}  // namespace urbanplan
