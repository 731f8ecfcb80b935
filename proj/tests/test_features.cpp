#include <gtest/gtest.h>

#include "urbanplan/features.hpp"
#include "urbanplan/rng.hpp"

using namespace urbanplan;

namespace {

// 3x3 areas of 4x4 cells, each area one degree on a side.
GridSpec unit_grid(int rows = 3, int cols = 3) { return GridSpec{0.0, 0.0, 0.25, 4, rows, cols}; }

// Centre of area (row, col).
double mid(int k) { return k + 0.5; }

CityDataset base_dataset(const GridSpec& g) {
  CityDataset ds;
  ds.grid = g;
  ds.categories = 4;
  ds.months = 3;
  ds.days = 2;
  for (int id = 0; id < g.area_count(); ++id) {
    ds.prices.push_back({id, 0, 100.0});
    ds.prices.push_back({id, 1, 100.0 + id});
    ds.prices.push_back({id, 2, 100.0 + 3 * id});
  }
  return ds;
}

// Ring slot order: NW, N, NE, E, SE, S, SW, W.
enum Slot { kNW, kN, kNE, kE, kSE, kS, kSW, kW };

}  // namespace

TEST(ContextWindow, RingOrderClockwiseFromNorthWest) {
  const auto w = make_window(unit_grid(), {1, 1});
  EXPECT_EQ(w.ring[kNW], (AreaIndex{2, 0}));
  EXPECT_EQ(w.ring[kN], (AreaIndex{2, 1}));
  EXPECT_EQ(w.ring[kE], (AreaIndex{1, 2}));
  EXPECT_EQ(w.ring[kS], (AreaIndex{0, 1}));
  EXPECT_EQ(w.ring[kW], (AreaIndex{1, 0}));
}

TEST(ContextWindow, BorderTargetRejected) {
  EXPECT_THROW(make_window(unit_grid(), {0, 1}), DataError);
  EXPECT_EQ(interior_areas(unit_grid(5, 4)).size(), 6u);
}

TEST(Features, ValueAddedIsMonthlyDifference) {
  const auto ds = base_dataset(unit_grid());
  const auto w = make_window(ds.grid, {1, 1});
  const Tensor v = value_added(ds, w);
  ASSERT_EQ(v.shape(), (Shape{8, 2}));
  for (std::size_t k = 0; k < kRingSize; ++k) {
    const double id = area_id(ds.grid, w.ring[k]);
    EXPECT_DOUBLE_EQ(v(k, 0), id);
    EXPECT_DOUBLE_EQ(v(k, 1), 2 * id);
  }
}

TEST(Features, MissingPriceIsDataError) {
  auto ds = base_dataset(unit_grid());
  ds.prices.erase(ds.prices.begin() + 3 * 6 + 1);  // area 6, month 1
  EXPECT_THROW(value_added(ds, make_window(ds.grid, {1, 1})), DataError);
}

TEST(Features, PoiRatiosPerRingArea) {
  auto ds = base_dataset(unit_grid());
  ds.pois = {{mid(2), mid(0), 3}, {mid(2), mid(0), 3}, {mid(2), mid(0), 1}, {mid(1), mid(1), 0}};
  const Tensor r = poi_ratio(ds, make_window(ds.grid, {1, 1}));
  EXPECT_DOUBLE_EQ(r(kNW, 3), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r(kNW, 1), 1.0 / 3.0);
  for (std::size_t k = 1; k < kRingSize; ++k)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(r(k, c), 0.0);  // target POI is not in the ring
}

TEST(Features, TaxiVolumesAndHourAveragedStats) {
  auto ds = base_dataset(unit_grid());
  ds.taxi_trips = {
      {mid(2), mid(1), mid(1), mid(2), 30.0, 1000.0, 5},  // N -> E
      {mid(2), mid(1), mid(1), mid(2), 10.0, 3000.0, 5},  // N -> E, same hour
      {mid(2), mid(1), mid(1), mid(1), 50.0, 500.0, 9},   // N -> target
      {mid(0), mid(2), mid(0) + 0.2, mid(2) + 0.2, 20.0, 200.0, 0},  // within SE
  };
  const Tensor u = private_transport(ds, make_window(ds.grid, {1, 1}));
  EXPECT_DOUBLE_EQ(u(kN, 0), 3.0 / 2.0);
  EXPECT_DOUBLE_EQ(u(kE, 1), 2.0 / 2.0);
  EXPECT_DOUBLE_EQ(u(kSE, 2), 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(u(kSE, 0), 0.0);
  // N: hour 5 mean speed 20, hour 9 mean 50.
  EXPECT_DOUBLE_EQ(u(kN, 3), (20.0 + 50.0) / 2.0);
  EXPECT_DOUBLE_EQ(u(kN, 4), (2000.0 + 500.0) / 2.0);
  EXPECT_DOUBLE_EQ(u(kE, 3), 20.0);
  EXPECT_EQ(u(kW, 3), 0.0);
}

TEST(Features, BusVolumesStopsAndBalance) {
  auto ds = base_dataset(unit_grid());
  ds.bus_events = {
      {mid(0), mid(1), 0, 0, 0.0, true},                  // stop in S
      {mid(0), mid(1), 0, 0, 0.0, true},                  // stop in S
      {mid(0), mid(1), mid(1), mid(0), 10.0, false},      // S -> W
      {mid(0), mid(1), mid(0), mid(1) + 0.3, 20.0, false},  // within S
  };
  const Tensor o = public_transport(ds, make_window(ds.grid, {1, 1}));
  EXPECT_DOUBLE_EQ(o(kS, 3), 2.0);  // stop count is not per day
  EXPECT_DOUBLE_EQ(o(kS, 0), 0.5);
  EXPECT_DOUBLE_EQ(o(kW, 1), 0.5);
  EXPECT_DOUBLE_EQ(o(kS, 2), 0.5);
  EXPECT_DOUBLE_EQ(o(kS, 4), 15.0);
  EXPECT_DOUBLE_EQ(o(kW, 4), 10.0);
  EXPECT_EQ(o(kN, 4), 0.0);
}

// Property: shifting every record one area north and relabelling price ids
// moves the features of (r, c) to (r + 1, c) unchanged. Coordinates are
// dyadic so the shift is exact.
TEST(Features, TranslationEquivariance) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    auto coord = [&](double hi) { return std::floor(rng.uniform() * hi * 1024.0) / 1024.0; };
    const GridSpec g = unit_grid(4, 3);
    CityDataset ds = base_dataset(g);
    for (auto& p : ds.prices) p.price += 7.0 * static_cast<double>(rng.below(10));
    for (int i = 0; i < 300; ++i)
      ds.pois.push_back({coord(3.0), coord(3.0), static_cast<int>(rng.below(4))});
    for (int i = 0; i < 200; ++i)
      ds.taxi_trips.push_back({coord(3.0), coord(3.0), coord(3.0), coord(3.0), coord(60.0), coord(5000.0),
                               static_cast<int>(rng.below(24))});
    for (int i = 0; i < 200; ++i)
      ds.bus_events.push_back({coord(3.0), coord(3.0), coord(3.0), coord(3.0), coord(50.0), rng.below(5) == 0});

    CityDataset shifted = ds;
    for (auto& p : shifted.pois) p.lat += 1.0;
    for (auto& t : shifted.taxi_trips) t.pickup_lat += 1.0, t.dropoff_lat += 1.0;
    for (auto& b : shifted.bus_events) b.board_lat += 1.0, b.alight_lat += 1.0;
    for (auto& p : shifted.prices) p.area_id = (p.area_id + g.region_cols) % g.area_count();

    const auto a = extract_features(ds, make_window(g, {1, 1}));
    const auto b = extract_features(shifted, make_window(g, {2, 1}));
    EXPECT_EQ(a.V, b.V) << seed;
    EXPECT_EQ(a.R, b.R) << seed;
    EXPECT_EQ(a.O, b.O) << seed;
    EXPECT_EQ(a.U, b.U) << seed;
  }
}

// Property: ratio rows sum to 1 or are all zero.
TEST(Features, RatioRowsAreDistributions) {
  Rng rng(11);
  auto ds = base_dataset(unit_grid());
  for (int i = 0; i < 100; ++i) ds.pois.push_back({rng.uniform() * 2.0, rng.uniform() * 3.0, static_cast<int>(rng.below(4))});
  const Tensor r = poi_ratio(ds, make_window(ds.grid, {1, 1}));
  for (std::size_t k = 0; k < kRingSize; ++k) {
    double s = 0.0;
    for (std::size_t c = 0; c < r.cols(); ++c) s += r(k, c);
    EXPECT_TRUE(s == 0.0 || std::abs(s - 1.0) < 1e-12) << k;
  }
  // Row 2 (latitude >= 2) gets no POIs here.
  EXPECT_EQ(r(kN, 0) + r(kN, 1) + r(kN, 2) + r(kN, 3), 0.0);
}
