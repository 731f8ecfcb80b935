#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "urbanplan/csv.hpp"
#include "urbanplan/errors.hpp"

namespace urbanplan {

/// POI taxonomy shipped as the default channel list (code = index).
inline const std::array<const char*, 20> kPoiCategories = {
    "road",           "car service",        "car repair",       "motorbike service", "food service",
    "shopping",       "daily life service", "recreation service", "medical service", "lodging",
    "tourist attraction", "real estate",    "government place", "education",         "transportation",
    "finance",        "company",            "road furniture",   "specific address",  "public service"};

inline constexpr std::size_t kDefaultCategories = kPoiCategories.size();

/// Study region: region_rows x region_cols target areas, each divided into
/// n x n cells of edge `cell_size` degrees. Row index grows with latitude,
/// column index with longitude.
struct GridSpec {
  double origin_lat = 0.0;
  double origin_lon = 0.0;
  double cell_size = 1.0;
  int n = 1;
  int region_rows = 3;
  int region_cols = 3;

  double area_size() const { return cell_size * n; }
  int area_count() const { return region_rows * region_cols; }
  std::int64_t cell_rows() const { return static_cast<std::int64_t>(region_rows) * n; }
  std::int64_t cell_cols() const { return static_cast<std::int64_t>(region_cols) * n; }

  /// Same region with each target area split into `cells` per side.
  GridSpec with_n(int cells) const {
    GridSpec g = *this;
    g.cell_size = area_size() / cells;
    g.n = cells;
    return g;
  }

  void validate() const {
    std::string problems;
    if (n < 1) problems += " n must be >= 1;";
    if (!(cell_size > 0.0) || !std::isfinite(cell_size)) problems += " cell_size must be > 0;";
    if (region_rows < 3) problems += " region_rows must be >= 3;";
    if (region_cols < 3) problems += " region_cols must be >= 3;";
    if (!std::isfinite(origin_lat) || !std::isfinite(origin_lon)) problems += " origin must be finite;";
    if (!problems.empty()) throw ConfigError("invalid grid:" + problems);
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct CellIndex {
  std::int64_t row = 0;
  std::int64_t col = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Target-area coordinates inside the region.
struct AreaIndex {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const AreaIndex&, const AreaIndex&) = default;
};

using AreaId = int;

inline AreaId area_id(const GridSpec& grid, AreaIndex a) { return a.row * grid.region_cols + a.col; }
inline AreaIndex area_index(const GridSpec& grid, AreaId id) {
  return AreaIndex{id / grid.region_cols, id % grid.region_cols};
}
inline bool contains(const GridSpec& grid, AreaIndex a) {
  return a.row >= 0 && a.col >= 0 && a.row < grid.region_rows && a.col < grid.region_cols;
}

/// Cell containing a point. Cells are half-open [low, high) in both axes, so
/// a point on a shared edge belongs to the higher-index cell. Returns
/// nullopt outside the region.
inline std::optional<CellIndex> cell_of(const GridSpec& grid, double lat, double lon) {
  const double r = std::floor((lat - grid.origin_lat) / grid.cell_size);
  const double c = std::floor((lon - grid.origin_lon) / grid.cell_size);
  if (!(r >= 0.0) || !(c >= 0.0)) return std::nullopt;
  if (r >= static_cast<double>(grid.cell_rows()) || c >= static_cast<double>(grid.cell_cols())) return std::nullopt;
  return CellIndex{static_cast<std::int64_t>(r), static_cast<std::int64_t>(c)};
}

inline std::optional<AreaIndex> area_of(const GridSpec& grid, double lat, double lon) {
  const auto cell = cell_of(grid, lat, lon);
  if (!cell) return std::nullopt;
  return AreaIndex{static_cast<int>(cell->row / grid.n), static_cast<int>(cell->col / grid.n)};
}

struct PoiRecord {
  double lat = 0.0;
  double lon = 0.0;
  int category = 0;
};

struct CheckinRecord {
  double lat = 0.0;
  double lon = 0.0;
  std::int64_t timestamp = 0;
};

struct HousePriceRecord {
  AreaId area_id = 0;
  int month_index = 0;
  double price = 0.0;
};

struct TripRecord {
  double pickup_lat = 0.0, pickup_lon = 0.0;
  double dropoff_lat = 0.0, dropoff_lon = 0.0;
  double speed = 0.0;     // km/h
  double distance = 0.0;  // meters
  int hour = 0;
};

struct BusRecord {
  double board_lat = 0.0, board_lon = 0.0;
  double alight_lat = 0.0, alight_lon = 0.0;
  double card_balance = 0.0;
  bool stop_flag = false;
};

struct CityDataset {
  GridSpec grid;
  int categories = static_cast<int>(kDefaultCategories);
  int months = 0;  // t
  int days = 1;    // span used for per-day volumes
  std::vector<PoiRecord> pois;
  std::vector<CheckinRecord> checkins;
  std::vector<HousePriceRecord> prices;
  std::vector<TripRecord> taxi_trips;
  std::vector<BusRecord> bus_events;
};

/// Number of calendar days (UTC) touched by the check-in timestamps; 1 when
/// there are none.
inline int day_span(const std::vector<CheckinRecord>& checkins) {
  if (checkins.empty()) return 1;
  auto day = [](std::int64_t ts) { return ts >= 0 ? ts / 86400 : (ts - 86399) / 86400; };
  std::int64_t lo = day(checkins.front().timestamp), hi = lo;
  for (const auto& c : checkins) {
    lo = std::min(lo, day(c.timestamp));
    hi = std::max(hi, day(c.timestamp));
  }
  return static_cast<int>(hi - lo + 1);
}

// ---------------------------------------------------------------------------
// CSV ingestion

struct DataPaths {
  std::filesystem::path pois, checkins, prices, taxi, bus;

  static DataPaths in_directory(const std::filesystem::path& dir) {
    return {dir / "pois.csv", dir / "checkins.csv", dir / "prices.csv", dir / "taxi.csv", dir / "bus.csv"};
  }
};

struct FileReport {
  std::string path;
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;  // outside the grid
};

struct LoadReport {
  FileReport pois, checkins, prices, taxi, bus;
  int months = 0;
  int days = 0;
};

struct LoadOptions {
  int categories = static_cast<int>(kDefaultCategories);
  std::optional<int> days;  // overrides the check-in day span
};

namespace detail {

inline const std::vector<std::string> kPoiHeader = {"lat", "lon", "category"};
inline const std::vector<std::string> kCheckinHeader = {"lat", "lon", "timestamp"};
inline const std::vector<std::string> kPriceHeader = {"area_id", "month_index", "price"};
inline const std::vector<std::string> kTaxiHeader = {"pickup_lat", "pickup_lon", "dropoff_lat", "dropoff_lon",
                                                     "speed_kmh",  "distance_m", "hour"};
inline const std::vector<std::string> kBusHeader = {"board_lat",  "board_lon",    "alight_lat",
                                                    "alight_lon", "card_balance", "stop_flag"};

inline bool inside(const GridSpec& g, double lat, double lon) { return cell_of(g, lat, lon).has_value(); }

}  // namespace detail

/// Parses the five CSV sources. Records with any coordinate outside the grid
/// are dropped and counted; malformed rows raise DataError with
/// file:line:column.
inline CityDataset load_dataset(const DataPaths& paths, const GridSpec& grid, const LoadOptions& options = {},
                                LoadReport* report = nullptr) {
  grid.validate();
  if (options.categories < 1) throw ConfigError("categories must be >= 1");
  CityDataset ds;
  ds.grid = grid;
  ds.categories = options.categories;
  LoadReport rep;

  {
    csv::Reader r(paths.pois.string(), detail::kPoiHeader);
    rep.pois.path = paths.pois.string();
    while (r.next()) {
      ++rep.pois.rows;
      PoiRecord p{r.real(0), r.real(1), 0};
      const auto cat = r.integer(2);
      if (cat < 0 || cat >= options.categories) {
        throw DataError(r.location(3) + ": unknown category code " + std::to_string(cat) + " (expected 0.." +
                        std::to_string(options.categories - 1) + ")");
      }
      p.category = static_cast<int>(cat);
      if (!detail::inside(grid, p.lat, p.lon)) {
        ++rep.pois.dropped;
        continue;
      }
      ds.pois.push_back(p);
    }
    rep.pois.kept = ds.pois.size();
  }
  {
    csv::Reader r(paths.checkins.string(), detail::kCheckinHeader);
    rep.checkins.path = paths.checkins.string();
    while (r.next()) {
      ++rep.checkins.rows;
      CheckinRecord c{r.real(0), r.real(1), r.integer(2)};
      if (!detail::inside(grid, c.lat, c.lon)) {
        ++rep.checkins.dropped;
        continue;
      }
      ds.checkins.push_back(c);
    }
    rep.checkins.kept = ds.checkins.size();
  }
  {
    csv::Reader r(paths.prices.string(), detail::kPriceHeader);
    rep.prices.path = paths.prices.string();
    std::set<std::pair<AreaId, int>> seen;
    int max_month = -1;
    while (r.next()) {
      ++rep.prices.rows;
      const auto id = r.integer(0);
      const auto month = r.integer(1);
      const double price = r.real(2);
      if (month < 0) throw DataError(r.location(2) + ": negative month_index");
      if (!(price > 0.0)) throw DataError(r.location(3) + ": price must be > 0");
      if (id < 0 || id >= grid.area_count()) {
        ++rep.prices.dropped;
        continue;
      }
      if (!seen.emplace(static_cast<AreaId>(id), static_cast<int>(month)).second) {
        throw DataError(r.location(1) + ": duplicate (area_id, month_index) = (" + std::to_string(id) + ", " +
                        std::to_string(month) + ")");
      }
      max_month = std::max(max_month, static_cast<int>(month));
      ds.prices.push_back({static_cast<AreaId>(id), static_cast<int>(month), price});
    }
    rep.prices.kept = ds.prices.size();
    ds.months = max_month + 1;
    if (ds.months < 2) {
      throw DataError(paths.prices.string() + ": need at least 2 months of prices, found " +
                      std::to_string(ds.months));
    }
  }
  {
    csv::Reader r(paths.taxi.string(), detail::kTaxiHeader);
    rep.taxi.path = paths.taxi.string();
    while (r.next()) {
      ++rep.taxi.rows;
      TripRecord t{r.real(0), r.real(1), r.real(2), r.real(3), r.real(4), r.real(5), 0};
      const auto hour = r.integer(6);
      if (hour < 0 || hour > 23) throw DataError(r.location(7) + ": hour must be in 0..23");
      if (t.speed < 0.0) throw DataError(r.location(5) + ": speed must be >= 0");
      if (t.distance < 0.0) throw DataError(r.location(6) + ": distance must be >= 0");
      t.hour = static_cast<int>(hour);
      if (!detail::inside(grid, t.pickup_lat, t.pickup_lon) || !detail::inside(grid, t.dropoff_lat, t.dropoff_lon)) {
        ++rep.taxi.dropped;
        continue;
      }
      ds.taxi_trips.push_back(t);
    }
    rep.taxi.kept = ds.taxi_trips.size();
  }
  {
    csv::Reader r(paths.bus.string(), detail::kBusHeader);
    rep.bus.path = paths.bus.string();
    while (r.next()) {
      ++rep.bus.rows;
      BusRecord b{r.real(0), r.real(1), r.real(2), r.real(3), r.real(4), r.flag(5)};
      if (b.card_balance < 0.0) throw DataError(r.location(5) + ": card_balance must be >= 0");
      if (!detail::inside(grid, b.board_lat, b.board_lon) || !detail::inside(grid, b.alight_lat, b.alight_lon)) {
        ++rep.bus.dropped;
        continue;
      }
      ds.bus_events.push_back(b);
    }
    rep.bus.kept = ds.bus_events.size();
  }

  ds.days = options.days.value_or(day_span(ds.checkins));
  if (ds.days < 1) throw ConfigError("days must be >= 1");
  rep.months = ds.months;
  rep.days = ds.days;
  if (report) *report = rep;
  return ds;
}

/// Writes the dataset as the five CSV files (same schemas as the loader).
inline void write_dataset(const CityDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto paths = DataPaths::in_directory(dir);
  using csv::format;
  auto open = [](const std::filesystem::path& p, const std::vector<std::string>& header) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write " + p.string());
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    return out;
  };
  {
    auto out = open(paths.pois, detail::kPoiHeader);
    for (const auto& p : ds.pois) out << format(p.lat) << ',' << format(p.lon) << ',' << p.category << '\n';
  }
  {
    auto out = open(paths.checkins, detail::kCheckinHeader);
    for (const auto& c : ds.checkins) out << format(c.lat) << ',' << format(c.lon) << ',' << c.timestamp << '\n';
  }
  {
    auto out = open(paths.prices, detail::kPriceHeader);
    for (const auto& p : ds.prices) out << p.area_id << ',' << p.month_index << ',' << format(p.price) << '\n';
  }
  {
    auto out = open(paths.taxi, detail::kTaxiHeader);
    for (const auto& t : ds.taxi_trips) {
      out << format(t.pickup_lat) << ',' << format(t.pickup_lon) << ',' << format(t.dropoff_lat) << ','
          << format(t.dropoff_lon) << ',' << format(t.speed) << ',' << format(t.distance) << ',' << t.hour << '\n';
    }
  }
  {
    auto out = open(paths.bus, detail::kBusHeader);
    for (const auto& b : ds.bus_events) {
      out << format(b.board_lat) << ',' << format(b.board_lon) << ',' << format(b.alight_lat) << ','
          << format(b.alight_lon) << ',' << format(b.card_balance) << ',' << (b.stop_flag ? 1 : 0) << '\n';
    }
  }
}

}  // namespace urbanplan
