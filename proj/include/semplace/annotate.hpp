#pragma once

#include "semplace/classify.hpp"
#include "semplace/errors.hpp"
#include "semplace/geo.hpp"
#include "semplace/labels.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

namespace semplace {

struct BoundingBox
{
  double min_lat = 0.0;
  double max_lat = 0.0;
  double min_lon = 0.0;
  double max_lon = 0.0;

  void validate() const
  {
    // GeoPoint construction range-checks every corner
    static_cast<void>(GeoPoint(min_lat, min_lon));
    static_cast<void>(GeoPoint(max_lat, max_lon));
    if (!(min_lat < max_lat) || !(min_lon < max_lon)) {
      throw ValidationError("bounding box must have min < max on both axes");
    }
  }
};

struct GridCell
{
  std::size_t row = 0; // 0 is the southern edge
  std::size_t col = 0; // 0 is the western edge
  double south = 0.0, north = 0.0, west = 0.0, east = 0.0;
  GeoPoint center{ 0.0, 0.0 };
  SemanticLabel predicted = SemanticLabel::bar_restaurant;
  ClassScores scores;
};

struct AnnotatedGrid
{
  BoundingBox bbox;
  double cell_m = 0.0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<GridCell> cells; // row-major

  const GridCell& at(std::size_t row, std::size_t col) const { return cells[row * cols + col]; }
};

inline constexpr double kMaxGridCells = 1e7;

struct GridShape
{
  std::size_t rows = 0;
  std::size_t cols = 0;
};

/// rows = ceil(north-south extent / cell), cols = ceil(east-west extent at the
/// box's mid-latitude / cell). A relative slack of 1e-9 absorbs round-off when
/// the extent is an exact multiple of the cell size.
inline GridShape grid_shape(const BoundingBox& bbox, double cell_m, EarthRadius r = {})
{
  bbox.validate();
  if (!(cell_m > 0.0) || !std::isfinite(cell_m)) {
    throw ValidationError("cell size must be positive");
  }
  const double radius_m = r.km() * 1000.0;
  const double mid = deg_to_rad(0.5 * (bbox.min_lat + bbox.max_lat));
  const double ns_m = deg_to_rad(bbox.max_lat - bbox.min_lat) * radius_m;
  const double ew_m = deg_to_rad(bbox.max_lon - bbox.min_lon) * std::cos(mid) * radius_m;
  const double rows = std::max(1.0, std::ceil(ns_m / cell_m * (1.0 - 1e-9)));
  const double cols = std::max(1.0, std::ceil(ew_m / cell_m * (1.0 - 1e-9)));
  if (rows * cols > kMaxGridCells) {
    throw BudgetError("grid would have " + std::to_string(rows * cols) +
                      " cells (limit 1e7); use a larger cell size");
  }
  return { static_cast<std::size_t>(rows), static_cast<std::size_t>(cols) };
}

/// Rasterizes the model's predictions over a regular lat/lon grid probed at
/// cell centers. Output does not depend on the thread count.
inline AnnotatedGrid annotate_grid(const ClassifierModel& model,
                                   const BoundingBox& bbox,
                                   double cell_m,
                                   std::size_t threads = 1)
{
  const auto shape = grid_shape(bbox, cell_m, model.config().radius);
  AnnotatedGrid grid;
  grid.bbox = bbox;
  grid.cell_m = cell_m;
  grid.rows = shape.rows;
  grid.cols = shape.cols;
  grid.cells.resize(shape.rows * shape.cols);

  const double dlat = (bbox.max_lat - bbox.min_lat) / static_cast<double>(shape.rows);
  const double dlon = (bbox.max_lon - bbox.min_lon) / static_cast<double>(shape.cols);

  auto fill = [&](std::size_t idx) {
    const std::size_t row = idx / shape.cols;
    const std::size_t col = idx % shape.cols;
    GridCell& c = grid.cells[idx];
    c.row = row;
    c.col = col;
    c.south = bbox.min_lat + static_cast<double>(row) * dlat;
    c.north = row + 1 == shape.rows ? bbox.max_lat
                                    : bbox.min_lat + static_cast<double>(row + 1) * dlat;
    c.west = bbox.min_lon + static_cast<double>(col) * dlon;
    c.east = col + 1 == shape.cols ? bbox.max_lon
                                   : bbox.min_lon + static_cast<double>(col + 1) * dlon;
    c.center = GeoPoint(0.5 * (c.south + c.north), 0.5 * (c.west + c.east));
    c.scores = model.class_scores(c.center);
    c.predicted = argmax_label(c.scores.values, model.present());
  };

  const std::size_t n = grid.cells.size();
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fill(i);
    }
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < n; i += threads) {
          fill(i);
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  return grid;
}

namespace detail {

inline std::string fixed6(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") {
    s.erase(0, 1);
  }
  return s;
}

inline std::string sig9(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string sig17(double v)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// GeoJSON FeatureCollection with one counter-clockwise Polygon per cell.
/// Coordinates are printed with 6 decimals and scores with 9 significant
/// digits, so the text is reproducible byte for byte. center_lat/center_lon
/// keep the exact probe point (17 significant digits).
inline std::string format_geojson(const AnnotatedGrid& grid)
{
  std::string out = "{\"type\":\"FeatureCollection\",\"features\":[";
  for (std::size_t i = 0; i < grid.cells.size(); ++i) {
    const auto& c = grid.cells[i];
    const auto w = detail::fixed6(c.west), e = detail::fixed6(c.east);
    const auto s = detail::fixed6(c.south), n = detail::fixed6(c.north);
    out += i ? ",\n" : "\n";
    out += "{\"type\":\"Feature\",\"geometry\":{\"type\":\"Polygon\",\"coordinates\":[[";
    out += "[" + w + "," + s + "],[" + e + "," + s + "],[" + e + "," + n + "],[" + w + "," +
           n + "],[" + w + "," + s + "]";
    out += "]]},\"properties\":{\"row\":" + std::to_string(c.row) +
           ",\"col\":" + std::to_string(c.col) +
           ",\"center_lat\":" + detail::sig17(c.center.lat()) +
           ",\"center_lon\":" + detail::sig17(c.center.lon()) + ",\"label\":\"" +
           std::string(label_name(c.predicted)) + "\"";
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      out += ",\"score_" + std::string(kLabelNames[j]) + "\":" + detail::sig9(c.scores.values[j]);
    }
    out += "}}";
  }
  out += "\n]}\n";
  return out;
}

inline void emit_geojson(const AnnotatedGrid& grid, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << format_geojson(grid);
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

} // namespace semplace
