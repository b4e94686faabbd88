#pragma once

#include "semplace/csv.hpp"
#include "semplace/errors.hpp"
#include "semplace/geo.hpp"
#include "semplace/labels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace semplace {

struct VisitRecord
{
  std::string place_id;
  std::string visit_id;
  std::int64_t start_ts = 0;
  std::int64_t end_ts = 0;
};

struct WifiObservation
{
  std::string ap_id;
  GeoPoint location;
  std::int64_t ts = 0;
};

struct GpsSample
{
  GeoPoint location;
  std::int64_t ts = 0;
};

enum class LocationSource
{
  wifi,
  gps,
  none
};

inline std::string_view source_name(LocationSource s) noexcept
{
  switch (s) {
    case LocationSource::wifi: return "WIFI";
    case LocationSource::gps: return "GPS";
    case LocationSource::none: return "NONE";
  }
  return "NONE";
}

struct LocationInferenceResult
{
  std::string place_id;
  std::optional<GeoPoint> location;
  LocationSource source = LocationSource::none;
  std::size_t sample_count = 0;
};

enum class CentroidMode
{
  arithmetic, // plain mean of degrees; wrong across the antimeridian
  spherical   // normalized mean of unit vectors
};

struct InferenceOptions
{
  CentroidMode centroid = CentroidMode::arithmetic;
  /// Count each access point once (at its mean in-window position).
  bool dedupe_access_points = false;
};

inline GeoPoint centroid(std::span<const GeoPoint> pts, CentroidMode mode)
{
  if (pts.empty()) {
    throw EmptyInputError("centroid: no points");
  }
  if (mode == CentroidMode::arithmetic) {
    // offsets from the first point, so n identical points give that point back exactly
    const GeoPoint& base = pts.front();
    double dlat = 0.0;
    double dlon = 0.0;
    for (const auto& p : pts) {
      dlat += p.lat() - base.lat();
      dlon += p.lon() - base.lon();
    }
    const double n = static_cast<double>(pts.size());
    return { std::clamp(base.lat() + dlat / n, -90.0, 90.0),
             std::clamp(base.lon() + dlon / n, -180.0, 180.0) };
  }
  double x = 0.0, y = 0.0, z = 0.0;
  for (const auto& p : pts) {
    const double phi = deg_to_rad(p.lat());
    const double lam = deg_to_rad(p.lon());
    x += std::cos(phi) * std::cos(lam);
    y += std::cos(phi) * std::sin(lam);
    z += std::sin(phi);
  }
  const double hyp = std::hypot(x, y);
  if (hyp == 0.0 && z == 0.0) {
    throw DomainError("spherical centroid undefined for balanced antipodal points");
  }
  return { std::clamp(rad_to_deg(std::atan2(z, hyp)), -90.0, 90.0),
           std::clamp(rad_to_deg(std::atan2(y, x)), -180.0, 180.0) };
}

namespace detail {

template<class T>
std::vector<std::size_t> in_window(std::span<const T> obs, std::span<const VisitRecord> visits)
{
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    for (const auto& v : visits) {
      if (obs[i].ts >= v.start_ts && obs[i].ts <= v.end_ts) {
        hits.push_back(i);
        break;
      }
    }
  }
  return hits;
}

} // namespace detail

/// Location of one place from the observations recorded during its visits.
/// In-window WiFi sightings win; GPS is used only when there are none; with
/// neither the place is unresolved.
inline LocationInferenceResult infer_place_location(const std::string& place_id,
                                                    std::span<const VisitRecord> visits,
                                                    std::span<const WifiObservation> wifi,
                                                    std::span<const GpsSample> gps,
                                                    const InferenceOptions& opts = {})
{
  for (const auto& v : visits) {
    if (v.place_id != place_id) {
      throw InputError("infer_place_location: visit '" + v.visit_id +
                       "' belongs to place '" + v.place_id + "', not '" + place_id + "'");
    }
    if (v.start_ts > v.end_ts) {
      throw ValidationError("visit '" + v.visit_id + "' ends before it starts");
    }
  }

  LocationInferenceResult out;
  out.place_id = place_id;

  const auto wifi_hits = detail::in_window(wifi, visits);
  if (!wifi_hits.empty()) {
    std::vector<GeoPoint> pts;
    if (opts.dedupe_access_points) {
      std::map<std::string, std::vector<GeoPoint>> by_ap;
      std::vector<std::string> order;
      for (auto i : wifi_hits) {
        auto [it, fresh] = by_ap.try_emplace(wifi[i].ap_id);
        if (fresh) {
          order.push_back(wifi[i].ap_id);
        }
        it->second.push_back(wifi[i].location);
      }
      for (const auto& ap : order) {
        pts.push_back(centroid(by_ap[ap], opts.centroid));
      }
    } else {
      for (auto i : wifi_hits) {
        pts.push_back(wifi[i].location);
      }
    }
    out.location = centroid(pts, opts.centroid);
    out.source = LocationSource::wifi;
    out.sample_count = pts.size();
    return out;
  }

  const auto gps_hits = detail::in_window(gps, visits);
  if (!gps_hits.empty()) {
    std::vector<GeoPoint> pts;
    for (auto i : gps_hits) {
      pts.push_back(gps[i].location);
    }
    out.location = centroid(pts, opts.centroid);
    out.source = LocationSource::gps;
    out.sample_count = pts.size();
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats

namespace detail {

inline GeoPoint point_at(double lat, double lon, std::size_t line)
{
  try {
    return GeoPoint(lat, lon);
  } catch (const ValidationError& e) {
    throw LineValidationError(line, e.what());
  }
}

inline SemanticLabel label_at_line(const std::string& s, std::size_t line)
{
  try {
    return parse_label(s);
  } catch (const ValidationError& e) {
    throw LineValidationError(line, e.what());
  }
}

} // namespace detail

/// places.csv: place_id,label,lat,lon
inline std::vector<LabeledPlace> load_places(const std::string& path)
{
  const auto rows = csv::read(path, { "place_id", "label", "lat", "lon" });
  std::vector<LabeledPlace> out;
  out.reserve(rows.size());
  std::unordered_set<std::string> seen;
  for (const auto& r : rows) {
    const auto& f = r.fields;
    if (f[0].empty()) {
      throw ParseError(r.line, "empty place_id");
    }
    if (!seen.insert(f[0]).second) {
      throw LineValidationError(r.line, "duplicate place_id '" + f[0] + "'");
    }
    const auto label = detail::label_at_line(f[1], r.line);
    const double lat = csv::parse_double(f[2], r.line, "lat");
    const double lon = csv::parse_double(f[3], r.line, "lon");
    out.push_back({ f[0], detail::point_at(lat, lon, r.line), label });
  }
  return out;
}

inline void write_places(const std::string& path, std::span<const LabeledPlace> places)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << "place_id,label,lat,lon\n";
  for (const auto& p : places) {
    out << csv::quote_if_needed(p.place_id) << ',' << label_name(p.label) << ','
        << csv::format_double(p.location.lat()) << ','
        << csv::format_double(p.location.lon()) << '\n';
  }
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

/// visits.csv: place_id,visit_id,start_ts,end_ts
inline std::vector<VisitRecord> load_visits(const std::string& path)
{
  const auto rows = csv::read(path, { "place_id", "visit_id", "start_ts", "end_ts" });
  std::vector<VisitRecord> out;
  for (const auto& r : rows) {
    VisitRecord v{ r.fields[0], r.fields[1],
                   csv::parse_int(r.fields[2], r.line, "start_ts"),
                   csv::parse_int(r.fields[3], r.line, "end_ts") };
    if (v.start_ts > v.end_ts) {
      throw LineValidationError(r.line, "start_ts after end_ts");
    }
    out.push_back(std::move(v));
  }
  return out;
}

/// wifi.csv: ap_id,lat,lon,ts
inline std::vector<WifiObservation> load_wifi(const std::string& path)
{
  const auto rows = csv::read(path, { "ap_id", "lat", "lon", "ts" });
  std::vector<WifiObservation> out;
  for (const auto& r : rows) {
    const double lat = csv::parse_double(r.fields[1], r.line, "lat");
    const double lon = csv::parse_double(r.fields[2], r.line, "lon");
    out.push_back({ r.fields[0], detail::point_at(lat, lon, r.line),
                    csv::parse_int(r.fields[3], r.line, "ts") });
  }
  return out;
}

/// gps.csv: lat,lon,ts
inline std::vector<GpsSample> load_gps(const std::string& path)
{
  const auto rows = csv::read(path, { "lat", "lon", "ts" });
  std::vector<GpsSample> out;
  for (const auto& r : rows) {
    const double lat = csv::parse_double(r.fields[0], r.line, "lat");
    const double lon = csv::parse_double(r.fields[1], r.line, "lon");
    out.push_back({ detail::point_at(lat, lon, r.line),
                    csv::parse_int(r.fields[2], r.line, "ts") });
  }
  return out;
}

struct PlaceLabel
{
  std::string place_id;
  SemanticLabel label;
};

/// labels.csv: place_id,label
inline std::vector<PlaceLabel> load_place_labels(const std::string& path)
{
  const auto rows = csv::read(path, { "place_id", "label" });
  std::vector<PlaceLabel> out;
  std::unordered_set<std::string> seen;
  for (const auto& r : rows) {
    if (!seen.insert(r.fields[0]).second) {
      throw LineValidationError(r.line, "duplicate place_id '" + r.fields[0] + "'");
    }
    out.push_back({ r.fields[0], detail::label_at_line(r.fields[1], r.line) });
  }
  return out;
}

using ExternalScores = std::unordered_map<std::string, std::array<double, kLabelCount>>;

/// External classifier scores: place_id followed by the ten label names (any
/// order), one row per place, non-negative decimals.
inline ExternalScores load_external_scores(const std::string& path)
{
  std::ifstream probe(path);
  if (!probe) {
    throw IoError("cannot open '" + path + "'");
  }
  std::string first;
  std::getline(probe, first);
  if (!first.empty() && first.back() == '\r') {
    first.pop_back();
  }
  auto header = csv::split(first, 1);
  if (header.size() != kLabelCount + 1 || header[0] != "place_id") {
    throw ParseError(1, "expected header 'place_id' followed by the 10 label names");
  }
  std::array<std::size_t, kLabelCount> column_label{};
  std::array<bool, kLabelCount> covered{};
  for (std::size_t c = 1; c < header.size(); ++c) {
    SemanticLabel l;
    try {
      l = parse_label(header[c]);
    } catch (const ValidationError& e) {
      throw ParseError(1, e.what());
    }
    if (covered[index_of(l)]) {
      throw ParseError(1, "duplicate label column " + header[c]);
    }
    covered[index_of(l)] = true;
    column_label[c - 1] = index_of(l);
  }

  ExternalScores out;
  for (const auto& r : csv::read(path, header)) {
    std::array<double, kLabelCount> s{};
    for (std::size_t c = 1; c < r.fields.size(); ++c) {
      const double v = csv::parse_double(r.fields[c], r.line, header[c]);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw LineValidationError(r.line, "score must be finite and non-negative");
      }
      s[column_label[c - 1]] = v;
    }
    if (!out.emplace(r.fields[0], s).second) {
      throw LineValidationError(r.line, "duplicate place_id '" + r.fields[0] + "'");
    }
  }
  return out;
}

struct InferenceSummary
{
  std::vector<LocationInferenceResult> results; // one per labeled place, label-file order
  std::vector<LabeledPlace> places;             // resolved places only
};

/// Runs location inference for every labeled place. Places with no visits or
/// no in-window observations are reported as unresolved and left out of
/// `places`.
inline InferenceSummary infer_locations(std::span<const PlaceLabel> labels,
                                        std::span<const VisitRecord> visits,
                                        std::span<const WifiObservation> wifi,
                                        std::span<const GpsSample> gps,
                                        const InferenceOptions& opts = {})
{
  std::unordered_map<std::string, std::vector<VisitRecord>> by_place;
  for (const auto& v : visits) {
    by_place[v.place_id].push_back(v);
  }
  InferenceSummary out;
  for (const auto& pl : labels) {
    auto it = by_place.find(pl.place_id);
    std::span<const VisitRecord> pv;
    if (it != by_place.end()) {
      pv = it->second;
    }
    auto res = infer_place_location(pl.place_id, pv, wifi, gps, opts);
    if (res.location) {
      out.places.push_back({ pl.place_id, *res.location, pl.label });
    }
    out.results.push_back(std::move(res));
  }
  return out;
}

} // namespace semplace
