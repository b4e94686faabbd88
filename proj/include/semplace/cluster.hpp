#pragma once

#include "semplace/errors.hpp"
#include "semplace/geo.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace semplace {

struct DbscanParams
{
  double eps_km = 0.5;
  std::size_t min_pts = 4;

  void validate() const
  {
    if (!(eps_km > 0.0) || !std::isfinite(eps_km)) {
      throw ValidationError("dbscan: eps_km must be positive");
    }
    if (min_pts < 1) {
      throw ValidationError("dbscan: min_pts must be >= 1");
    }
  }

  friend bool operator==(const DbscanParams&, const DbscanParams&) = default;
};

/// Result of a DBSCAN run. Cluster ids are 0..cluster_count-1 in order of
/// discovery; kNoise marks points that belong to no cluster.
struct ClusterAssignment
{
  static constexpr int kNoise = -1;

  std::vector<int> labels;
  std::vector<bool> core;
  std::vector<GeoPoint> points;
  int cluster_count = 0;
  EarthRadius radius{};

  std::size_t size() const noexcept { return labels.size(); }
  bool is_noise(std::size_t i) const { return labels[i] == kNoise; }

  std::vector<std::size_t> members(int cluster) const
  {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cluster) {
        out.push_back(i);
      }
    }
    return out;
  }
};

namespace detail {

inline std::vector<std::size_t> region_query(std::span<const GeoPoint> points,
                                             std::size_t center,
                                             double eps_km,
                                             EarthRadius r)
{
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (haversine_km(points[center], points[j], r) <= eps_km) {
      out.push_back(j);
    }
  }
  return out;
}

} // namespace detail

/// Density-based clustering. The outer loop visits points in input order and
/// each cluster is grown breadth-first through its core points; a border point
/// reachable from several clusters stays with the first one that claims it.
inline ClusterAssignment dbscan(std::span<const GeoPoint> points,
                                const DbscanParams& params,
                                EarthRadius r = {})
{
  if (points.empty()) {
    throw EmptyInputError("dbscan: no points");
  }
  params.validate();

  const std::size_t n = points.size();
  ClusterAssignment out;
  out.labels.assign(n, ClusterAssignment::kNoise);
  out.core.assign(n, false);
  out.points.assign(points.begin(), points.end());
  out.radius = r;

  std::vector<bool> visited(n, false);
  std::vector<bool> member(n, false);

  for (std::size_t v = 0; v < n; ++v) {
    if (visited[v]) {
      continue;
    }
    visited[v] = true;
    std::vector<std::size_t> seeds =
      detail::region_query(points, v, params.eps_km, r);
    if (seeds.size() < params.min_pts) {
      continue; // noise unless a later cluster reaches it
    }
    out.core[v] = true;
    const int c = out.cluster_count++;
    out.labels[v] = c;
    member[v] = true;

    std::vector<bool> queued(n, false);
    for (auto s : seeds) {
      queued[s] = true;
    }
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const std::size_t w = seeds[i];
      if (!visited[w]) {
        visited[w] = true;
        auto more = detail::region_query(points, w, params.eps_km, r);
        if (more.size() >= params.min_pts) {
          out.core[w] = true;
          for (auto m : more) {
            if (!queued[m]) {
              queued[m] = true;
              seeds.push_back(m);
            }
          }
        }
      }
      if (!member[w]) {
        member[w] = true;
        out.labels[w] = c;
      }
    }
  }
  return out;
}

/// Region a probe falls into: the cluster of the nearest core point within
/// eps_km, ties to the smaller cluster id. nullopt when no core point is close
/// enough.
inline std::optional<int> region_of(const ClusterAssignment& assignment,
                                    const GeoPoint& probe,
                                    const DbscanParams& params)
{
  std::optional<int> best;
  double best_d = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (!assignment.core[i]) {
      continue;
    }
    const double d = haversine_km(probe, assignment.points[i], assignment.radius);
    if (d > params.eps_km) {
      continue;
    }
    const int c = assignment.labels[i];
    if (!best || d < best_d || (d == best_d && c < *best)) {
      best = c;
      best_d = d;
    }
  }
  return best;
}

} // namespace semplace
