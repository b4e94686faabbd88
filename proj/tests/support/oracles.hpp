#pragma once

// Test-only reference implementations. Each one recomputes a quantity by a
// route that does not go through the library code it is used to check.

#include "semplace/cluster.hpp"
#include "semplace/density.hpp"
#include "semplace/geo.hpp"
#include "semplace/labels.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <vector>

namespace oracle {

using semplace::GeoPoint;

// Great-circle distance from the atan2 (Vincenty special case) form of the
// spherical law of cosines, evaluated in 50-digit arithmetic.
inline double sphere_distance_km(const GeoPoint& a, const GeoPoint& b, double r_km = 6372.8)
{
  using big = boost::multiprecision::cpp_bin_float_50;
  const big pi = boost::math::constants::pi<big>();
  const big p1 = big(a.lat()) * pi / 180;
  const big p2 = big(b.lat()) * pi / 180;
  const big dl = (big(b.lon()) - big(a.lon())) * pi / 180;
  const big x = cos(p2) * sin(dl);
  const big y = cos(p1) * sin(p2) - sin(p1) * cos(p2) * cos(dl);
  const big num = sqrt(x * x + y * y);
  const big den = sin(p1) * sin(p2) + cos(p1) * cos(p2) * cos(dl);
  return static_cast<double>(big(r_km) * atan2(num, den));
}

// Textbook DBSCAN written out step by step: sets of visited/noise/membership and a
// Neighbors list that grows by union while it is being iterated.
struct NaiveDbscan
{
  std::vector<int> cluster; // -1 = none
  std::vector<bool> noise;
  std::vector<bool> core;
  int clusters = 0;
};

inline NaiveDbscan naive_dbscan(const std::vector<GeoPoint>& V, double eps, std::size_t eta)
{
  const std::size_t n = V.size();
  NaiveDbscan out;
  out.cluster.assign(n, -1);
  out.noise.assign(n, false);
  out.core.assign(n, false);
  std::vector<bool> visited(n, false);

  auto region_query = [&](std::size_t v) {
    std::vector<std::size_t> nb;
    for (std::size_t j = 0; j < n; ++j) {
      if (semplace::haversine_km(V[v], V[j]) <= eps) {
        nb.push_back(j);
      }
    }
    return nb;
  };

  int C = -1;
  for (std::size_t v = 0; v < n; ++v) {
    if (visited[v]) {
      continue;
    }
    visited[v] = true;
    auto neighbors = region_query(v);
    if (neighbors.size() < eta) {
      out.noise[v] = true;
    } else {
      out.core[v] = true;
      C = C + 1;
      // expandCluster
      out.cluster[v] = C;
      for (std::size_t i = 0; i < neighbors.size(); ++i) {
        const std::size_t vp = neighbors[i];
        if (!visited[vp]) {
          visited[vp] = true;
          auto nb2 = region_query(vp);
          if (nb2.size() >= eta) {
            out.core[vp] = true;
            for (auto x : nb2) {
              if (std::find(neighbors.begin(), neighbors.end(), x) == neighbors.end()) {
                neighbors.push_back(x);
              }
            }
          }
        }
        if (out.cluster[vp] == -1) {
          out.cluster[vp] = C;
        }
      }
    }
  }
  out.clusters = C + 1;
  return out;
}

// True when the two labelings induce the same partition (ids may differ;
// -1 must map to -1).
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b)
{
  if (a.size() != b.size()) {
    return false;
  }
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) {
      return false;
    }
    if (a[i] < 0) {
      continue;
    }
    auto [it1, f1] = ab.emplace(a[i], b[i]);
    auto [it2, f2] = ba.emplace(b[i], a[i]);
    if (it1->second != b[i] || it2->second != a[i]) {
      return false;
    }
  }
  return true;
}

// Textbook kernel profiles, written independently of semplace::kernel_eval.
inline double kernel(semplace::Kernel k, double u)
{
  using semplace::Kernel;
  const double a = std::abs(u);
  switch (k) {
    case Kernel::gaussian: return std::exp(-u * u / 2.0) / std::sqrt(2.0 * std::numbers::pi);
    case Kernel::uniform: return a < 1 ? 0.5 : 0.0;
    case Kernel::triangular: return a < 1 ? 1.0 - a : 0.0;
    case Kernel::biweight: return a < 1 ? (15.0 / 16.0) * std::pow(1 - u * u, 2) : 0.0;
    case Kernel::triweight: return a < 1 ? (35.0 / 32.0) * std::pow(1 - u * u, 3) : 0.0;
    case Kernel::epanechnikov: return a < 1 ? 0.75 * (1 - u * u) : 0.0;
    case Kernel::exponential: return 0.5 * std::exp(-a);
  }
  return 0.0;
}

inline double kth_distance(const std::vector<GeoPoint>& xs, const GeoPoint& x, std::size_t k)
{
  std::vector<double> d;
  for (const auto& s : xs) {
    d.push_back(semplace::haversine_km(x, s));
  }
  std::sort(d.begin(), d.end());
  return d[std::min(k, d.size()) - 1];
}

// Direct summation of (1/(n h)) sum K(d/h).
inline double kde_sum(const std::vector<GeoPoint>& xs, const GeoPoint& x, semplace::Kernel k,
                      double h)
{
  double s = 0.0;
  for (const auto& xi : xs) {
    s += kernel(k, semplace::haversine_km(x, xi) / h);
  }
  return s / (static_cast<double>(xs.size()) * h);
}

inline double kde_balloon_sum(const std::vector<GeoPoint>& xs, const GeoPoint& x,
                              semplace::Kernel k, std::size_t kth, double floor_km)
{
  return kde_sum(xs, x, k, std::max(kth_distance(xs, x, kth), floor_km));
}

// Brute-force kernel discriminant rule: recompute every class score by direct
// summation, optionally inside the DBSCAN region of the probe, and take the
// first maximal label among those seen in training.
struct KdaCase
{
  std::vector<semplace::LabeledPlace> training;
  semplace::Kernel kernel = semplace::Kernel::gaussian;
  bool balloon = false;
  double h = 1.0;
  std::size_t k = 15;
  double floor_km = 0.001;
  bool use_priors = false;
  std::optional<std::pair<double, std::size_t>> gating; // eps, min_pts
};

inline std::array<double, semplace::kLabelCount> kda_scores(const KdaCase& c, const GeoPoint& x)
{
  using namespace semplace;
  std::vector<std::size_t> scope;
  for (std::size_t i = 0; i < c.training.size(); ++i) {
    scope.push_back(i);
  }
  if (c.gating) {
    std::vector<GeoPoint> pts;
    for (const auto& p : c.training) {
      pts.push_back(p.location);
    }
    const auto db = naive_dbscan(pts, c.gating->first, c.gating->second);
    double best = 0.0;
    int region = -1;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (!db.core[i]) {
        continue;
      }
      const double d = haversine_km(x, pts[i]);
      if (d <= c.gating->first &&
          (region < 0 || d < best || (d == best && db.cluster[i] < region))) {
        region = db.cluster[i];
        best = d;
      }
    }
    if (region >= 0) {
      scope.clear();
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (db.cluster[i] == region) {
          scope.push_back(i);
        }
      }
    }
  }
  std::array<double, kLabelCount> scores{};
  std::array<double, kLabelCount> counts{};
  for (const auto& p : c.training) {
    counts[index_of(p.label)] += 1.0;
  }
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    std::vector<GeoPoint> xs;
    for (auto i : scope) {
      if (index_of(c.training[i].label) == l) {
        xs.push_back(c.training[i].location);
      }
    }
    if (xs.empty()) {
      continue;
    }
    double s = c.balloon ? kde_balloon_sum(xs, x, c.kernel, c.k, c.floor_km)
                         : kde_sum(xs, x, c.kernel, c.h);
    if (c.use_priors) {
      s *= counts[l] / static_cast<double>(c.training.size());
    }
    scores[l] = s;
  }
  return scores;
}

inline semplace::SemanticLabel kda_predict(const KdaCase& c, const GeoPoint& x)
{
  using namespace semplace;
  const auto s = kda_scores(c, x);
  std::array<bool, kLabelCount> seen{};
  for (const auto& p : c.training) {
    seen[index_of(p.label)] = true;
  }
  int best = -1;
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    if (seen[l] && (best < 0 || s[l] > s[static_cast<std::size_t>(best)])) {
      best = static_cast<int>(l);
    }
  }
  return label_at(static_cast<std::size_t>(best));
}

// Two-sided exact Wilcoxon p by enumerating all 2^n sign patterns of the
// given ranks.
inline double wilcoxon_enumerated_p(const std::vector<double>& ranks, double w)
{
  const std::size_t n = ranks.size();
  const std::uint64_t total = std::uint64_t{ 1 } << n;
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double plus = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::uint64_t{ 1 } << i)) {
        plus += ranks[i];
      }
    }
    if (plus <= w + 1e-9) {
      ++hits;
    }
  }
  return std::min(1.0, 2.0 * static_cast<double>(hits) / static_cast<double>(total));
}

// Standard normal CDF.
inline double phi(double z)
{
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

} // namespace oracle
