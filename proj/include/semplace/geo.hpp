#pragma once

#include "semplace/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace semplace {

/// Latitude/longitude pair in decimal degrees. Always valid once constructed.
class GeoPoint
{
public:
  GeoPoint(double lat, double lon)
    : lat_(lat)
    , lon_(lon)
  {
    if (!(lat >= -90.0 && lat <= 90.0)) {
      throw ValidationError("latitude out of range [-90, 90]: " +
                            std::to_string(lat));
    }
    if (!(lon >= -180.0 && lon <= 180.0)) {
      throw ValidationError("longitude out of range [-180, 180]: " +
                            std::to_string(lon));
    }
  }

  double lat() const noexcept { return lat_; }
  double lon() const noexcept { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

private:
  double lat_;
  double lon_;
};

/// Sphere radius in kilometers.
class EarthRadius
{
public:
  static constexpr double kDefaultKm = 6372.8;

  constexpr EarthRadius() = default;
  explicit EarthRadius(double km)
    : km_(km)
  {
    if (!(km > 0.0) || !std::isfinite(km)) {
      throw ValidationError("earth radius must be positive and finite");
    }
  }

  constexpr double km() const noexcept { return km_; }

  friend bool operator==(const EarthRadius&, const EarthRadius&) = default;

private:
  double km_ = kDefaultKm;
};

inline constexpr double deg_to_rad(double deg) noexcept
{
  return deg * (std::numbers::pi / 180.0);
}

inline constexpr double rad_to_deg(double rad) noexcept
{
  return rad * (180.0 / std::numbers::pi);
}

/// Great-circle distance by the haversine formula. Symmetric bit-for-bit in
/// its arguments.
inline double haversine_km(const GeoPoint& a,
                           const GeoPoint& b,
                           EarthRadius r = {}) noexcept
{
  const double phi_a = deg_to_rad(a.lat());
  const double phi_b = deg_to_rad(b.lat());
  const double half_dphi = 0.5 * deg_to_rad(std::fabs(b.lat() - a.lat()));
  const double half_dlambda = 0.5 * deg_to_rad(std::fabs(b.lon() - a.lon()));

  const double s_phi = std::sin(half_dphi);
  const double s_lambda = std::sin(half_dlambda);
  const double cos_prod = std::cos(phi_a) * std::cos(phi_b);
  double h = s_phi * s_phi + cos_prod * s_lambda * s_lambda;
  // floating-point drift near antipodes can push h just past 1
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * r.km() * std::asin(std::sqrt(h));
}

/// Dense symmetric n x n matrix of distances.
class DistanceMatrix
{
public:
  explicit DistanceMatrix(std::size_t n)
    : n_(n)
    , data_(n * n, 0.0)
  {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }

private:
  std::size_t n_;
  std::vector<double> data_;
};

inline DistanceMatrix pairwise_distances_km(std::span<const GeoPoint> points,
                                            EarthRadius r = {})
{
  if (points.empty()) {
    throw EmptyInputError("pairwise_distances_km: no points");
  }
  DistanceMatrix m(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = haversine_km(points[i], points[j], r);
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return m;
}

} // namespace semplace
