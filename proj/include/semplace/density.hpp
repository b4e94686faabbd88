#pragma once

#include "semplace/errors.hpp"
#include "semplace/geo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semplace {

enum class Kernel
{
  gaussian,
  uniform,
  triangular,
  biweight,
  triweight,
  epanechnikov,
  exponential
};

inline constexpr std::array<Kernel, 7> kAllKernels{
  Kernel::gaussian,   Kernel::uniform,      Kernel::triangular, Kernel::biweight,
  Kernel::triweight,  Kernel::epanechnikov, Kernel::exponential
};

inline std::string_view kernel_name(Kernel k) noexcept
{
  switch (k) {
    case Kernel::gaussian: return "gaussian";
    case Kernel::uniform: return "uniform";
    case Kernel::triangular: return "triangular";
    case Kernel::biweight: return "biweight";
    case Kernel::triweight: return "triweight";
    case Kernel::epanechnikov: return "epanechnikov";
    case Kernel::exponential: return "exponential";
  }
  return "gaussian";
}

inline Kernel parse_kernel(std::string_view name)
{
  for (auto k : kAllKernels) {
    if (kernel_name(k) == name) {
      return k;
    }
  }
  throw ValidationError("unknown kernel: " + std::string(name));
}

inline bool has_compact_support(Kernel k) noexcept
{
  return k != Kernel::gaussian && k != Kernel::exponential;
}

/// Univariate kernel profile K(u). Compact-support kernels vanish for |u| >= 1.
inline double kernel_eval(Kernel kernel, double u)
{
  if (!std::isfinite(u)) {
    throw DomainError("kernel_eval: non-finite argument");
  }
  const double a = std::fabs(u);
  if (has_compact_support(kernel) && a >= 1.0) {
    return 0.0;
  }
  const double t = 1.0 - u * u;
  switch (kernel) {
    case Kernel::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case Kernel::uniform: return 0.5;
    case Kernel::triangular: return 1.0 - a;
    case Kernel::biweight: return 15.0 / 16.0 * t * t;
    case Kernel::triweight: return 35.0 / 32.0 * t * t * t;
    case Kernel::epanechnikov: return 0.75 * t;
    case Kernel::exponential: return 0.5 * std::exp(-a);
  }
  return 0.0;
}

struct FixedBandwidth
{
  double h_km = 1.0;
  friend bool operator==(const FixedBandwidth&, const FixedBandwidth&) = default;
};

/// h(x) = distance from x to its k-th nearest sample, never below floor_km.
struct BalloonBandwidth
{
  std::size_t k = 15;
  double floor_km = 0.001;
  friend bool operator==(const BalloonBandwidth&, const BalloonBandwidth&) = default;
};

using BandwidthSpec = std::variant<FixedBandwidth, BalloonBandwidth>;

inline void validate(const BandwidthSpec& spec)
{
  if (const auto* f = std::get_if<FixedBandwidth>(&spec)) {
    if (!(f->h_km > 0.0) || !std::isfinite(f->h_km)) {
      throw ValidationError("fixed bandwidth must be positive");
    }
  } else {
    const auto& b = std::get<BalloonBandwidth>(spec);
    if (b.k < 1) {
      throw ValidationError("balloon k must be >= 1");
    }
    if (!(b.floor_km > 0.0) || !std::isfinite(b.floor_km)) {
      throw ValidationError("balloon floor must be positive");
    }
  }
}

/// k-th smallest distance from probe to the samples (the largest if k > n).
inline double knn_distance_km(std::span<const GeoPoint> samples,
                              const GeoPoint& probe,
                              std::size_t k,
                              EarthRadius r = {})
{
  if (samples.empty()) {
    throw EmptyInputError("knn_distance_km: no samples");
  }
  if (k < 1) {
    throw ValidationError("knn_distance_km: k must be >= 1");
  }
  std::vector<double> d;
  d.reserve(samples.size());
  for (const auto& s : samples) {
    d.push_back(haversine_km(probe, s, r));
  }
  const std::size_t idx = std::min(k, d.size()) - 1;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(idx), d.end());
  return d[idx];
}

/// Kernel density estimate over great-circle distances,
///   f(x) = 1/(n h) * sum_i K(d(x, x_i) / h),
/// with h fixed or chosen per probe (balloon). Immutable after construction.
class DensityModel
{
public:
  DensityModel(std::vector<GeoPoint> samples,
               Kernel kernel,
               BandwidthSpec bandwidth,
               EarthRadius radius = {})
    : samples_(std::move(samples))
    , kernel_(kernel)
    , bandwidth_(bandwidth)
    , radius_(radius)
  {
    if (samples_.empty()) {
      throw EmptyInputError("DensityModel: no samples");
    }
    validate(bandwidth_);
  }

  std::span<const GeoPoint> samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  Kernel kernel() const noexcept { return kernel_; }
  const BandwidthSpec& bandwidth() const noexcept { return bandwidth_; }
  EarthRadius radius() const noexcept { return radius_; }

  /// Bandwidth used at this probe.
  double bandwidth_at(const GeoPoint& probe) const
  {
    if (const auto* f = std::get_if<FixedBandwidth>(&bandwidth_)) {
      return f->h_km;
    }
    const auto& b = std::get<BalloonBandwidth>(bandwidth_);
    return std::max(knn_distance_km(samples_, probe, b.k, radius_), b.floor_km);
  }

  double score(const GeoPoint& probe) const
  {
    return score_with_bandwidth(probe, bandwidth_at(probe));
  }

  /// Evaluates the estimator with an externally chosen bandwidth.
  double score_with_bandwidth(const GeoPoint& probe, double h_km) const
  {
    if (!(h_km > 0.0)) {
      throw DomainError("bandwidth must be positive");
    }
    double sum = 0.0;
    for (const auto& s : samples_) {
      sum += kernel_eval(kernel_, haversine_km(probe, s, radius_) / h_km);
    }
    return sum / (static_cast<double>(samples_.size()) * h_km);
  }

private:
  std::vector<GeoPoint> samples_;
  Kernel kernel_;
  BandwidthSpec bandwidth_;
  EarthRadius radius_;
};

inline double kde_score(const DensityModel& model, const GeoPoint& probe)
{
  return model.score(probe);
}

/// Per-term log-likelihood charged when a held-out point gets zero density.
inline constexpr double kZeroLikelihoodPenalty = -1e12;

/// 16 log-spaced bandwidths from 10 m to 10 km.
inline std::vector<double> default_bandwidth_grid()
{
  std::vector<double> grid(16);
  const double lo = std::log(0.01);
  const double hi = std::log(10.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / 15.0);
  }
  grid.front() = 0.01;
  grid.back() = 10.0;
  return grid;
}

/// Leave-one-out log pseudo-likelihood of a fixed bandwidth.
inline double loo_log_likelihood(const DistanceMatrix& dist, Kernel kernel, double h_km)
{
  const std::size_t n = dist.size();
  const double norm = static_cast<double>(n - 1) * h_km;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) {
        sum += kernel_eval(kernel, dist(i, j) / h_km);
      }
    }
    const double f = sum / norm;
    total += f > 0.0 ? std::log(f) : kZeroLikelihoodPenalty;
  }
  return total;
}

/// Picks the fixed bandwidth with the highest leave-one-out log-likelihood.
/// Ties go to the smaller bandwidth.
inline double select_bandwidth_cv(std::span<const GeoPoint> samples,
                                  std::span<const double> candidates,
                                  Kernel kernel,
                                  EarthRadius r = {})
{
  if (samples.size() < 2) {
    throw InsufficientDataError("select_bandwidth_cv: need at least 2 samples");
  }
  if (candidates.empty()) {
    throw ValidationError("select_bandwidth_cv: no candidate bandwidths");
  }
  for (double h : candidates) {
    if (!(h > 0.0) || !std::isfinite(h)) {
      throw ValidationError("select_bandwidth_cv: candidates must be positive");
    }
  }
  const DistanceMatrix dist = pairwise_distances_km(samples, r);
  double best_h = 0.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double h : candidates) {
    const double ll = loo_log_likelihood(dist, kernel, h);
    if (first || ll > best_ll || (ll == best_ll && h < best_h)) {
      best_h = h;
      best_ll = ll;
      first = false;
    }
  }
  return best_h;
}

} // namespace semplace
