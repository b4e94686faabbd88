#pragma once

#include "semplace/cluster.hpp"
#include "semplace/density.hpp"
#include "semplace/errors.hpp"
#include "semplace/geo.hpp"
#include "semplace/labels.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace semplace {

/// Per-label scores for one probe. `region` is empty when the scores came from
/// the global models.
struct ClassScores
{
  std::array<double, kLabelCount> values{};
  std::optional<int> region;

  double operator[](SemanticLabel l) const { return values[index_of(l)]; }
  double& operator[](SemanticLabel l) { return values[index_of(l)]; }
};

/// Arg max over the allowed labels; ties, including all-zero vectors, go to
/// the earliest label in the fixed order. At least one label must be allowed.
inline SemanticLabel argmax_label(const std::array<double, kLabelCount>& scores,
                                  const LabelMask& allowed)
{
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (!allowed[i]) {
      continue;
    }
    if (!best || scores[i] > scores[*best]) {
      best = i;
    }
  }
  if (!best) {
    throw InputError("argmax_label: no allowed labels");
  }
  return label_at(*best);
}

/// Whether a balloon bandwidth is measured against a class's own samples or
/// against all samples in scope.
enum class BalloonScope
{
  per_class,
  pooled
};

struct ClassifierConfig
{
  Kernel kernel = Kernel::gaussian;
  BandwidthSpec bandwidth = BalloonBandwidth{};
  std::optional<DbscanParams> gating;
  bool use_priors = false;
  BalloonScope balloon_scope = BalloonScope::per_class;
  EarthRadius radius{};

  void validate() const
  {
    semplace::validate(bandwidth);
    if (gating) {
      gating->validate();
    }
  }
};

using LabelModels = std::array<std::optional<DensityModel>, kLabelCount>;

/// Per-class density models over one set of samples, plus the pooled sample
/// set used for pooled balloon bandwidths.
struct ScopedModels
{
  LabelModels models;
  std::vector<GeoPoint> pooled;
};

struct RegionGate
{
  ClusterAssignment assignment;
  DbscanParams params;
  std::vector<ScopedModels> regions;
};

/// Kernel discriminant classifier over semantic labels. Immutable once fitted;
/// safe to query from several threads.
class ClassifierModel
{
public:
  static ClassifierModel fit(std::span<const LabeledPlace> training,
                             const ClassifierConfig& config)
  {
    if (training.empty()) {
      throw InsufficientDataError("fit: no training places");
    }
    config.validate();

    ClassifierModel m;
    m.config_ = config;

    std::array<std::size_t, kLabelCount> counts{};
    for (const auto& p : training) {
      ++counts[index_of(p.label)];
    }
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      m.present_[i] = counts[i] > 0;
      m.priors_[i] = static_cast<double>(counts[i]) / static_cast<double>(training.size());
    }

    std::vector<std::size_t> all(training.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
      all[i] = i;
    }
    m.global_ = build_scope(training, all, config);

    if (config.gating) {
      std::vector<GeoPoint> points;
      points.reserve(training.size());
      for (const auto& p : training) {
        points.push_back(p.location);
      }
      RegionGate gate{ dbscan(points, *config.gating, config.radius), *config.gating, {} };
      for (int c = 0; c < gate.assignment.cluster_count; ++c) {
        gate.regions.push_back(build_scope(training, gate.assignment.members(c), config));
      }
      m.gate_ = std::move(gate);
    }
    return m;
  }

  const ClassifierConfig& config() const noexcept { return config_; }
  const std::array<double, kLabelCount>& priors() const noexcept { return priors_; }
  const LabelMask& present() const noexcept { return present_; }
  const LabelModels& global_models() const noexcept { return global_.models; }
  const std::optional<RegionGate>& gate() const noexcept { return gate_; }

  ClassScores class_scores(const GeoPoint& probe) const
  {
    ClassScores out;
    const ScopedModels* scope = &global_;
    if (gate_) {
      if (auto region = region_of(gate_->assignment, probe, gate_->params)) {
        scope = &gate_->regions[static_cast<std::size_t>(*region)];
        out.region = region;
      }
    }

    std::optional<double> pooled_h;
    if (config_.balloon_scope == BalloonScope::pooled) {
      if (const auto* b = std::get_if<BalloonBandwidth>(&config_.bandwidth)) {
        pooled_h = std::max(knn_distance_km(scope->pooled, probe, b->k, config_.radius),
                            b->floor_km);
      }
    }

    for (std::size_t i = 0; i < kLabelCount; ++i) {
      const auto& model = scope->models[i];
      if (!model) {
        continue;
      }
      double s = pooled_h ? model->score_with_bandwidth(probe, *pooled_h)
                          : model->score(probe);
      if (config_.use_priors) {
        s *= priors_[i];
      }
      out.values[i] = s;
    }
    return out;
  }

  SemanticLabel predict(const GeoPoint& probe) const
  {
    return argmax_label(class_scores(probe).values, present_);
  }

private:
  ClassifierModel() = default;

  static ScopedModels build_scope(std::span<const LabeledPlace> training,
                                  std::span<const std::size_t> members,
                                  const ClassifierConfig& config)
  {
    ScopedModels scope;
    std::array<std::vector<GeoPoint>, kLabelCount> groups;
    for (auto idx : members) {
      const auto& p = training[idx];
      groups[index_of(p.label)].push_back(p.location);
      scope.pooled.push_back(p.location);
    }
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      if (!groups[i].empty()) {
        scope.models[i].emplace(std::move(groups[i]), config.kernel, config.bandwidth,
                                config.radius);
      }
    }
    return scope;
  }

  ClassifierConfig config_;
  std::array<double, kLabelCount> priors_{};
  LabelMask present_{};
  ScopedModels global_;
  std::optional<RegionGate> gate_;
};

inline ClassScores class_scores(const ClassifierModel& model, const GeoPoint& probe)
{
  return model.class_scores(probe);
}

inline SemanticLabel predict(const ClassifierModel& model, const GeoPoint& probe)
{
  return model.predict(probe);
}

inline constexpr double kFusionFloor = 1e-9;

/// Log-linear fusion of KDE scores with an external classifier's scores:
///   fused_j  ~  ext_j^(1 - lambda) * kde_j^lambda
/// after sum-normalizing both vectors and flooring each entry at 1e-9.
inline ClassScores fuse_scores(const ClassScores& kde,
                               const std::array<double, kLabelCount>& external,
                               double lambda)
{
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("fuse_scores: lambda must lie in [0, 1]");
  }
  auto normalize = [](const std::array<double, kLabelCount>& v) {
    double total = 0.0;
    for (double x : v) {
      if (!(x >= 0.0) || !std::isfinite(x)) {
        throw DomainError("fuse_scores: scores must be finite and non-negative");
      }
      total += x;
    }
    std::array<double, kLabelCount> out{};
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      const double p = total > 0.0 ? v[i] / total : 1.0 / static_cast<double>(kLabelCount);
      out[i] = std::max(p, kFusionFloor);
    }
    return out;
  };
  const auto e = normalize(external);
  const auto k = normalize(kde.values);

  ClassScores fused;
  fused.region = kde.region;
  double total = 0.0;
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    fused.values[i] = std::pow(e[i], 1.0 - lambda) * std::pow(k[i], lambda);
    total += fused.values[i];
  }
  for (auto& v : fused.values) {
    v /= total;
  }
  return fused;
}

/// Predicts uniformly at random from a fixed label set. Deterministic given
/// the seed.
class RandomBaseline
{
public:
  RandomBaseline(std::vector<SemanticLabel> labels, std::uint64_t seed)
    : labels_(std::move(labels))
    , rng_(seed)
  {
    if (labels_.empty()) {
      throw EmptyInputError("random baseline: empty label set");
    }
  }

  SemanticLabel predict()
  {
    std::uniform_int_distribution<std::size_t> pick(0, labels_.size() - 1);
    return labels_[pick(rng_)];
  }

  std::span<const SemanticLabel> labels() const noexcept { return labels_; }

private:
  std::vector<SemanticLabel> labels_;
  std::mt19937_64 rng_;
};

/// Always predicts the most frequent training label, ties by label order.
class DominantBaseline
{
public:
  explicit DominantBaseline(std::span<const SemanticLabel> training)
  {
    if (training.empty()) {
      throw EmptyInputError("dominant baseline: no training labels");
    }
    std::array<double, kLabelCount> counts{};
    for (auto l : training) {
      counts[index_of(l)] += 1.0;
    }
    LabelMask all;
    all.fill(true);
    label_ = argmax_label(counts, all);
  }

  SemanticLabel predict() const noexcept { return label_; }

private:
  SemanticLabel label_ = SemanticLabel::bar_restaurant;
};

} // namespace semplace
