#pragma once

#include "semplace/classify.hpp"
#include "semplace/density.hpp"
#include "semplace/eval.hpp"
#include "semplace/ingest.hpp"
#include "semplace/labels.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace semplace {

/// The evaluated method ladder: random, dominant class, KDE with a
/// cross-validated fixed bandwidth, balloon KDE, balloon KDE gated by DBSCAN
/// regions.
enum class MethodKind
{
  random,
  dominant,
  kde_fixed,
  kde_adaptive,
  kde_adaptive_dbscan
};

inline std::string_view method_name(MethodKind m) noexcept
{
  switch (m) {
    case MethodKind::random: return "random";
    case MethodKind::dominant: return "dominant";
    case MethodKind::kde_fixed: return "kde-f";
    case MethodKind::kde_adaptive: return "kde-a";
    case MethodKind::kde_adaptive_dbscan: return "kde-a-dbscan";
  }
  return "random";
}

inline MethodKind parse_method(std::string_view name)
{
  for (auto m : { MethodKind::random, MethodKind::dominant, MethodKind::kde_fixed,
                  MethodKind::kde_adaptive, MethodKind::kde_adaptive_dbscan }) {
    if (method_name(m) == name) {
      return m;
    }
  }
  throw ValidationError("unknown method: " + std::string(name));
}

struct MethodConfig
{
  MethodKind kind = MethodKind::kde_adaptive;
  Kernel kernel = Kernel::gaussian;
  BalloonBandwidth balloon{};
  DbscanParams dbscan{};
  bool use_priors = false;
  BalloonScope balloon_scope = BalloonScope::per_class;
  std::vector<double> bandwidth_grid = default_bandwidth_grid();
  std::uint64_t seed = 42;
  EarthRadius radius{};

  std::vector<std::pair<std::string, std::string>> echo() const
  {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("seed", std::to_string(seed));
    if (kind == MethodKind::random || kind == MethodKind::dominant) {
      return out;
    }
    out.emplace_back("kernel", std::string(kernel_name(kernel)));
    if (kind == MethodKind::kde_fixed) {
      std::string grid;
      for (std::size_t i = 0; i < bandwidth_grid.size(); ++i) {
        grid += (i ? "," : "") + csv::format_double(bandwidth_grid[i]);
      }
      out.emplace_back("bandwidth_grid_km", grid);
    } else {
      out.emplace_back("k", std::to_string(balloon.k));
      out.emplace_back("floor_km", csv::format_double(balloon.floor_km));
      out.emplace_back("balloon_scope",
                       balloon_scope == BalloonScope::pooled ? "pooled" : "per-class");
    }
    if (kind == MethodKind::kde_adaptive_dbscan) {
      out.emplace_back("eps_km", csv::format_double(dbscan.eps_km));
      out.emplace_back("min_pts", std::to_string(dbscan.min_pts));
    }
    out.emplace_back("use_priors", use_priors ? "on" : "off");
    return out;
  }
};

/// Classifier configuration for one training split of a KDE method. The fixed
/// bandwidth is selected by leave-one-out likelihood on the pooled training
/// locations.
inline ClassifierConfig classifier_config_for(const MethodConfig& mc,
                                              std::span<const LabeledPlace> training)
{
  ClassifierConfig cc;
  cc.kernel = mc.kernel;
  cc.use_priors = mc.use_priors;
  cc.balloon_scope = mc.balloon_scope;
  cc.radius = mc.radius;
  switch (mc.kind) {
    case MethodKind::kde_fixed: {
      std::vector<GeoPoint> pts;
      for (const auto& p : training) {
        pts.push_back(p.location);
      }
      cc.bandwidth = FixedBandwidth{ select_bandwidth_cv(pts, mc.bandwidth_grid, mc.kernel,
                                                         mc.radius) };
      break;
    }
    case MethodKind::kde_adaptive:
      cc.bandwidth = mc.balloon;
      break;
    case MethodKind::kde_adaptive_dbscan:
      cc.bandwidth = mc.balloon;
      cc.gating = mc.dbscan;
      break;
    default:
      throw InputError("classifier_config_for: not a KDE method");
  }
  return cc;
}

inline MethodFactory make_method(const MethodConfig& mc)
{
  return [mc](std::span<const LabeledPlace> training, std::size_t fold) -> Predictor {
    switch (mc.kind) {
      case MethodKind::random: {
        std::vector<SemanticLabel> labels;
        LabelMask seen{};
        for (const auto& p : training) {
          seen[index_of(p.label)] = true;
        }
        for (std::size_t i = 0; i < kLabelCount; ++i) {
          if (seen[i]) {
            labels.push_back(label_at(i));
          }
        }
        auto rb = std::make_shared<RandomBaseline>(std::move(labels), mc.seed + fold);
        return [rb](const LabeledPlace&) { return rb->predict(); };
      }
      case MethodKind::dominant: {
        std::vector<SemanticLabel> labels;
        for (const auto& p : training) {
          labels.push_back(p.label);
        }
        DominantBaseline db(labels);
        return [db](const LabeledPlace&) { return db.predict(); };
      }
      default: {
        auto model = std::make_shared<const ClassifierModel>(
          ClassifierModel::fit(training, classifier_config_for(mc, training)));
        return [model](const LabeledPlace& p) { return model->predict(p.location); };
      }
    }
  };
}

/// KDE method whose scores are fused with an external classifier's per-place
/// scores. Places without external scores fall back to uniform external scores.
inline MethodFactory make_fused_method(const MethodConfig& mc,
                                       std::shared_ptr<const ExternalScores> external,
                                       double lambda)
{
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw DomainError("fusion lambda must lie in [0, 1]");
  }
  return [mc, external, lambda](std::span<const LabeledPlace> training,
                                std::size_t) -> Predictor {
    auto model = std::make_shared<const ClassifierModel>(
      ClassifierModel::fit(training, classifier_config_for(mc, training)));
    return [model, external, lambda](const LabeledPlace& p) {
      std::array<double, kLabelCount> ext{};
      if (auto it = external->find(p.place_id); it != external->end()) {
        ext = it->second;
      }
      const auto fused = fuse_scores(model->class_scores(p.location), ext, lambda);
      return argmax_label(fused.values, model->present());
    };
  };
}

} // namespace semplace
