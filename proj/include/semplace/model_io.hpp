#pragma once

#include "semplace/classify.hpp"
#include "semplace/errors.hpp"
#include "semplace/labels.hpp"

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

namespace semplace {

/// A model file holds the classifier configuration and its training places;
/// loading refits, which is deterministic, so the loaded model is identical to
/// the one that was saved.
struct ModelFile
{
  ClassifierConfig config;
  std::vector<LabeledPlace> training;

  ClassifierModel fit() const { return ClassifierModel::fit(training, config); }
};

inline nlohmann::json to_json(const ModelFile& m)
{
  using nlohmann::json;
  json cfg;
  cfg["kernel"] = std::string(kernel_name(m.config.kernel));
  if (const auto* f = std::get_if<FixedBandwidth>(&m.config.bandwidth)) {
    cfg["bandwidth"] = { { "type", "fixed" }, { "h_km", f->h_km } };
  } else {
    const auto& b = std::get<BalloonBandwidth>(m.config.bandwidth);
    cfg["bandwidth"] = { { "type", "balloon" }, { "k", b.k }, { "floor_km", b.floor_km } };
  }
  if (m.config.gating) {
    cfg["gating"] = { { "eps_km", m.config.gating->eps_km },
                      { "min_pts", m.config.gating->min_pts } };
  } else {
    cfg["gating"] = nullptr;
  }
  cfg["use_priors"] = m.config.use_priors;
  cfg["balloon_scope"] = m.config.balloon_scope == BalloonScope::pooled ? "pooled" : "per-class";
  cfg["radius_km"] = m.config.radius.km();

  json places = json::array();
  for (const auto& p : m.training) {
    places.push_back({ { "id", p.place_id },
                       { "label", std::string(label_name(p.label)) },
                       { "lat", p.location.lat() },
                       { "lon", p.location.lon() } });
  }
  return { { "format", "semplace-model" }, { "version", 1 }, { "config", cfg },
           { "training", places } };
}

inline ModelFile model_from_json(const nlohmann::json& j)
{
  try {
    if (j.at("format") != "semplace-model" || j.at("version") != 1) {
      throw ValidationError("not a semplace model file (version 1)");
    }
    ModelFile m;
    const auto& cfg = j.at("config");
    m.config.kernel = parse_kernel(cfg.at("kernel").get<std::string>());
    const auto& bw = cfg.at("bandwidth");
    const auto type = bw.at("type").get<std::string>();
    if (type == "fixed") {
      m.config.bandwidth = FixedBandwidth{ bw.at("h_km").get<double>() };
    } else if (type == "balloon") {
      m.config.bandwidth =
        BalloonBandwidth{ bw.at("k").get<std::size_t>(), bw.at("floor_km").get<double>() };
    } else {
      throw ValidationError("unknown bandwidth type '" + type + "'");
    }
    if (!cfg.at("gating").is_null()) {
      m.config.gating = DbscanParams{ cfg["gating"].at("eps_km").get<double>(),
                                      cfg["gating"].at("min_pts").get<std::size_t>() };
    }
    m.config.use_priors = cfg.at("use_priors").get<bool>();
    const auto scope = cfg.at("balloon_scope").get<std::string>();
    if (scope != "pooled" && scope != "per-class") {
      throw ValidationError("unknown balloon_scope '" + scope + "'");
    }
    m.config.balloon_scope = scope == "pooled" ? BalloonScope::pooled : BalloonScope::per_class;
    m.config.radius = EarthRadius(cfg.at("radius_km").get<double>());
    for (const auto& p : j.at("training")) {
      m.training.push_back({ p.at("id").get<std::string>(),
                             GeoPoint(p.at("lat").get<double>(), p.at("lon").get<double>()),
                             parse_label(p.at("label").get<std::string>()) });
    }
    m.config.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed model file: ") + e.what());
  }
}

inline void save_model(const std::string& path, const ModelFile& m)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << to_json(m).dump(2) << '\n';
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

inline ModelFile load_model(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("model file '" + path + "' is not valid JSON: " + e.what());
  }
  return model_from_json(j);
}

} // namespace semplace
