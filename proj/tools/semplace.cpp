// semplace: command-line front end for semantic place classification.
//
// Exit codes: 0 success, 1 validation/input error, 2 runtime error.

#include "semplace/annotate.hpp"
#include "semplace/csv.hpp"
#include "semplace/eval.hpp"
#include "semplace/ingest.hpp"
#include "semplace/methods.hpp"
#include "semplace/model_io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace semplace;

bool on_off(const std::string& v)
{
  return v == "on";
}

BoundingBox parse_bbox(const std::string& text)
{
  const auto parts = csv::split(text, 1);
  if (parts.size() != 4) {
    throw ValidationError("--bbox expects minLat,minLon,maxLat,maxLon");
  }
  std::vector<double> v;
  for (const auto& p : parts) {
    try {
      v.push_back(csv::parse_double(p, 1, "bbox"));
    } catch (const ParseError&) {
      throw ValidationError("--bbox: invalid number '" + p + "'");
    }
  }
  BoundingBox box{ v[0], v[2], v[1], v[3] };
  box.validate();
  return box;
}

struct KdeFlags
{
  std::string kernel = "gaussian";
  std::size_t k = 15;
  double floor_km = 0.001;
  double eps_km = 0.5;
  std::size_t min_pts = 4;
  std::string use_priors = "off";
  std::string balloon_scope = "per-class";

  void add_to(CLI::App* cmd)
  {
    cmd->add_option("--kernel", kernel, "Kernel profile")
      ->capture_default_str()
      ->check(CLI::IsMember({ "gaussian", "uniform", "triangular", "biweight", "triweight",
                              "epanechnikov", "exponential" }));
    cmd->add_option("--k", k, "Balloon neighbor rank")->capture_default_str();
    cmd->add_option("--floor-km", floor_km, "Minimum balloon bandwidth (km)")
      ->capture_default_str();
    cmd->add_option("--eps-km", eps_km, "DBSCAN neighborhood radius (km)")
      ->capture_default_str();
    cmd->add_option("--min-pts", min_pts, "DBSCAN minimum neighborhood size")
      ->capture_default_str();
    cmd->add_option("--use-priors", use_priors, "Weight scores by class priors")
      ->capture_default_str()
      ->check(CLI::IsMember({ "on", "off" }));
    cmd->add_option("--balloon-scope", balloon_scope,
                    "Balloon bandwidth from each class's samples or from all samples")
      ->capture_default_str()
      ->check(CLI::IsMember({ "per-class", "pooled" }));
  }

  MethodConfig method(MethodKind kind, std::uint64_t seed) const
  {
    MethodConfig mc;
    mc.kind = kind;
    mc.kernel = parse_kernel(kernel);
    mc.balloon = BalloonBandwidth{ k, floor_km };
    mc.dbscan = DbscanParams{ eps_km, min_pts };
    mc.use_priors = on_off(use_priors);
    mc.balloon_scope = balloon_scope == "pooled" ? BalloonScope::pooled : BalloonScope::per_class;
    mc.seed = seed;
    validate(mc.balloon);
    mc.dbscan.validate();
    return mc;
  }
};

void print_report_summary(const EvalReport& r, const std::string& path)
{
  std::cout << "method = " << r.method << '\n'
            << "overall_accuracy = " << csv::format_double(r.overall_accuracy) << '\n'
            << "mean_fold_accuracy = " << csv::format_double(r.mean_fold_accuracy) << '\n'
            << "report = " << path << '\n';
}

int run(int argc, char** argv)
{
  CLI::App app{ "Semantic place classification from coordinates" };
  app.require_subcommand(1);

  // infer-locations
  auto* infer = app.add_subcommand("infer-locations",
                                   "Infer one coordinate per labeled place from WiFi/GPS logs");
  std::string visits_path, wifi_path, gps_path, labels_path, infer_out;
  std::string centroid_mode = "arithmetic";
  bool dedupe_aps = false;
  infer->add_option("--visits", visits_path, "visits.csv")->required();
  infer->add_option("--wifi", wifi_path, "wifi.csv")->required();
  infer->add_option("--gps", gps_path, "gps.csv")->required();
  infer->add_option("--labels", labels_path, "place_id,label map")->required();
  infer->add_option("--out", infer_out, "Output places.csv")->required();
  infer->add_option("--centroid", centroid_mode, "Mean of degrees or spherical centroid")
    ->capture_default_str()
    ->check(CLI::IsMember({ "arithmetic", "spherical" }));
  infer->add_flag("--dedupe-aps", dedupe_aps, "Count each access point once");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a classifier and save it");
  std::string fit_places, fit_model, bandwidth = "balloon", gate = "off";
  double h_km = 0.0;
  KdeFlags fit_flags;
  fit->add_option("--places", fit_places, "places.csv")->required();
  fit->add_option("--model", fit_model, "Output model file")->required();
  fit->add_option("--bandwidth", bandwidth, "balloon, fixed (needs --h-km) or cv")
    ->capture_default_str()
    ->check(CLI::IsMember({ "balloon", "fixed", "cv" }));
  fit->add_option("--h-km", h_km, "Fixed bandwidth (km)");
  fit->add_option("--gate", gate, "Restrict scoring to the probe's DBSCAN region")
    ->capture_default_str()
    ->check(CLI::IsMember({ "on", "off" }));
  fit_flags.add_to(fit);

  // predict
  auto* pred = app.add_subcommand("predict", "Classify one coordinate");
  std::string pred_model;
  double lat = 0.0, lon = 0.0;
  pred->add_option("--model", pred_model, "Model file")->required();
  pred->add_option("--lat", lat, "Latitude (degrees)")->required();
  pred->add_option("--lon", lon, "Longitude (degrees)")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Stratified k-fold evaluation of one method");
  std::string eval_places, eval_report, method = "kde-a";
  std::size_t folds = 10, threads = 1;
  std::uint64_t seed = 42;
  KdeFlags eval_flags;
  evaluate->add_option("--places", eval_places, "places.csv")->required();
  evaluate->add_option("--method", method, "Method")
    ->capture_default_str()
    ->check(CLI::IsMember({ "random", "dominant", "kde-f", "kde-a", "kde-a-dbscan" }));
  evaluate->add_option("--folds", folds, "Fold count")->capture_default_str();
  evaluate->add_option("--seed", seed, "Random seed")->capture_default_str();
  evaluate->add_option("--report", eval_report, "Output report")->required();
  evaluate->add_option("--threads", threads, "Folds evaluated concurrently")
    ->capture_default_str();
  eval_flags.add_to(evaluate);

  // compare
  auto* compare = app.add_subcommand("compare", "Wilcoxon signed-rank test on two reports");
  std::string report_a, report_b;
  compare->add_option("--report-a", report_a, "First report")->required();
  compare->add_option("--report-b", report_b, "Second report")->required();

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Evaluate KDE scores fused with external scores");
  std::string fuse_places, fuse_external, fuse_report, fuse_method = "kde-a-dbscan";
  double lambda = 0.5;
  std::size_t fuse_folds = 10;
  std::uint64_t fuse_seed = 42;
  KdeFlags fuse_flags;
  fuse->add_option("--places", fuse_places, "places.csv")->required();
  fuse->add_option("--external", fuse_external, "External per-place scores")->required();
  fuse->add_option("--lambda", lambda, "Weight of the KDE scores")->capture_default_str();
  fuse->add_option("--method", fuse_method, "KDE method")
    ->capture_default_str()
    ->check(CLI::IsMember({ "kde-f", "kde-a", "kde-a-dbscan" }));
  fuse->add_option("--folds", fuse_folds, "Fold count")->capture_default_str();
  fuse->add_option("--seed", fuse_seed, "Random seed")->capture_default_str();
  fuse->add_option("--report", fuse_report, "Output report")->required();
  fuse_flags.add_to(fuse);

  // annotate
  auto* annotate = app.add_subcommand("annotate", "Rasterize predictions to GeoJSON");
  std::string ann_model, bbox_text, ann_out;
  double cell_m = 100.0;
  std::size_t ann_threads = 1;
  annotate->add_option("--model", ann_model, "Model file")->required();
  annotate->add_option("--bbox", bbox_text, "minLat,minLon,maxLat,maxLon")->required();
  annotate->add_option("--cell-m", cell_m, "Cell size (meters)")->capture_default_str();
  annotate->add_option("--out", ann_out, "Output GeoJSON")->required();
  annotate->add_option("--threads", ann_threads, "Worker threads")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*infer) {
    InferenceOptions opts;
    opts.centroid = centroid_mode == "spherical" ? CentroidMode::spherical : CentroidMode::arithmetic;
    opts.dedupe_access_points = dedupe_aps;
    const auto summary = infer_locations(load_place_labels(labels_path), load_visits(visits_path),
                                         load_wifi(wifi_path), load_gps(gps_path), opts);
    write_places(infer_out, summary.places);
    std::size_t by_source[3] = { 0, 0, 0 };
    for (const auto& r : summary.results) {
      ++by_source[static_cast<int>(r.source)];
      if (r.source == LocationSource::none) {
        std::cerr << "excluded: " << r.place_id << " (no in-window WiFi or GPS)\n";
      }
    }
    std::cout << "places = " << summary.results.size() << '\n'
              << "wifi = " << by_source[0] << '\n'
              << "gps = " << by_source[1] << '\n'
              << "excluded = " << by_source[2] << '\n';
    return 0;
  }

  if (*fit) {
    ModelFile mf;
    mf.training = load_places(fit_places);
    const auto mc = fit_flags.method(MethodKind::kde_adaptive, 0);
    mf.config.kernel = mc.kernel;
    mf.config.use_priors = mc.use_priors;
    mf.config.balloon_scope = mc.balloon_scope;
    if (bandwidth == "balloon") {
      mf.config.bandwidth = mc.balloon;
    } else if (bandwidth == "fixed") {
      if (!(h_km > 0.0)) {
        throw ValidationError("--bandwidth fixed needs a positive --h-km");
      }
      mf.config.bandwidth = FixedBandwidth{ h_km };
    } else {
      std::vector<GeoPoint> pts;
      for (const auto& p : mf.training) {
        pts.push_back(p.location);
      }
      const auto grid = default_bandwidth_grid();
      mf.config.bandwidth = FixedBandwidth{ select_bandwidth_cv(pts, grid, mc.kernel) };
    }
    if (on_off(gate)) {
      mf.config.gating = mc.dbscan;
    }
    const auto model = mf.fit();
    save_model(fit_model, mf);
    std::cout << "training_places = " << mf.training.size() << '\n';
    if (const auto* f = std::get_if<FixedBandwidth>(&mf.config.bandwidth)) {
      std::cout << "bandwidth_km = " << csv::format_double(f->h_km) << '\n';
    }
    if (model.gate()) {
      std::cout << "regions = " << model.gate()->assignment.cluster_count << '\n';
    }
    return 0;
  }

  if (*pred) {
    const auto model = load_model(pred_model).fit();
    const GeoPoint probe(lat, lon);
    const auto scores = model.class_scores(probe);
    std::cout << "label = " << label_name(argmax_label(scores.values, model.present())) << '\n';
    std::cout << "region = " << (scores.region ? std::to_string(*scores.region) : "global")
              << '\n';
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      std::cout << "score." << kLabelNames[i] << " = " << csv::format_double(scores.values[i])
                << '\n';
    }
    return 0;
  }

  if (*evaluate) {
    const auto places = load_places(eval_places);
    const auto mc = eval_flags.method(parse_method(method), seed);
    const auto plan = stratified_kfold(places, folds, seed);
    auto report = cross_validate(places, make_method(mc), plan, threads);
    report.method = method;
    report.config = mc.echo();
    report.config.emplace_back("folds", std::to_string(folds));
    write_report(eval_report, report);
    print_report_summary(report, eval_report);
    return 0;
  }

  if (*compare) {
    const auto a = read_report(report_a);
    const auto b = read_report(report_b);
    const auto w = wilcoxon_signed_rank(a.fold_accuracies, b.fold_accuracies);
    std::cout << "method_a = " << a.method << '\n'
              << "method_b = " << b.method << '\n'
              << "w_statistic = " << csv::format_double(w.w_statistic) << '\n'
              << "w_plus = " << csv::format_double(w.w_plus) << '\n'
              << "w_minus = " << csv::format_double(w.w_minus) << '\n'
              << "n_effective = " << w.n_effective << '\n'
              << "p_two_sided = " << csv::format_double(w.p_two_sided) << '\n'
              << "p_method = " << (w.exact ? "exact" : "normal") << '\n'
              << "significant_at_0_05 = " << (w.significant_at_0_05 ? "true" : "false") << '\n';
    return 0;
  }

  if (*fuse) {
    const auto places = load_places(fuse_places);
    auto external = std::make_shared<const ExternalScores>(load_external_scores(fuse_external));
    const auto mc = fuse_flags.method(parse_method(fuse_method), fuse_seed);
    const auto plan = stratified_kfold(places, fuse_folds, fuse_seed);
    auto report = cross_validate(places, make_fused_method(mc, external, lambda), plan);
    report.method = "fuse(" + fuse_method + ")";
    report.config = mc.echo();
    report.config.emplace_back("lambda", csv::format_double(lambda));
    report.config.emplace_back("folds", std::to_string(fuse_folds));
    std::size_t missing = 0;
    for (const auto& p : places) {
      missing += external->count(p.place_id) ? 0 : 1;
    }
    report.config.emplace_back("places_without_external_scores", std::to_string(missing));
    write_report(fuse_report, report);
    print_report_summary(report, fuse_report);
    return 0;
  }

  if (*annotate) {
    const auto model = load_model(ann_model).fit();
    const auto grid = annotate_grid(model, parse_bbox(bbox_text), cell_m, ann_threads);
    emit_geojson(grid, ann_out);
    std::cout << "rows = " << grid.rows << '\n'
              << "cols = " << grid.cols << '\n'
              << "cells = " << grid.cells.size() << '\n';
    return 0;
  }
  return 1;
}

} // namespace

int main(int argc, char** argv)
{
  try {
    return run(argc, argv);
  } catch (const semplace::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::EmptyInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::InsufficientDataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const semplace::BudgetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
