#pragma once

#include "semplace/csv.hpp"
#include "semplace/errors.hpp"
#include "semplace/labels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace semplace {

// ---------------------------------------------------------------------------
// Stratified folds

struct FoldPlan
{
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of; // per place, in [0, k)

  std::vector<std::size_t> test_indices(std::size_t fold) const
  {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] == fold) {
        out.push_back(i);
      }
    }
    return out;
  }

  std::vector<std::size_t> train_indices(std::size_t fold) const
  {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
      if (fold_of[i] != fold) {
        out.push_back(i);
      }
    }
    return out;
  }
};

/// Shuffles each label's places (seeded) and deals them round-robin over the
/// folds. The dealing position carries over from one label to the next so
/// that small labels do not all pile into the first folds.
inline FoldPlan stratified_kfold(std::span<const LabeledPlace> places,
                                 std::size_t k,
                                 std::uint64_t seed)
{
  if (k < 2) {
    throw ValidationError("stratified_kfold: k must be >= 2");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(places.size(), 0);

  std::array<std::vector<std::size_t>, kLabelCount> by_label;
  for (std::size_t i = 0; i < places.size(); ++i) {
    by_label[index_of(places[i].label)].push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::size_t next = 0;
  for (auto& members : by_label) {
    std::shuffle(members.begin(), members.end(), rng);
    for (auto idx : members) {
      plan.fold_of[idx] = next;
      next = (next + 1) % k;
    }
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Cross-validation

using ConfusionMatrix = std::array<std::array<std::size_t, kLabelCount>, kLabelCount>;

struct EvalReport
{
  std::string method;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<double> fold_accuracies;
  double overall_accuracy = 0.0;
  double mean_fold_accuracy = 0.0;
  ConfusionMatrix confusion{}; // rows truth, columns prediction

  std::size_t total() const
  {
    std::size_t t = 0;
    for (const auto& row : confusion) {
      t = std::accumulate(row.begin(), row.end(), t);
    }
    return t;
  }

  std::size_t correct() const
  {
    std::size_t c = 0;
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      c += confusion[i][i];
    }
    return c;
  }
};

/// Per-place predictor produced by a method for one training split. The
/// predictor sees the test place but must not read its label.
using Predictor = std::function<SemanticLabel(const LabeledPlace&)>;
using MethodFactory =
  std::function<Predictor(std::span<const LabeledPlace> training, std::size_t fold)>;

/// Trains on k-1 folds and predicts the held-out one, for every fold. With
/// threads > 1 folds run concurrently; the report is identical either way.
inline EvalReport cross_validate(std::span<const LabeledPlace> places,
                                 const MethodFactory& factory,
                                 const FoldPlan& plan,
                                 std::size_t threads = 1)
{
  if (plan.fold_of.size() != places.size()) {
    throw FoldError("fold plan does not cover the dataset");
  }
  for (auto f : plan.fold_of) {
    if (f >= plan.k) {
      throw FoldError("fold index out of range");
    }
  }

  struct FoldResult
  {
    ConfusionMatrix confusion{};
    std::size_t correct = 0;
    std::size_t tested = 0;
  };
  std::vector<FoldResult> results(plan.k);

  auto run_fold = [&](std::size_t fold) {
    const auto test = plan.test_indices(fold);
    const auto train_idx = plan.train_indices(fold);
    if (train_idx.empty()) {
      throw FoldError("fold " + std::to_string(fold) + " has an empty training split");
    }
    if (test.empty()) {
      throw FoldError("fold " + std::to_string(fold) + " has no test places");
    }
    std::vector<LabeledPlace> train;
    train.reserve(train_idx.size());
    for (auto i : train_idx) {
      train.push_back(places[i]);
    }
    Predictor predict = factory(train, fold);
    FoldResult r;
    for (auto i : test) {
      const auto guess = predict(places[i]);
      ++r.confusion[index_of(places[i].label)][index_of(guess)];
      r.correct += guess == places[i].label ? 1 : 0;
      ++r.tested;
    }
    results[fold] = r;
  };

  if (threads <= 1) {
    for (std::size_t f = 0; f < plan.k; ++f) {
      run_fold(f);
    }
  } else {
    std::vector<std::exception_ptr> errors(plan.k);
    std::vector<std::thread> pool;
    std::size_t next = 0;
    std::mutex m;
    for (std::size_t t = 0; t < std::min(threads, plan.k); ++t) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t f;
          {
            std::lock_guard lock(m);
            if (next >= plan.k) {
              return;
            }
            f = next++;
          }
          try {
            run_fold(f);
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) {
      th.join();
    }
    for (auto& e : errors) {
      if (e) {
        std::rethrow_exception(e);
      }
    }
  }

  EvalReport report;
  std::size_t correct = 0;
  std::size_t tested = 0;
  for (const auto& r : results) {
    for (std::size_t i = 0; i < kLabelCount; ++i) {
      for (std::size_t j = 0; j < kLabelCount; ++j) {
        report.confusion[i][j] += r.confusion[i][j];
      }
    }
    report.fold_accuracies.push_back(static_cast<double>(r.correct) /
                                     static_cast<double>(r.tested));
    correct += r.correct;
    tested += r.tested;
  }
  report.overall_accuracy = static_cast<double>(correct) / static_cast<double>(tested);
  report.mean_fold_accuracy =
    std::accumulate(report.fold_accuracies.begin(), report.fold_accuracies.end(), 0.0) /
    static_cast<double>(report.fold_accuracies.size());
  return report;
}

// ---------------------------------------------------------------------------
// Report text format
//
//   # semplace evaluation report
//   method = kde-a
//   config.<key> = <value>          (zero or more)
//   folds = 10
//   overall_accuracy = 0.355
//   mean_fold_accuracy = 0.354
//   fold_accuracies = 0.32,0.36,...
//   confusion =
//   truth\pred BAR_RESTAURANT ... WORK_OF_FRIEND
//   BAR_RESTAURANT 3 0 ...
//   ...                              (10 rows)
//
// Numbers use the shortest round-trip decimal form.

inline std::string format_report(const EvalReport& r)
{
  std::ostringstream out;
  out << "# semplace evaluation report\n";
  out << "method = " << r.method << '\n';
  for (const auto& [k, v] : r.config) {
    out << "config." << k << " = " << v << '\n';
  }
  out << "folds = " << r.fold_accuracies.size() << '\n';
  out << "overall_accuracy = " << csv::format_double(r.overall_accuracy) << '\n';
  out << "mean_fold_accuracy = " << csv::format_double(r.mean_fold_accuracy) << '\n';
  out << "fold_accuracies = ";
  for (std::size_t i = 0; i < r.fold_accuracies.size(); ++i) {
    out << (i ? "," : "") << csv::format_double(r.fold_accuracies[i]);
  }
  out << "\nconfusion =\ntruth\\pred";
  for (auto name : kLabelNames) {
    out << ' ' << name;
  }
  out << '\n';
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    out << kLabelNames[i];
    for (std::size_t j = 0; j < kLabelCount; ++j) {
      out << ' ' << r.confusion[i][j];
    }
    out << '\n';
  }
  return out.str();
}

inline void write_report(const std::string& path, const EvalReport& r)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "'");
  }
  out << format_report(r);
  if (!out) {
    throw IoError("write failed for '" + path + "'");
  }
}

inline EvalReport parse_report(std::istream& in)
{
  EvalReport r;
  std::string line;
  std::size_t lineno = 0;
  bool have_folds = false;
  bool in_confusion = false;
  std::size_t confusion_row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (in_confusion) {
      if (line.rfind("truth\\pred", 0) == 0) {
        continue;
      }
      std::istringstream row(line);
      std::string name;
      row >> name;
      if (confusion_row >= kLabelCount || name != kLabelNames[confusion_row]) {
        throw ParseError(lineno, "unexpected confusion row '" + name + "'");
      }
      for (std::size_t j = 0; j < kLabelCount; ++j) {
        if (!(row >> r.confusion[confusion_row][j])) {
          throw ParseError(lineno, "short confusion row");
        }
      }
      ++confusion_row;
      continue;
    }
    const auto eq = line.find(" = ");
    const auto key = line.substr(0, line.find(" ="));
    const auto value = eq == std::string::npos ? std::string() : line.substr(eq + 3);
    if (key == "method") {
      r.method = value;
    } else if (key.rfind("config.", 0) == 0) {
      r.config.emplace_back(key.substr(7), value);
    } else if (key == "overall_accuracy") {
      r.overall_accuracy = csv::parse_double(value, lineno, key);
    } else if (key == "mean_fold_accuracy") {
      r.mean_fold_accuracy = csv::parse_double(value, lineno, key);
    } else if (key == "fold_accuracies") {
      for (const auto& f : csv::split(value, lineno)) {
        r.fold_accuracies.push_back(csv::parse_double(f, lineno, key));
      }
      have_folds = true;
    } else if (key == "confusion") {
      in_confusion = true;
    } else if (key == "folds") {
      // implied by fold_accuracies
    } else {
      throw ParseError(lineno, "unknown report key '" + key + "'");
    }
  }
  if (!have_folds) {
    throw ParseError(lineno, "report has no fold_accuracies");
  }
  if (in_confusion && confusion_row != kLabelCount) {
    throw ParseError(lineno, "incomplete confusion matrix");
  }
  return r;
}

inline EvalReport read_report(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "'");
  }
  return parse_report(in);
}

// ---------------------------------------------------------------------------
// Wilcoxon signed-rank test

struct WilcoxonResult
{
  double w_statistic = 0.0; // min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  std::size_t n_effective = 0;
  double p_two_sided = 1.0;
  bool exact = true;
  bool significant_at_0_05 = false;
};

/// Largest number of non-zero differences for which the p-value is exact.
inline constexpr std::size_t kWilcoxonExactLimit = 20;

/// Midranks (1-based) of the values, ties sharing the average rank.
inline std::vector<double> midranks(std::span<const double> values)
{
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{ 0 });
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) {
      ranks[order[t]] = rank;
    }
    i = j + 1;
  }
  return ranks;
}

/// Exact two-sided p-value: P(T+ <= w) doubled, where T+ is the positive rank
/// sum under random sign flips. Counts sign patterns through a subset-sum
/// table over doubled (integral) midranks.
inline double wilcoxon_exact_p(std::span<const double> ranks, double w)
{
  std::vector<std::size_t> twice;
  std::size_t max_sum = 0;
  for (double r : ranks) {
    twice.push_back(static_cast<std::size_t>(std::llround(2.0 * r)));
    max_sum += twice.back();
  }
  std::vector<double> ways(max_sum + 1, 0.0);
  ways[0] = 1.0;
  std::size_t reach = 0;
  for (auto r : twice) {
    reach += r;
    for (std::size_t s = reach; s >= r; --s) {
      ways[s] += ways[s - r];
      if (s == r) {
        break;
      }
    }
  }
  const auto limit = static_cast<std::size_t>(std::llround(2.0 * w));
  double tail = 0.0;
  for (std::size_t s = 0; s <= std::min(limit, max_sum); ++s) {
    tail += ways[s];
  }
  const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(ranks.size()));
  return std::min(p, 1.0);
}

/// Normal approximation with tie-corrected variance and continuity correction.
inline double wilcoxon_normal_p(std::span<const double> ranks, double w)
{
  const double n = static_cast<double>(ranks.size());
  const double mean = n * (n + 1.0) / 4.0;
  double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
  std::vector<double> sorted(ranks.begin(), ranks.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) {
      ++j;
    }
    const double t = static_cast<double>(j - i);
    var -= (t * t * t - t) / 48.0;
    i = j;
  }
  if (var <= 0.0) {
    return 1.0;
  }
  const double z = std::max(0.0, std::fabs(w - mean) - 0.5) / std::sqrt(var);
  return std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
}

enum class WilcoxonMethod
{
  automatic, // exact up to kWilcoxonExactLimit non-zero differences
  exact,
  normal
};

/// Paired two-sided signed-rank test on a - b. Differences are rounded to 12
/// decimals first so accuracy ratios that agree mathematically tie exactly.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a,
                                           std::span<const double> b,
                                           WilcoxonMethod method = WilcoxonMethod::automatic)
{
  if (a.size() != b.size()) {
    throw InputError("wilcoxon_signed_rank: samples differ in length");
  }
  if (a.empty()) {
    throw EmptyInputError("wilcoxon_signed_rank: no pairs");
  }
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::round((a[i] - b[i]) * 1e12) / 1e12;
    if (!std::isfinite(d)) {
      throw DomainError("wilcoxon_signed_rank: non-finite difference");
    }
    if (d != 0.0) {
      diffs.push_back(d);
    }
  }
  WilcoxonResult res;
  res.n_effective = diffs.size();
  if (diffs.empty()) {
    res.p_two_sided = 1.0;
    return res;
  }
  std::vector<double> mags;
  for (double d : diffs) {
    mags.push_back(std::fabs(d));
  }
  const auto ranks = midranks(mags);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    (diffs[i] > 0 ? res.w_plus : res.w_minus) += ranks[i];
  }
  res.w_statistic = std::min(res.w_plus, res.w_minus);
  res.exact = method == WilcoxonMethod::exact ||
              (method == WilcoxonMethod::automatic && diffs.size() <= kWilcoxonExactLimit);
  res.p_two_sided = res.exact ? wilcoxon_exact_p(ranks, res.w_statistic)
                              : wilcoxon_normal_p(ranks, res.w_statistic);
  res.significant_at_0_05 = res.p_two_sided < 0.05;
  return res;
}

} // namespace semplace
