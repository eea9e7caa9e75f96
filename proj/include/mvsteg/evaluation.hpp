#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mvsteg/error.hpp"
#include "mvsteg/parallel.hpp"
#include "mvsteg/random.hpp"
#include "mvsteg/features.hpp"
#include "mvsteg/svm.hpp"

namespace mvsteg {

struct hyper_grid {
  std::vector<double> c;
  std::vector<double> gamma;

  // c in {2^-1 .. 2^7}, gamma in {2^-7 .. 2^3}.
  static hyper_grid defaults() {
    hyper_grid g;
    for (int e = -1; e <= 7; ++e) g.c.push_back(std::ldexp(1.0, e));
    for (int e = -7; e <= 3; ++e) g.gamma.push_back(std::ldexp(1.0, e));
    return g;
  }
};

inline std::vector<int> distinct_pairs(std::span<const labeled_sample> samples) {
  std::set<int> ids;
  for (const auto& s : samples) ids.insert(s.pair_id);
  return {ids.begin(), ids.end()};
}

inline std::vector<labeled_sample> samples_of_pairs(std::span<const labeled_sample> samples, const std::set<int>& pairs) {
  std::vector<labeled_sample> out;
  for (const auto& s : samples)
    if (pairs.contains(s.pair_id)) out.push_back(s);
  return out;
}

// Fold index per pair id, so a pair never straddles training and validation.
inline std::map<int, int> assign_folds(std::span<const labeled_sample> samples, int folds, std::uint64_t seed) {
  auto ids = distinct_pairs(samples);
  rng gen(derive_seed(seed, 0xF01D));
  gen.shuffle(std::span<int>(ids));
  std::map<int, int> fold;
  for (std::size_t i = 0; i < ids.size(); ++i) fold[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
  return fold;
}

struct cv_choice {
  double c = 0;
  double gamma = 0;
  double accuracy = 0;
};

// Grid search by k-fold cross-validation over pair ids. Returns the point with
// the highest mean fold accuracy; ties go to smaller c, then smaller gamma.
inline cv_choice cross_validate(std::span<const labeled_sample> samples, std::vector<double> c_grid,
                                std::vector<double> gamma_grid, int folds, std::uint64_t seed, int workers = 1) {
  if (c_grid.empty() || gamma_grid.empty()) throw invalid_argument("hyperparameter grids must be non-empty");
  const int n_pairs = static_cast<int>(distinct_pairs(samples).size());
  if (n_pairs < 2) throw too_few_pairs("cross-validation needs at least 2 pairs");
  folds = std::clamp(folds, 2, n_pairs);
  std::sort(c_grid.begin(), c_grid.end());
  std::sort(gamma_grid.begin(), gamma_grid.end());

  const auto fold_of = assign_folds(samples, folds, seed);
  std::vector<std::vector<labeled_sample>> fit_sets(folds), validate(folds);
  for (const auto& s : samples) {
    const int f = fold_of.at(s.pair_id);
    for (int k = 0; k < folds; ++k) (k == f ? validate[k] : fit_sets[k]).push_back(s);
  }

  const std::size_t n_gamma = gamma_grid.size();
  std::vector<double> scores(c_grid.size() * n_gamma);
  parallel_for(scores.size(), workers, [&](std::size_t g) {
    const double c = c_grid[g / n_gamma], gamma = gamma_grid[g % n_gamma];
    double sum = 0;
    for (int k = 0; k < folds; ++k) sum += accuracy(train(fit_sets[k], c, gamma), validate[k]);
    scores[g] = sum / folds;
  });

  cv_choice best{c_grid[0], gamma_grid[0], scores[0]};
  for (std::size_t g = 1; g < scores.size(); ++g) {
    if (scores[g] > best.accuracy) best = {c_grid[g / n_gamma], gamma_grid[g % n_gamma], scores[g]};
  }
  return best;
}

struct evaluation_options {
  int repeats = 10;
  double train_fraction = 0.6;
  int folds = 5;
  std::uint64_t seed = 0;
  hyper_grid grid = hyper_grid::defaults();
  int workers = 1;
};

struct repeat_result {
  int repeat = 0;
  double c = 0;
  double gamma = 0;
  double accuracy = 0;
  std::vector<int> train_pairs;
  std::vector<int> test_pairs;
};

struct accuracy_report {
  std::vector<repeat_result> repeats;
  double mean = 0;
  // Sample standard deviation over repeats (0 for a single repeat).
  double stddev = 0;
};

// Repeated random pair splits: cross-validate on the training pairs, retrain
// at the chosen point, and score on the held-out pairs. Scaling is fitted on
// training data only.
inline accuracy_report evaluate(std::span<const labeled_sample> corpus, const evaluation_options& opt = {}) {
  const auto ids = distinct_pairs(corpus);
  if (ids.size() < 5) throw too_few_pairs("evaluation needs at least 5 cover/stego pairs, got " + std::to_string(ids.size()));
  if (opt.repeats < 1) throw invalid_argument("at least one repeat is required");
  if (!(opt.train_fraction > 0 && opt.train_fraction < 1)) throw invalid_argument("train fraction must be in (0,1)");
  const auto n_train = static_cast<std::size_t>(
      std::clamp<long long>(std::llround(opt.train_fraction * static_cast<double>(ids.size())), 2,
                            static_cast<long long>(ids.size()) - 1));

  accuracy_report report;
  for (int r = 0; r < opt.repeats; ++r) {
    std::vector<int> order = ids;
    rng gen(derive_seed(opt.seed, 0x5E1100 + static_cast<std::uint64_t>(r)));
    gen.shuffle(std::span<int>(order));
    repeat_result rr;
    rr.repeat = r;
    rr.train_pairs.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    rr.test_pairs.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(rr.train_pairs.begin(), rr.train_pairs.end());
    std::sort(rr.test_pairs.begin(), rr.test_pairs.end());
    const auto train_set = samples_of_pairs(corpus, {rr.train_pairs.begin(), rr.train_pairs.end()});
    const auto test_set = samples_of_pairs(corpus, {rr.test_pairs.begin(), rr.test_pairs.end()});
    const auto choice = cross_validate(train_set, opt.grid.c, opt.grid.gamma, opt.folds,
                                       derive_seed(opt.seed, 0xC0 + static_cast<std::uint64_t>(r)), opt.workers);
    rr.c = choice.c;
    rr.gamma = choice.gamma;
    rr.accuracy = accuracy(train(train_set, choice.c, choice.gamma), test_set);
    report.repeats.push_back(std::move(rr));
  }
  double sum = 0;
  for (const auto& rr : report.repeats) sum += rr.accuracy;
  report.mean = sum / static_cast<double>(report.repeats.size());
  if (report.repeats.size() > 1) {
    double ss = 0;
    for (const auto& rr : report.repeats) ss += (rr.accuracy - report.mean) * (rr.accuracy - report.mean);
    report.stddev = std::sqrt(ss / static_cast<double>(report.repeats.size() - 1));
  }
  return report;
}

inline void write_report_csv(std::ostream& os, const accuracy_report& report) {
  os << "repeat,c,gamma,accuracy\n";
  char buf[128];
  for (const auto& r : report.repeats) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.repeat, r.c, r.gamma, r.accuracy);
    os << buf;
  }
}

// Labeled samples from feature rows; pair ids are dense indices of the
// distinct sequence ids in first-seen order.
inline std::vector<labeled_sample> samples_from_rows(std::span<const feature_row> rows) {
  std::map<std::string, int> ids;
  std::vector<labeled_sample> out;
  for (const auto& r : rows) {
    const auto [it, _] = ids.emplace(r.sequence_id, static_cast<int>(ids.size()));
    out.push_back({r.features.f, r.lbl, it->second});
  }
  return out;
}

}  // namespace mvsteg
