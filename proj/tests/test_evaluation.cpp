#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "support.hpp"

using namespace mvsteg;
using mvsteg::testing::toy_corpus;

TEST(Grid, Defaults) {
  const auto g = hyper_grid::defaults();
  ASSERT_EQ(g.c.size(), 9u);
  ASSERT_EQ(g.gamma.size(), 11u);
  EXPECT_EQ(g.c.front(), 0.5);
  EXPECT_EQ(g.c.back(), 128.0);
  EXPECT_EQ(g.gamma.front(), 1.0 / 128);
  EXPECT_EQ(g.gamma.back(), 8.0);
}

TEST(CrossValidate, SinglePointGrid) {
  const auto s = toy_corpus(1, 10, 2, 0.1);
  const auto r = cross_validate(s, {3.0}, {0.25}, 5, 7);
  EXPECT_EQ(r.c, 3.0);
  EXPECT_EQ(r.gamma, 0.25);
}

TEST(CrossValidate, SeparableDataReachesFullAccuracy) {
  const auto s = toy_corpus(2, 12, 2, 2.0);
  const auto g = hyper_grid::defaults();
  const auto r = cross_validate(s, g.c, g.gamma, 5, 1);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
}

TEST(CrossValidate, TiesGoToSmallerParameters) {
  const auto s = toy_corpus(2, 12, 2, 2.0);
  const auto r = cross_validate(s, {64.0, 8.0, 16.0}, {2.0, 1.0}, 4, 3);
  EXPECT_DOUBLE_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.c, 8.0);
  EXPECT_EQ(r.gamma, 1.0);
}

TEST(CrossValidate, Errors) {
  const auto s = toy_corpus(2, 6, 1, 1.0);
  EXPECT_THROW(cross_validate(s, {}, {1.0}, 5, 1), invalid_argument);
  EXPECT_THROW(cross_validate(s, {1.0}, {}, 5, 1), invalid_argument);
  EXPECT_THROW(cross_validate(toy_corpus(2, 1, 3, 1.0), {1.0}, {1.0}, 5, 1), too_few_pairs);
}

TEST(CrossValidate, WorkerCountDoesNotChangeResult) {
  const auto s = toy_corpus(5, 15, 2, 0.08);
  const auto g = hyper_grid::defaults();
  const auto a = cross_validate(s, g.c, g.gamma, 5, 11, 1);
  const auto b = cross_validate(s, g.c, g.gamma, 5, 11, 3);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.gamma, b.gamma);
  EXPECT_EQ(a.accuracy, b.accuracy);
}

TEST(Folds, ReproducibleAndPairwise) {
  const auto s = toy_corpus(3, 17, 3, 0.1);
  const auto a = assign_folds(s, 5, 42);
  EXPECT_EQ(a, assign_folds(s, 5, 42));
  EXPECT_NE(a, assign_folds(s, 5, 43));
  ASSERT_EQ(a.size(), 17u);
  std::map<int, int> sizes;
  for (auto [pair, fold] : a) ++sizes[fold];
  for (auto [fold, n] : sizes) {
    EXPECT_GE(n, 3);
    EXPECT_LE(n, 4);
  }
}

TEST(Evaluate, PairIntegrity) {
  const auto s = toy_corpus(4, 20, 2, 0.1);
  evaluation_options opt;
  opt.seed = 9;
  opt.grid = {{1.0, 8.0}, {0.5, 2.0}};
  const auto rep = evaluate(s, opt);
  ASSERT_EQ(rep.repeats.size(), 10u);
  std::set<std::vector<int>> distinct_splits;
  for (const auto& r : rep.repeats) {
    EXPECT_EQ(r.train_pairs.size(), 12u);
    EXPECT_EQ(r.test_pairs.size(), 8u);
    std::set<int> all(r.train_pairs.begin(), r.train_pairs.end());
    for (int p : r.test_pairs) EXPECT_TRUE(all.insert(p).second) << "pair " << p << " straddles the split";
    EXPECT_EQ(all.size(), 20u);
    distinct_splits.insert(r.train_pairs);
  }
  EXPECT_GT(distinct_splits.size(), 5u);
}

TEST(Evaluate, Deterministic) {
  const auto s = toy_corpus(4, 10, 2, 0.05);
  evaluation_options opt;
  opt.repeats = 3;
  opt.seed = 1;
  opt.grid = {{1.0, 16.0}, {0.125, 2.0}};
  const auto a = evaluate(s, opt), b = evaluate(s, opt);
  std::ostringstream x, y;
  write_report_csv(x, a);
  write_report_csv(y, b);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_EQ(x.str().substr(0, 23), "repeat,c,gamma,accuracy");
}

TEST(Evaluate, SeparableCorpusIsDetected) {
  const auto rep = evaluate(toy_corpus(6, 20, 2, 2.0), {3, 0.6, 5, 2, hyper_grid::defaults(), 1});
  EXPECT_GT(rep.mean, 0.95);
}

TEST(Evaluate, ChanceOnLabelFreeFeatures) {
  const auto rep = evaluate(toy_corpus(8, 30, 4, 0.0), {10, 0.6, 5, 2, {{1.0, 8.0}, {0.5, 4.0}}, 1});
  EXPECT_GE(rep.mean, 0.35);
  EXPECT_LE(rep.mean, 0.65);
  double sum = 0;
  for (const auto& r : rep.repeats) sum += r.accuracy;
  EXPECT_NEAR(rep.mean, sum / 10, 1e-12);
  EXPECT_GE(rep.stddev, 0.0);
}

TEST(Evaluate, TooFewPairs) {
  EXPECT_THROW(evaluate(toy_corpus(1, 4, 3, 0.5)), too_few_pairs);
  EXPECT_THROW(evaluate(toy_corpus(1, 6, 1, 0.5), {0, 0.6, 5, 1, hyper_grid::defaults(), 1}), invalid_argument);
}

TEST(Samples, PairIdsFromSequenceIds) {
  std::vector<feature_row> rows = {{"b", label::cover, {}}, {"a", label::cover, {}}, {"b", label::stego, {}},
                                   {"a", label::stego, {}}};
  const auto s = samples_from_rows(rows);
  EXPECT_EQ(s[0].pair_id, 0);
  EXPECT_EQ(s[1].pair_id, 1);
  EXPECT_EQ(s[2].pair_id, 0);
  EXPECT_EQ(s[3].lbl, label::stego);
}
