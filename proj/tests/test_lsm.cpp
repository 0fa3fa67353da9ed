#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "aesprice/lsm.hpp"

using namespace aesprice;

namespace {

HestonParams violating() { return std::get<HestonParams>(find_preset("feller-violating")->model); }
DoubleHestonParams two_factor() { return std::get<DoubleHestonParams>(find_preset("double-heston-zhang")->model); }

}  // namespace

TEST(Features, HestonRow) {
  const Eigen::VectorXd row = feature_row(BasisSpec{.kind = ModelKind::Heston}, 90.0 / 100.0, 0.04);
  const double expected[] = {1, 0.9, 0.81, 0.04, 0.0016, 0.036};
  ASSERT_EQ(row.size(), 6);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(row(j), expected[j], 1e-15);
}

TEST(Features, DoubleHestonZeroVarianceRow) {
  const Eigen::VectorXd row = feature_row(BasisSpec{.kind = ModelKind::DoubleHeston}, 1.0, 0.0, 0.0);
  const double expected[] = {1, 1, 1, 0, 0, 0, 0, 0, 0, 0};
  ASSERT_EQ(row.size(), 10);
  for (int j = 0; j < 10; ++j) EXPECT_EQ(row(j), expected[j]);
}

TEST(Features, ColumnCounts) {
  EXPECT_EQ(BasisSpec{.kind = ModelKind::Heston}.size(), 6u);
  EXPECT_EQ(BasisSpec{.kind = ModelKind::DoubleHeston}.size(), 10u);
  EXPECT_EQ((BasisSpec{.kind = ModelKind::DoubleHeston, .variance_cross_term = false}.size()), 9u);
  const Eigen::VectorXd row =
      feature_row(BasisSpec{.kind = ModelKind::DoubleHeston, .variance_cross_term = false}, 2.0, 0.5, 0.25);
  EXPECT_EQ(row.size(), 9);
  EXPECT_EQ(row(8), 2.0 * 0.25);
}

TEST(Features, MatrixMatchesRows) {
  const TimeGrid g(0.25, 3);
  const PathSet paths = simulate(two_factor(), Scheme::Aes, g, 20, 1);
  const std::vector<std::size_t> rows = {3, 7, 19};
  const BasisSpec basis{.kind = ModelKind::DoubleHeston};
  const Eigen::MatrixXd x = build_features(paths, 2, rows, 61.9, basis);
  ASSERT_EQ(x.rows(), 3);
  for (int r = 0; r < 3; ++r) {
    const std::size_t i = rows[r];
    const Eigen::VectorXd expect =
        feature_row(basis, paths.asset(2)[i] / 61.9, paths.variance1(2)[i], paths.variance2(2)[i]);
    EXPECT_LT((x.row(r).transpose() - expect).norm(), 1e-12);
  }
  const PathSet single = simulate(violating(), Scheme::Aes, g, 5, 1);
  EXPECT_THROW(build_features(single, 1, rows, 100.0, basis), std::invalid_argument);
}

TEST(Regression, InterceptOnlyGivesMean) {
  Eigen::MatrixXd x(2, 1);
  x << 1, 1;
  Eigen::VectorXd y(2);
  y << 2, 4;
  const auto beta = regress_continuation(x, y);
  ASSERT_TRUE(beta);
  EXPECT_NEAR((*beta)(0), 3.0, 1e-12);
}

TEST(Regression, CollinearColumnsMatchReducedDesign) {
  Eigen::MatrixXd reduced(5, 2);
  reduced << 1, 0.1, 1, 0.4, 1, 0.5, 1, 0.9, 1, 1.3;
  Eigen::MatrixXd dup(5, 3);
  dup << reduced, reduced.col(1);
  Eigen::VectorXd y(5);
  y << 0.3, 1.1, 0.2, 2.0, 1.7;
  const auto a = regress_continuation(reduced, y);
  const auto b = regress_continuation(dup, y);
  ASSERT_TRUE(a && b);
  EXPECT_TRUE(b->allFinite());
  EXPECT_LT((reduced * *a - dup * *b).norm(), 1e-10);
  // minimal norm splits the duplicated weight evenly
  EXPECT_NEAR((*b)(1), (*b)(2), 1e-10);
}

TEST(Regression, ExactFitHasZeroResidual) {
  Eigen::MatrixXd x(6, 3);
  x << 1, 0.5, 0.25, 1, 1.0, 1.0, 1, 1.5, 2.25, 1, 2.0, 4.0, 1, 2.5, 6.25, 1, 3.0, 9.0;
  Eigen::Vector3d truth(0.7, -1.2, 0.4);
  const Eigen::VectorXd y = x * truth;
  const auto beta = regress_continuation(x, y);
  ASSERT_TRUE(beta);
  EXPECT_LT((x * *beta - y).norm(), 1e-10 * y.norm());
}

TEST(Regression, NoRowsAndShapeMismatch) {
  EXPECT_FALSE(regress_continuation(Eigen::MatrixXd(0, 6), Eigen::VectorXd(0)));
  EXPECT_THROW(regress_continuation(Eigen::MatrixXd(3, 2), Eigen::VectorXd(2)), std::invalid_argument);
}

TEST(Regression, FewerRowsThanColumns) {
  Eigen::MatrixXd x(2, 6);
  x.setRandom();
  Eigen::VectorXd y(2);
  y << 1.0, -1.0;
  const auto beta = regress_continuation(x, y);
  ASSERT_TRUE(beta);
  EXPECT_EQ(beta->size(), 6);
  EXPECT_LT((x * *beta - y).norm(), 1e-10);
}

TEST(Schedule, Factories) {
  const TimeGrid g(1.0, 12);
  EXPECT_EQ(ExerciseSchedule::every_step(g).indices().size(), 12u);
  EXPECT_EQ(ExerciseSchedule::equally_spaced(g, 4).indices(), (std::vector<std::size_t>{3, 6, 9, 12}));
  EXPECT_EQ(ExerciseSchedule::maturity_only(g).indices(), (std::vector<std::size_t>{12}));
  EXPECT_THROW(ExerciseSchedule::equally_spaced(g, 5), std::invalid_argument);
  EXPECT_THROW(ExerciseSchedule::nearest(g, 13), std::invalid_argument);
}

TEST(Schedule, Validation) {
  const TimeGrid g(1.0, 10);
  EXPECT_THROW(ExerciseSchedule(g, {}), std::invalid_argument);
  EXPECT_THROW(ExerciseSchedule(g, {0, 10}), std::invalid_argument);
  EXPECT_THROW(ExerciseSchedule(g, {5, 5, 10}), std::invalid_argument);
  EXPECT_THROW(ExerciseSchedule(g, {5, 8}), std::invalid_argument);
  EXPECT_THROW(ExerciseSchedule(g, {5, 11}), std::invalid_argument);
  EXPECT_NO_THROW(ExerciseSchedule(g, {2, 7, 10}));
}

// 26 dates do not divide 750 steps: each date goes to the closest grid index.
TEST(Schedule, NearestMappingOnFineGrid) {
  const TimeGrid g(1.0, 750);
  const auto idx = ExerciseSchedule::nearest(g, 26).indices();
  ASSERT_EQ(idx.size(), 26u);
  for (std::size_t j = 0; j < 26; ++j) {
    const double exact = (j + 1) * 750.0 / 26.0;
    EXPECT_EQ(idx[j], static_cast<std::size_t>(std::lround(exact)));
    EXPECT_LE(std::abs(double(idx[j]) - exact), 0.5);
  }
  EXPECT_EQ(idx.back(), 750u);
  EXPECT_EQ(ExerciseSchedule::nearest(TimeGrid(1.0, 12), 4).indices(), (std::vector<std::size_t>{3, 6, 9, 12}));
}

TEST(Lsm, EuropeanScheduleIsDiscountedPayoffMean) {
  const HestonParams p = violating();
  const TimeGrid g(0.25, 8);
  const PathSet paths = simulate_aes_heston(p, g, 20'000, 3);
  const PutPayoff payoff{100.0};
  const LsmResult res = lsm_price(paths, payoff, ExerciseSchedule::maturity_only(g), p.r);
  double sum = 0.0;
  for (double s : paths.asset(8)) sum += std::exp(-p.r * 0.25) * payoff(s);
  EXPECT_NEAR(res.price, sum / 20'000, 1e-12);
}

TEST(Lsm, MoreExerciseRightsNeverCheaper) {
  const HestonParams p = violating();
  const TimeGrid g(0.25, 20);
  const PathSet paths = simulate_aes_heston(p, g, 50'000, 4);
  const PutPayoff payoff{100.0};
  const double european = lsm_price(paths, payoff, ExerciseSchedule::maturity_only(g), p.r).price;
  const LsmResult five = lsm_price(paths, payoff, ExerciseSchedule::equally_spaced(g, 5), p.r);
  const LsmResult twenty = lsm_price(paths, payoff, ExerciseSchedule::every_step(g), p.r);
  EXPECT_GE(five.price, european);
  EXPECT_GE(twenty.price, five.price - 2 * five.std_error);
  EXPECT_GT(twenty.price, european);
}

TEST(Lsm, PriceBoundedByStrikeAndIntrinsic) {
  for (double s0 : {60.0, 90.0, 100.0, 130.0}) {
    HestonParams p = violating();
    p.s0 = s0;
    const TimeGrid g(0.25, 12);
    const LsmResult res = lsm_price(simulate_aes_heston(p, g, 20'000, 5), PutPayoff{100}, ExerciseSchedule::every_step(g), p.r);
    EXPECT_LE(res.price, 100.0);
    EXPECT_GE(res.price, 0.0);
    // deep in the money the holder can always exercise at the first date
    if (s0 == 60.0) EXPECT_GE(res.price, 0.95 * (100.0 - s0));
  }
}

TEST(Lsm, IdenticalAcrossWorkerCounts) {
  const TimeGrid g(0.25, 12);
  const PutPayoff payoff{61.9};
  const auto sched = ExerciseSchedule::every_step(g);
  const LsmResult a = lsm_price(simulate(two_factor(), Scheme::Aes, g, 30'001, 6, 1), payoff, sched, 0.03);
  const LsmResult b = lsm_price(simulate(two_factor(), Scheme::Aes, g, 30'001, 6, 4), payoff, sched, 0.03);
  EXPECT_EQ(a.price, b.price);
  EXPECT_EQ(a.std_error, b.std_error);
}

// Scaling S and K by the same factor leaves the normalized features and the exercise decisions unchanged.
TEST(Lsm, ScaleInvariantExerciseDecisions) {
  HestonParams p = violating();
  const TimeGrid g(0.25, 10);
  const auto sched = ExerciseSchedule::every_step(g);
  const PathSet base = simulate_aes_heston(p, g, 20'000, 7);
  p.s0 *= 1000.0;
  const PathSet big = simulate_aes_heston(p, g, 20'000, 7);
  const auto pa = lsm_exercise_policy(base, PutPayoff{100.0}, sched, p.r);
  const auto pb = lsm_exercise_policy(big, PutPayoff{100'000.0}, sched, p.r);
  std::size_t same = 0;
  for (std::size_t i = 0; i < pa.exercise_step.size(); ++i) same += pa.exercise_step[i] == pb.exercise_step[i];
  EXPECT_GE(double(same) / pa.exercise_step.size(), 0.999);
  const double a = lsm_price(base, PutPayoff{100.0}, sched, p.r).price;
  const double b = lsm_price(big, PutPayoff{100'000.0}, sched, p.r).price;
  EXPECT_NEAR(b / a, 1000.0, 1e-3 * 1000.0);
}

TEST(Lsm, ResultMetadata) {
  const TimeGrid g(0.25, 6);
  const PathSet paths = simulate(two_factor(), Scheme::Euler, g, 1000, 1);
  const LsmResult res = lsm_price(paths, PutPayoff{61.9}, ExerciseSchedule::every_step(g), 0.03);
  EXPECT_EQ(res.n_paths, 1000u);
  EXPECT_EQ(res.n_steps, 6u);
  EXPECT_EQ(res.memory_bytes, PathSet::memory_model(1000, 6, ModelKind::DoubleHeston));
  EXPECT_GT(res.elapsed_seconds, 0.0);
  EXPECT_GT(res.std_error, 0.0);
}

TEST(Lsm, PolicyStopsOnScheduleOnly) {
  const TimeGrid g(0.25, 12);
  const PathSet paths = simulate_aes_heston(violating(), g, 5000, 8);
  const auto sched = ExerciseSchedule::equally_spaced(g, 3);
  const auto policy = lsm_exercise_policy(paths, PutPayoff{100}, sched, 0.04);
  for (std::size_t i = 0; i < 5000; ++i) {
    const auto k = policy.exercise_step[i];
    ASSERT_TRUE(k == 4 || k == 8 || k == 12);
    if (k < 12) ASSERT_GT(policy.cashflow[i], 0.0);
  }
}

TEST(Lsm, RejectsMismatchedGridAndStrike) {
  const PathSet paths = simulate_aes_heston(violating(), TimeGrid(0.25, 4), 100, 1);
  EXPECT_THROW(lsm_price(paths, PutPayoff{100}, ExerciseSchedule::every_step(TimeGrid(0.25, 5)), 0.04),
               std::invalid_argument);
  EXPECT_THROW(lsm_price(paths, PutPayoff{-1}, ExerciseSchedule::every_step(TimeGrid(0.25, 4)), 0.04),
               InvalidParameters);
}

TEST(Lsm, SparseStorageGivesSamePrice) {
  const TimeGrid g(0.25, 40);
  const auto sched = ExerciseSchedule::equally_spaced(g, 10);
  std::vector<std::size_t> stored = {0};
  for (auto k : sched.indices()) stored.push_back(k);
  const PathSet full = simulate(violating(), Scheme::Euler, g, 5000, 3);
  const PathSet sparse = simulate(violating(), Scheme::Euler, g, 5000, 3, 0, stored);
  EXPECT_EQ(lsm_price(full, PutPayoff{100}, sched, 0.04).price, lsm_price(sparse, PutPayoff{100}, sched, 0.04).price);
}
