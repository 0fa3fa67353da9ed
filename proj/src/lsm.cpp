#include "aesprice/lsm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aesprice {

ExerciseSchedule::ExerciseSchedule(TimeGrid grid, std::vector<std::size_t> indices)
    : grid_(grid), indices_(std::move(indices)) {
  if (indices_.empty()) throw std::invalid_argument("exercise schedule: no exercise dates");
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    if (indices_[j] == 0 || indices_[j] > grid_.steps()) {
      throw std::invalid_argument("exercise schedule: index " + std::to_string(indices_[j]) + " outside [1, " +
                                  std::to_string(grid_.steps()) + "]");
    }
    if (j > 0 && indices_[j] <= indices_[j - 1]) {
      throw std::invalid_argument("exercise schedule: indices must be strictly increasing");
    }
  }
  if (indices_.back() != grid_.steps()) {
    throw std::invalid_argument("exercise schedule: last exercise date must be the maturity");
  }
}

ExerciseSchedule ExerciseSchedule::every_step(const TimeGrid& grid) {
  std::vector<std::size_t> idx(grid.steps());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k + 1;
  return {grid, std::move(idx)};
}

ExerciseSchedule ExerciseSchedule::equally_spaced(const TimeGrid& grid, std::size_t n_dates) {
  if (n_dates == 0) throw std::invalid_argument("exercise schedule: need at least one date");
  if (grid.steps() % n_dates != 0) {
    throw std::invalid_argument("exercise schedule: " + std::to_string(grid.steps()) +
                                " steps are not divisible by " + std::to_string(n_dates) + " dates");
  }
  const std::size_t stride = grid.steps() / n_dates;
  std::vector<std::size_t> idx(n_dates);
  for (std::size_t j = 0; j < n_dates; ++j) idx[j] = (j + 1) * stride;
  return {grid, std::move(idx)};
}

ExerciseSchedule ExerciseSchedule::nearest(const TimeGrid& grid, std::size_t n_dates) {
  if (n_dates == 0) throw std::invalid_argument("exercise schedule: need at least one date");
  if (n_dates > grid.steps()) {
    throw std::invalid_argument("exercise schedule: more dates than grid steps");
  }
  std::vector<std::size_t> idx(n_dates);
  for (std::size_t j = 0; j < n_dates; ++j) {
    // round((j + 1) M / n) in integer arithmetic, halves rounded up
    idx[j] = ((j + 1) * grid.steps() * 2 + n_dates) / (2 * n_dates);
  }
  return {grid, std::move(idx)};
}

ExerciseSchedule ExerciseSchedule::maturity_only(const TimeGrid& grid) { return {grid, {grid.steps()}}; }

std::size_t BasisSpec::size() const {
  if (kind == ModelKind::Heston) return 6;
  return variance_cross_term ? 10 : 9;
}

namespace {

// Writes one basis row through `out(j)`, j = 0..basis.size()-1.
template <typename Out>
void fill_row(const BasisSpec& basis, double s, double v1, double v2, Out&& out) {
  out(0) = 1.0;
  out(1) = s;
  out(2) = s * s;
  out(3) = v1;
  out(4) = v1 * v1;
  if (basis.kind == ModelKind::Heston) {
    out(5) = s * v1;
    return;
  }
  out(5) = v2;
  out(6) = v2 * v2;
  out(7) = s * v1;
  out(8) = s * v2;
  if (basis.variance_cross_term) out(9) = v1 * v2;
}

}  // namespace

Eigen::VectorXd feature_row(const BasisSpec& basis, double s, double v1, double v2) {
  Eigen::VectorXd row(basis.size());
  fill_row(basis, s, v1, v2, [&](Eigen::Index j) -> double& { return row(j); });
  return row;
}

Eigen::MatrixXd build_features(const PathSet& paths, std::size_t step, std::span<const std::size_t> rows,
                               double strike, const BasisSpec& basis) {
  if (basis.kind == ModelKind::DoubleHeston && !paths.has_second_variance()) {
    throw std::invalid_argument("build_features: double Heston basis needs two variance factors");
  }
  const auto asset = paths.asset(step);
  const auto var1 = paths.variance1(step);
  const auto var2 = paths.variance2(step);
  const double inv_k = 1.0 / strike;
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::size_t i = rows[j];
    const auto r = static_cast<Eigen::Index>(j);
    const double v2 = var2.empty() ? 0.0 : var2[i];
    fill_row(basis, asset[i] * inv_k, var1[i], v2, [&](Eigen::Index c) -> double& { return x(r, c); });
  }
  return x;
}

std::optional<Eigen::VectorXd> regress_continuation(const Eigen::MatrixXd& features, const Eigen::VectorXd& target) {
  if (features.rows() != target.size()) {
    throw std::invalid_argument("regress_continuation: feature rows and target length differ");
  }
  if (features.rows() == 0) return std::nullopt;

  // X = QR, then the pseudoinverse solve on the small triangular factor:
  // X and R share singular values, so the rank cut matches an SVD of X.
  const Eigen::Index p = features.cols();
  const Eigen::Index n = features.rows();
  const Eigen::Index k = std::min(n, p);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(features);
  const Eigen::VectorXd qty = qr.householderQ().transpose() * target;
  const Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(kRegressionRankTolerance);
  return Eigen::VectorXd(svd.solve(qty.head(k)));
}

namespace {

BasisSpec default_basis(const PathSet& paths) { return BasisSpec{.kind = paths.kind()}; }

}  // namespace

ExercisePolicy lsm_exercise_policy(const PathSet& paths, const PutPayoff& payoff, const ExerciseSchedule& schedule,
                                   double r, const LsmOptions& options) {
  if (!(schedule.grid() == paths.grid())) {
    throw std::invalid_argument("lsm: exercise schedule grid does not match the path grid");
  }
  if (auto errors = check(payoff); !errors.empty()) throw InvalidParameters(std::move(errors));
  const BasisSpec basis = options.basis.value_or(default_basis(paths));
  const TimeGrid& grid = paths.grid();
  const std::size_t n = paths.n_paths();
  const std::size_t maturity = grid.steps();

  ExercisePolicy policy;
  policy.exercise_step.assign(n, maturity);
  policy.cashflow.resize(n);
  {
    const auto terminal = paths.asset(maturity);
    for (std::size_t i = 0; i < n; ++i) policy.cashflow[i] = payoff(terminal[i]);
  }

  std::vector<std::size_t> itm;
  itm.reserve(n);
  const auto& dates = schedule.indices();
  for (auto it = dates.rbegin(); it != dates.rend(); ++it) {
    const std::size_t k = *it;
    if (k == maturity) continue;
    const auto asset = paths.asset(k);
    itm.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (payoff(asset[i]) > 0.0) itm.push_back(i);
    }
    const double t_k = grid.time(k);
    Eigen::VectorXd target(static_cast<Eigen::Index>(itm.size()));
    for (std::size_t j = 0; j < itm.size(); ++j) {
      const std::size_t i = itm[j];
      target(static_cast<Eigen::Index>(j)) =
          policy.cashflow[i] * std::exp(-r * (grid.time(policy.exercise_step[i]) - t_k));
    }
    const Eigen::MatrixXd x = build_features(paths, k, itm, payoff.strike, basis);
    const auto coefficients = regress_continuation(x, target);
    if (!coefficients) continue;  // nothing in the money: hold everywhere
    const Eigen::VectorXd fitted = x * *coefficients;
    for (std::size_t j = 0; j < itm.size(); ++j) {
      const std::size_t i = itm[j];
      const double exercise_value = payoff(asset[i]);
      if (exercise_value >= fitted(static_cast<Eigen::Index>(j))) {
        policy.exercise_step[i] = k;
        policy.cashflow[i] = exercise_value;
      }
    }
  }
  return policy;
}

LsmResult lsm_price(const PathSet& paths, const PutPayoff& payoff, const ExerciseSchedule& schedule, double r,
                    const LsmOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const ExercisePolicy policy = lsm_exercise_policy(paths, payoff, schedule, r, options);

  const TimeGrid& grid = paths.grid();
  std::vector<double> discount(grid.steps() + 1);
  for (std::size_t k = 0; k <= grid.steps(); ++k) discount[k] = std::exp(-r * grid.time(k));

  const std::size_t n = paths.n_paths();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += discount[policy.exercise_step[i]] * policy.cashflow[i];
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = discount[policy.exercise_step[i]] * policy.cashflow[i] - mean;
    sq += d * d;
  }
  const double std_error = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;

  LsmResult result;
  result.price = mean;
  result.std_error = std_error;
  result.n_paths = n;
  result.n_steps = grid.steps();
  result.memory_bytes = paths.memory_bytes();
  result.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace aesprice
