#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "aesprice/models.hpp"
#include "aesprice/simulation.hpp"

namespace aesprice {

/// Grid indices (in [1, M]) at which early exercise is allowed. Always ends at M.
class ExerciseSchedule {
 public:
  /// Throws std::invalid_argument unless indices are strictly increasing,
  /// within [1, M] and end at M.
  ExerciseSchedule(TimeGrid grid, std::vector<std::size_t> indices);

  /// Every grid step 1..M (the American proxy).
  static ExerciseSchedule every_step(const TimeGrid& grid);
  /// n_dates equally spaced dates; M must be divisible by n_dates.
  static ExerciseSchedule equally_spaced(const TimeGrid& grid, std::size_t n_dates);
  /// n_dates dates at t = k T / n_dates, each mapped to the nearest grid index.
  static ExerciseSchedule nearest(const TimeGrid& grid, std::size_t n_dates);
  /// Maturity only (European).
  static ExerciseSchedule maturity_only(const TimeGrid& grid);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<std::size_t>& indices() const { return indices_; }

 private:
  TimeGrid grid_;
  std::vector<std::size_t> indices_;
};

/// Regression basis. Heston rows are [1, s, s^2, v, v^2, s v]; double Heston rows
/// are [1, s, s^2, v1, v1^2, v2, v2^2, s v1, s v2, v1 v2] with s = S / K.
struct BasisSpec {
  ModelKind kind = ModelKind::Heston;
  /// Drops the v1 * v2 column when false (double Heston only).
  bool variance_cross_term = true;

  std::size_t size() const;
};

/// One feature row. `v2` is ignored for Heston.
Eigen::VectorXd feature_row(const BasisSpec& basis, double s_over_k, double v1, double v2 = 0.0);

/// Feature matrix for the given path rows at `step`.
Eigen::MatrixXd build_features(const PathSet& paths, std::size_t step, std::span<const std::size_t> rows,
                               double strike, const BasisSpec& basis);

/// Singular values below this fraction of the largest are treated as zero.
inline constexpr double kRegressionRankTolerance = 1e-10;

/// Minimal-norm least-squares coefficients, or nullopt when there are no rows.
std::optional<Eigen::VectorXd> regress_continuation(const Eigen::MatrixXd& features, const Eigen::VectorXd& target);

struct LsmResult {
  double price = 0.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  double elapsed_seconds = 0.0;
  std::size_t memory_bytes = 0;
};

/// Per-path stopping decision from the backward sweep.
struct ExercisePolicy {
  std::vector<std::size_t> exercise_step;  // grid index at which each path stops
  std::vector<double> cashflow;            // undiscounted payoff received there
};

struct LsmOptions {
  std::optional<BasisSpec> basis;  // defaults to the full basis for the path model
};

/// Longstaff-Schwartz backward induction. Realized cashflows propagate backward;
/// fitted values only drive the exercise decision (exercise when h >= C_hat,
/// regression on paths with h > 0). No exercise at t = 0.
ExercisePolicy lsm_exercise_policy(const PathSet& paths, const PutPayoff& payoff, const ExerciseSchedule& schedule,
                                   double r, const LsmOptions& options = {});

LsmResult lsm_price(const PathSet& paths, const PutPayoff& payoff, const ExerciseSchedule& schedule, double r,
                    const LsmOptions& options = {});

}  // namespace aesprice
