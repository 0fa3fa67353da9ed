#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "aesprice/models.hpp"
#include "aesprice/rng.hpp"

namespace aesprice {

/// Uniform grid t_k = k * T / M, k = 0..M.
class TimeGrid {
 public:
  TimeGrid(double maturity, std::size_t steps);

  double maturity() const { return maturity_; }
  std::size_t steps() const { return steps_; }
  double dt() const { return dt_; }
  /// t_k; returns the maturity exactly for k == steps().
  double time(std::size_t k) const { return k == steps_ ? maturity_ : static_cast<double>(k) * dt_; }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double maturity_;
  std::size_t steps_;
  double dt_;
};

/// Simulated trajectories stored column-per-timestep: the cross-section of all
/// paths at step k is contiguous. Only levels are kept (log-prices are transient).
class PathSet {
 public:
  /// `stored_steps` lists the grid steps kept in memory (sorted, must contain 0 and M);
  /// empty keeps every step.
  PathSet(TimeGrid grid, std::size_t n_paths, ModelKind kind, std::vector<std::size_t> stored_steps = {});

  const TimeGrid& grid() const { return grid_; }
  std::size_t n_paths() const { return n_paths_; }
  ModelKind kind() const { return kind_; }
  bool has_second_variance() const { return kind_ == ModelKind::DoubleHeston; }
  bool stores(std::size_t step) const { return step < slot_.size() && slot_[step] != kNotStored; }
  const std::vector<std::size_t>& stored_steps() const { return stored_steps_; }

  std::span<const double> asset(std::size_t step) const { return column(asset_, step); }
  std::span<const double> variance1(std::size_t step) const { return column(variance1_, step); }
  /// Empty span for single-factor paths.
  std::span<const double> variance2(std::size_t step) const;

  std::span<double> asset(std::size_t step) { return column(asset_, step); }
  std::span<double> variance1(std::size_t step) { return column(variance1_, step); }
  std::span<double> variance2(std::size_t step);

  /// Bytes held by the path matrices: N * (stored steps) * 8 per field,
  /// N * (M + 1) * 8 per field with full storage.
  std::size_t memory_bytes() const;
  static std::size_t memory_model(std::size_t n_paths, std::size_t steps, ModelKind kind);

 private:
  static constexpr std::size_t kNotStored = static_cast<std::size_t>(-1);

  std::size_t slot(std::size_t step) const;
  std::span<const double> column(const std::vector<double>& data, std::size_t step) const {
    return {data.data() + slot(step) * n_paths_, n_paths_};
  }
  std::span<double> column(std::vector<double>& data, std::size_t step) {
    return {data.data() + slot(step) * n_paths_, n_paths_};
  }

  TimeGrid grid_;
  std::size_t n_paths_;
  ModelKind kind_;
  std::vector<std::size_t> stored_steps_;
  std::vector<std::size_t> slot_;  // grid step -> column, kNotStored if dropped
  std::vector<double> asset_;
  std::vector<double> variance1_;
  std::vector<double> variance2_;
};

/// Exact CIR transition over one step: v_next = c_bar * chi2(dof, kappa_bar).
struct CirTransition {
  double c_bar;
  double kappa_bar;
  double dof;
};

/// Throws std::invalid_argument for dt <= 0 or v_current < 0.
CirTransition cir_transition_params(double kappa, double gamma, double nu_bar, double dt, double v_current);

/// One exact CIR draw; always >= 0.
double cir_exact_step(RngStream& stream, const CirTransition& transition);

/// Log-price coefficients of the single-factor scheme:
/// x' = x + c0 + c1 v + c2 v' + sqrt(c3 v) Z.
struct AesHestonConstants {
  double c0, c1, c2, c3;
};
AesHestonConstants aes_heston_constants(const HestonParams& p, double dt);

/// x' = x + c0 + c1 v1 + c2 v2 + c3 v1' + c4 v2' + sqrt(c5 v1) Z1 + sqrt(c6 v2) Z2.
struct AesDoubleHestonConstants {
  double c0, c1, c2, c3, c4, c5, c6;
};
AesDoubleHestonConstants aes_double_heston_constants(const DoubleHestonParams& p, double dt);

enum class Scheme { Aes, Euler };

std::string_view to_string(Scheme scheme);
/// Accepts "aes" or "euler" (case-insensitive); throws std::invalid_argument otherwise.
Scheme parse_scheme(std::string_view text);

// Path generators. Path i draws only from RngStream(seed, i), so results are
// bit-identical for any worker count (0 = default). Per-step draw order:
//   AES Heston:          chi2, Z
//   AES double Heston:   chi2_1, chi2_2, Z_1, Z_2
//   Euler Heston:        Z_v, Z_x
//   Euler double Heston: Z_v1, Z_v2, Z_x1, Z_x2

PathSet simulate_aes_heston(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, std::size_t workers = 0, std::vector<std::size_t> stored_steps = {});
PathSet simulate_aes_double_heston(const DoubleHestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                                   std::uint64_t seed, std::size_t workers = 0, std::vector<std::size_t> stored_steps = {});

/// Truncated Euler: v' = (v + kappa (nu_bar - v) dt + gamma sqrt(v dt) Z_v)^+, with
/// log-Euler for the asset driven by rho Z_v + sqrt(1 - rho^2) Z_x.
PathSet simulate_euler_heston(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, std::size_t workers = 0, std::vector<std::size_t> stored_steps = {});
PathSet simulate_euler_double_heston(const DoubleHestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                                     std::uint64_t seed, std::size_t workers = 0, std::vector<std::size_t> stored_steps = {});

PathSet simulate(const ModelParams& params, Scheme scheme, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed, std::size_t workers = 0, std::vector<std::size_t> stored_steps = {});

/// CSV dump with header `path,step,asset,var1[,var2]`, stored steps only.
void write_paths_csv(const PathSet& paths, std::ostream& out);

}  // namespace aesprice
