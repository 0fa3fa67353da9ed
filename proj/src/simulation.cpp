#include "aesprice/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

#include "aesprice/distributions.hpp"
#include "aesprice/parallel.hpp"

namespace aesprice {

TimeGrid::TimeGrid(double maturity, std::size_t steps) : maturity_(maturity), steps_(steps) {
  if (!(maturity > 0.0) || !std::isfinite(maturity)) {
    throw std::invalid_argument("time grid: maturity must be positive");
  }
  if (steps == 0) throw std::invalid_argument("time grid: steps must be at least 1");
  dt_ = maturity / static_cast<double>(steps);
}

PathSet::PathSet(TimeGrid grid, std::size_t n_paths, ModelKind kind, std::vector<std::size_t> stored_steps)
    : grid_(grid), n_paths_(n_paths), kind_(kind), stored_steps_(std::move(stored_steps)) {
  if (n_paths == 0) throw std::invalid_argument("path set: n_paths must be at least 1");
  const std::size_t m = grid.steps();
  if (stored_steps_.empty()) {
    stored_steps_.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) stored_steps_[k] = k;
  }
  if (stored_steps_.front() != 0 || stored_steps_.back() != m) {
    throw std::invalid_argument("path set: stored steps must include 0 and the maturity");
  }
  slot_.assign(m + 1, kNotStored);
  for (std::size_t j = 0; j < stored_steps_.size(); ++j) {
    if (j > 0 && stored_steps_[j] <= stored_steps_[j - 1]) {
      throw std::invalid_argument("path set: stored steps must be strictly increasing");
    }
    slot_[stored_steps_[j]] = j;
  }
  const std::size_t size = n_paths * stored_steps_.size();
  asset_.resize(size);
  variance1_.resize(size);
  if (kind == ModelKind::DoubleHeston) variance2_.resize(size);
}

std::size_t PathSet::slot(std::size_t step) const {
  if (!stores(step)) throw std::out_of_range("path set: step " + std::to_string(step) + " is not stored");
  return slot_[step];
}

std::span<const double> PathSet::variance2(std::size_t step) const {
  if (!has_second_variance()) return {};
  return column(variance2_, step);
}

std::span<double> PathSet::variance2(std::size_t step) {
  if (!has_second_variance()) return {};
  return column(variance2_, step);
}

std::size_t PathSet::memory_bytes() const {
  return (asset_.size() + variance1_.size() + variance2_.size()) * sizeof(double);
}

std::size_t PathSet::memory_model(std::size_t n_paths, std::size_t steps, ModelKind kind) {
  const std::size_t fields = kind == ModelKind::DoubleHeston ? 3 : 2;
  return fields * n_paths * (steps + 1) * sizeof(double);
}

CirTransition cir_transition_params(double kappa, double gamma, double nu_bar, double dt, double v_current) {
  if (!(dt > 0.0)) throw std::invalid_argument("CIR transition: dt must be positive");
  if (!(v_current >= 0.0)) throw std::invalid_argument("CIR transition: variance must be non-negative");
  const double decay = std::exp(-kappa * dt);
  const double one_minus = -std::expm1(-kappa * dt);
  const double g2 = gamma * gamma;
  return CirTransition{
      .c_bar = g2 * one_minus / (4.0 * kappa),
      .kappa_bar = 4.0 * kappa * decay * v_current / (g2 * one_minus),
      .dof = 4.0 * kappa * nu_bar / g2,
  };
}

double cir_exact_step(RngStream& stream, const CirTransition& transition) {
  return transition.c_bar * sample_noncentral_chisq(stream, {transition.dof, transition.kappa_bar});
}

AesHestonConstants aes_heston_constants(const HestonParams& p, double dt) {
  const double rho_over_gamma = p.rho / p.gamma;
  return AesHestonConstants{
      .c0 = (p.r - rho_over_gamma * p.kappa * p.nu_bar) * dt,
      .c1 = (rho_over_gamma * p.kappa - 0.5) * dt - rho_over_gamma,
      .c2 = rho_over_gamma,
      .c3 = (1.0 - p.rho * p.rho) * dt,
  };
}

AesDoubleHestonConstants aes_double_heston_constants(const DoubleHestonParams& p, double dt) {
  const auto& f1 = p.factor1;
  const auto& f2 = p.factor2;
  const double a1 = p.rho_13 / f1.gamma;
  const double a2 = p.rho_24 / f2.gamma;
  return AesDoubleHestonConstants{
      .c0 = (p.r - a1 * f1.kappa * f1.nu_bar - a2 * f2.kappa * f2.nu_bar) * dt,
      .c1 = (a1 * f1.kappa - 0.5) * dt - a1,
      .c2 = (a2 * f2.kappa - 0.5) * dt - a2,
      .c3 = a1,
      .c4 = a2,
      .c5 = (1.0 - p.rho_13 * p.rho_13) * dt,
      .c6 = (1.0 - p.rho_24 * p.rho_24) * dt,
  };
}

std::string_view to_string(Scheme scheme) { return scheme == Scheme::Aes ? "aes" : "euler"; }

Scheme parse_scheme(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "aes") return Scheme::Aes;
  if (lower == "euler") return Scheme::Euler;
  throw std::invalid_argument("unknown scheme '" + std::string(text) + "' (expected aes or euler)");
}

namespace {

// Exact CIR stepper with the step-invariant pieces hoisted out of the path loop.
class CirStepper {
 public:
  CirStepper(const VarianceFactor& f, double dt) {
    const CirTransition unit = cir_transition_params(f.kappa, f.gamma, f.nu_bar, dt, 1.0);
    c_bar_ = unit.c_bar;
    noncentrality_per_variance_ = unit.kappa_bar;
    dof_ = unit.dof;
  }

  double operator()(RngStream& stream, double v) const {
    return c_bar_ * sample_noncentral_chisq(stream, {dof_, noncentrality_per_variance_ * v});
  }

 private:
  double c_bar_;
  double noncentrality_per_variance_;
  double dof_;
};

class TruncatedEulerStepper {
 public:
  TruncatedEulerStepper(const VarianceFactor& f, double dt) : f_(f), dt_(dt), sqrt_dt_(std::sqrt(dt)) {}

  double operator()(double v, double z) const {
    const double next = v + f_.kappa * (f_.nu_bar - v) * dt_ + f_.gamma * std::sqrt(v) * sqrt_dt_ * z;
    return next > 0.0 ? next : 0.0;
  }

 private:
  VarianceFactor f_;
  double dt_;
  double sqrt_dt_;
};

VarianceFactor factor_of(const HestonParams& p) {
  return VarianceFactor{.v0 = p.v0, .kappa = p.kappa, .nu_bar = p.nu_bar, .gamma = p.gamma};
}

// Raw column pointers per grid step, null where the step is not stored.
struct Columns {
  std::vector<double*> asset, var1, var2;

  explicit Columns(PathSet& paths) {
    const std::size_t m = paths.grid().steps();
    asset.assign(m + 1, nullptr);
    var1.assign(m + 1, nullptr);
    var2.assign(m + 1, nullptr);
    for (std::size_t k : paths.stored_steps()) {
      asset[k] = paths.asset(k).data();
      var1[k] = paths.variance1(k).data();
      if (paths.has_second_variance()) var2[k] = paths.variance2(k).data();
    }
  }
};

void initialize(PathSet& paths, double s0, double v1, double v2) {
  std::ranges::fill(paths.asset(0), s0);
  std::ranges::fill(paths.variance1(0), v1);
  if (paths.has_second_variance()) std::ranges::fill(paths.variance2(0), v2);
}

}  // namespace

PathSet simulate_aes_heston(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                            std::uint64_t seed, std::size_t workers, std::vector<std::size_t> stored_steps) {
  validate(params);
  PathSet paths(grid, n_paths, ModelKind::Heston, std::move(stored_steps));
  const Columns out(paths);
  initialize(paths, params.s0, params.v0, 0.0);
  const std::size_t steps = grid.steps();
  const auto c = aes_heston_constants(params, grid.dt());
  const CirStepper cir(factor_of(params), grid.dt());
  const double x0 = std::log(params.s0);

  parallel_for(
      n_paths,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          RngStream stream(seed, i);
          double x = x0;
          double v = params.v0;
          for (std::size_t k = 0; k < steps; ++k) {
            const double v_next = cir(stream, v);
            const double z = sample_standard_normal(stream);
            x += c.c0 + c.c1 * v + c.c2 * v_next + std::sqrt(c.c3 * v) * z;
            v = v_next;
            if (double* a = out.asset[k + 1]) {
              a[i] = std::exp(x);
              out.var1[k + 1][i] = v;
            }
          }
        }
      },
      workers);
  return paths;
}

PathSet simulate_aes_double_heston(const DoubleHestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                                   std::uint64_t seed, std::size_t workers, std::vector<std::size_t> stored_steps) {
  validate(params);
  PathSet paths(grid, n_paths, ModelKind::DoubleHeston, std::move(stored_steps));
  const Columns out(paths);
  initialize(paths, params.s0, params.factor1.v0, params.factor2.v0);
  const std::size_t steps = grid.steps();
  const auto c = aes_double_heston_constants(params, grid.dt());
  const CirStepper cir1(params.factor1, grid.dt());
  const CirStepper cir2(params.factor2, grid.dt());
  const double x0 = std::log(params.s0);

  parallel_for(
      n_paths,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          RngStream stream(seed, i);
          double x = x0;
          double v1 = params.factor1.v0;
          double v2 = params.factor2.v0;
          for (std::size_t k = 0; k < steps; ++k) {
            const double v1_next = cir1(stream, v1);
            const double v2_next = cir2(stream, v2);
            const double z1 = sample_standard_normal(stream);
            const double z2 = sample_standard_normal(stream);
            x += c.c0 + c.c1 * v1 + c.c2 * v2 + c.c3 * v1_next + c.c4 * v2_next + std::sqrt(c.c5 * v1) * z1 +
                 std::sqrt(c.c6 * v2) * z2;
            v1 = v1_next;
            v2 = v2_next;
            if (double* a = out.asset[k + 1]) {
              a[i] = std::exp(x);
              out.var1[k + 1][i] = v1;
              out.var2[k + 1][i] = v2;
            }
          }
        }
      },
      workers);
  return paths;
}

PathSet simulate_euler_heston(const HestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                              std::uint64_t seed, std::size_t workers, std::vector<std::size_t> stored_steps) {
  validate(params);
  PathSet paths(grid, n_paths, ModelKind::Heston, std::move(stored_steps));
  const Columns out(paths);
  initialize(paths, params.s0, params.v0, 0.0);
  const std::size_t steps = grid.steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double rho = params.rho;
  const double rho_perp = std::sqrt(1.0 - rho * rho);
  const TruncatedEulerStepper variance_step(factor_of(params), dt);
  const double x0 = std::log(params.s0);

  parallel_for(
      n_paths,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          RngStream stream(seed, i);
          double x = x0;
          double v = params.v0;
          for (std::size_t k = 0; k < steps; ++k) {
            const double zv = sample_standard_normal(stream);
            const double zx = sample_standard_normal(stream);
            const double v_next = variance_step(v, zv);
            x += (params.r - 0.5 * v) * dt + std::sqrt(v) * sqrt_dt * (rho * zv + rho_perp * zx);
            v = v_next;
            if (double* a = out.asset[k + 1]) {
              a[i] = std::exp(x);
              out.var1[k + 1][i] = v;
            }
          }
        }
      },
      workers);
  return paths;
}

PathSet simulate_euler_double_heston(const DoubleHestonParams& params, const TimeGrid& grid, std::size_t n_paths,
                                     std::uint64_t seed, std::size_t workers, std::vector<std::size_t> stored_steps) {
  validate(params);
  PathSet paths(grid, n_paths, ModelKind::DoubleHeston, std::move(stored_steps));
  const Columns out(paths);
  initialize(paths, params.s0, params.factor1.v0, params.factor2.v0);
  const std::size_t steps = grid.steps();
  const double dt = grid.dt();
  const double sqrt_dt = std::sqrt(dt);
  const double rho1 = params.rho_13;
  const double rho2 = params.rho_24;
  const double rho1_perp = std::sqrt(1.0 - rho1 * rho1);
  const double rho2_perp = std::sqrt(1.0 - rho2 * rho2);
  const TruncatedEulerStepper step1(params.factor1, dt);
  const TruncatedEulerStepper step2(params.factor2, dt);
  const double x0 = std::log(params.s0);

  parallel_for(
      n_paths,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
          RngStream stream(seed, i);
          double x = x0;
          double v1 = params.factor1.v0;
          double v2 = params.factor2.v0;
          for (std::size_t k = 0; k < steps; ++k) {
            const double zv1 = sample_standard_normal(stream);
            const double zv2 = sample_standard_normal(stream);
            const double zx1 = sample_standard_normal(stream);
            const double zx2 = sample_standard_normal(stream);
            const double v1_next = step1(v1, zv1);
            const double v2_next = step2(v2, zv2);
            x += (params.r - 0.5 * (v1 + v2)) * dt + std::sqrt(v1) * sqrt_dt * (rho1 * zv1 + rho1_perp * zx1) +
                 std::sqrt(v2) * sqrt_dt * (rho2 * zv2 + rho2_perp * zx2);
            v1 = v1_next;
            v2 = v2_next;
            if (double* a = out.asset[k + 1]) {
              a[i] = std::exp(x);
              out.var1[k + 1][i] = v1;
              out.var2[k + 1][i] = v2;
            }
          }
        }
      },
      workers);
  return paths;
}

PathSet simulate(const ModelParams& params, Scheme scheme, const TimeGrid& grid, std::size_t n_paths,
                 std::uint64_t seed, std::size_t workers, std::vector<std::size_t> stored_steps) {
  auto stored = std::move(stored_steps);
  if (const auto* h = std::get_if<HestonParams>(&params)) {
    return scheme == Scheme::Aes ? simulate_aes_heston(*h, grid, n_paths, seed, workers, std::move(stored))
                                 : simulate_euler_heston(*h, grid, n_paths, seed, workers, std::move(stored));
  }
  const auto& d = std::get<DoubleHestonParams>(params);
  return scheme == Scheme::Aes ? simulate_aes_double_heston(d, grid, n_paths, seed, workers, std::move(stored))
                               : simulate_euler_double_heston(d, grid, n_paths, seed, workers, std::move(stored));
}

void write_paths_csv(const PathSet& paths, std::ostream& out) {
  const bool two = paths.has_second_variance();
  out << (two ? "path,step,asset,var1,var2\n" : "path,step,asset,var1\n");
  char buf[32];
  const auto num = [&](double x) { return std::string_view(buf, std::to_chars(buf, buf + sizeof(buf), x).ptr); };
  for (std::size_t i = 0; i < paths.n_paths(); ++i) {
    for (std::size_t k : paths.stored_steps()) {
      out << i << ',' << k << ',' << num(paths.asset(k)[i]);
      out << ',' << num(paths.variance1(k)[i]);
      if (two) out << ',' << num(paths.variance2(k)[i]);
      out << '\n';
    }
  }
}

}  // namespace aesprice
