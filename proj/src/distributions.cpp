#include "aesprice/distributions.hpp"

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aesprice {

void validate(const NoncentralChiSqParams& p) {
  if (!std::isfinite(p.dof) || p.dof <= 0.0) {
    throw std::invalid_argument("noncentral chi-squared: dof must be positive, got " + std::to_string(p.dof));
  }
  if (!std::isfinite(p.noncentrality) || p.noncentrality < 0.0) {
    throw std::invalid_argument("noncentral chi-squared: noncentrality must be non-negative, got " +
                                std::to_string(p.noncentrality));
  }
}

double sample_standard_normal(RngStream& stream) {
  boost::random::normal_distribution<double> normal;
  return normal(stream);
}

namespace {

// Marsaglia & Tsang (2000), valid for shape >= 1.
double gamma_unit_scale(RngStream& stream, double shape) {
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double z;
    double v;
    do {
      z = sample_standard_normal(stream);
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.uniform();
    const double z2 = z * z;
    if (u < 1.0 - 0.0331 * z2 * z2) {
      return d * v;
    }
    if (std::log(u) < 0.5 * z2 + d * (1.0 - v + std::log(v))) {
      return d * v;
    }
  }
}

}  // namespace

double sample_gamma(RngStream& stream, double shape, double scale) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("gamma: shape must be positive, got " + std::to_string(shape));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("gamma: scale must be positive, got " + std::to_string(scale));
  }
  if (shape >= 1.0) {
    return scale * gamma_unit_scale(stream, shape);
  }
  const double boosted = gamma_unit_scale(stream, shape + 1.0);
  const double u = stream.uniform();
  return scale * boosted * std::pow(u, 1.0 / shape);
}

std::uint64_t sample_poisson(RngStream& stream, double rate) {
  if (!std::isfinite(rate) || rate < 0.0) {
    throw std::invalid_argument("poisson: rate must be finite and non-negative, got " + std::to_string(rate));
  }
  if (rate == 0.0) {
    return 0;
  }
  boost::random::poisson_distribution<std::int64_t, double> poisson(rate);
  return static_cast<std::uint64_t>(poisson(stream));
}

double sample_noncentral_chisq(RngStream& stream, const NoncentralChiSqParams& p) {
  validate(p);
  const double mixing_rate = 0.5 * p.noncentrality;
  if (mixing_rate > kMaxPoissonMixingRate) {
    throw std::invalid_argument("noncentral chi-squared: noncentrality " + std::to_string(p.noncentrality) +
                                " exceeds the supported range (time step too small?)");
  }
  const std::uint64_t n = sample_poisson(stream, mixing_rate);
  const double shape = 0.5 * p.dof + static_cast<double>(n);
  return sample_gamma(stream, shape, 2.0);
}

}  // namespace aesprice
