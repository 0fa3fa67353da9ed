#pragma once

#include <cstdint>

#include "aesprice/rng.hpp"

namespace aesprice {

/// Largest Poisson mixing rate (lambda / 2) accepted by the noncentral
/// chi-squared sampler. Larger values indicate a mis-scaled time step.
inline constexpr double kMaxPoissonMixingRate = 1e9;

struct NoncentralChiSqParams {
  double dof;            // degrees of freedom, > 0
  double noncentrality;  // >= 0
};

/// Throws std::invalid_argument if dof <= 0, noncentrality < 0 or either is non-finite.
void validate(const NoncentralChiSqParams& p);

double sample_standard_normal(RngStream& stream);

/// Gamma(shape, scale) variate. Marsaglia-Tsang squeeze for shape >= 1; for
/// shape < 1 draws Gamma(shape + 1) and multiplies by U^(1/shape).
double sample_gamma(RngStream& stream, double shape, double scale);

/// Poisson(rate) variate; rate == 0 returns 0 without touching the stream.
std::uint64_t sample_poisson(RngStream& stream, double rate);

/// Noncentral chi-squared variate via the Poisson mixture of gammas:
/// N ~ Poisson(lambda / 2), X ~ Gamma((dof + 2N) / 2, 2).
/// Exact for every dof > 0, including dof < 1.
double sample_noncentral_chisq(RngStream& stream, const NoncentralChiSqParams& p);

}  // namespace aesprice
