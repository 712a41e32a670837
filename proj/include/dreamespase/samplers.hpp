#pragma once

#include <cstddef>
#include <span>

#include "dreamespase/random.hpp"

namespace dreamespase::samplers {

/// Generalized inverse Gaussian with density proportional to
/// x^{c-1} exp(-(a x + b / x) / 2) on (0, inf).
struct GigParams {
  double a = 1.0;
  double b = 1.0;
  double c = 0.0;
};

/// Exact GIG draw; throws DomainError unless a > 0 and b > 0.
/// Uses the Hormann-Leydold rejection family, which stays stable for |c| in
/// the thousands.
double sample_gig(const GigParams& params, Rng& rng);

/// argmax_j(log_weights[j] + Gumbel noise). -inf entries are never selected.
/// Throws DomainError if every entry is -inf, NaN or +inf is present, or the
/// input is empty.
std::size_t gumbel_max_categorical(std::span<const double> log_weights, Rng& rng);

/// |z| * sd for z standard normal.
double sample_half_normal(double sd, Rng& rng);

/// 1 / Gamma(shape, rate).
double sample_inverse_gamma(double shape, double rate, Rng& rng);

double sample_beta(double a, double b, Rng& rng);

/// Uniform on the open interval (0, 1).
double open_uniform(Rng& rng);

}  // namespace dreamespase::samplers
