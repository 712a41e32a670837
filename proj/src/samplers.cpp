#include "dreamespase/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "dreamespase/errors.hpp"

namespace dreamespase::samplers {

double open_uniform(Rng& rng) {
  // 53 random bits shifted to the cell centre: never exactly 0 or 1.
  const auto k = static_cast<double>(rng() >> 11);
  return (k + 0.5) * 0x1.0p-53;
}

namespace {

// Mode of y^{lambda-1} exp(-omega/2 (y + 1/y)).
double gig_mode(double lambda, double omega) {
  if (lambda >= 1.0) {
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  }
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// Ratio-of-uniforms with mode shift; valid for lambda >= 1 or omega large.
double gig_rou_shift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // Bounding rectangle from the roots of a depressed cubic.
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double arg = std::clamp(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)), -1.0, 1.0);
  const double fi = std::acos(arg);
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + open_uniform(rng) * (uplus - uminus);
    const double v = open_uniform(rng);
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Ratio-of-uniforms without shift; lambda in [0, 1], omega moderate.
double gig_rou_noshift(double lambda, double omega, Rng& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);

  for (;;) {
    const double u = um * open_uniform(rng);
    const double v = open_uniform(rng);
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

// Three-region rejection for small omega and lambda in [0, 1).
double gig_small_omega(double lambda, double omega, Rng& rng) {
  const double xm = gig_mode(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  area[0] = k0 * x0;

  double k1 = 0.0;
  double k2 = 0.0;
  if (x0 >= 2.0 / omega) {
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = (lambda == 0.0)
                  ? k1 * std::log(2.0 / (omega * omega))
                  : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];

  for (;;) {
    double v = total * open_uniform(rng);
    double x = 0.0;
    double hx = 0.0;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double lo = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * lo) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = open_uniform(rng) * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace

double sample_gig(const GigParams& params, Rng& rng) {
  if (!(params.a > 0.0) || !(params.b > 0.0) || !std::isfinite(params.a) ||
      !std::isfinite(params.b) || !std::isfinite(params.c)) {
    throw DomainError("GIG requires finite a > 0 and b > 0");
  }
  // x = alpha * y with y ~ GIG(lambda, omega, omega); negative lambda via 1/y.
  const double omega = std::sqrt(params.a * params.b);
  const double alpha = std::sqrt(params.b / params.a);
  const double lambda = std::abs(params.c);

  double y = 0.0;
  if (lambda > 2.0 || omega > 3.0) {
    y = gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = gig_rou_noshift(lambda, omega, rng);
  } else {
    y = gig_small_omega(lambda, omega, rng);
  }
  return params.c < 0.0 ? alpha / y : alpha * y;
}

std::size_t gumbel_max_categorical(std::span<const double> log_weights, Rng& rng) {
  if (log_weights.empty()) throw DomainError("categorical draw over an empty set");
  std::size_t best = log_weights.size();
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < log_weights.size(); ++j) {
    const double w = log_weights[j];
    if (std::isnan(w) || w == std::numeric_limits<double>::infinity()) {
      throw DomainError("categorical log-weights must be finite or -inf");
    }
    // Draw the noise for every slot so stream consumption is independent of the weights.
    const double g = -std::log(-std::log(open_uniform(rng)));
    if (w == -std::numeric_limits<double>::infinity()) continue;
    if (best == log_weights.size() || w + g > best_value) {
      best = j;
      best_value = w + g;
    }
  }
  if (best == log_weights.size()) throw DomainError("every categorical log-weight is -inf");
  return best;
}

double sample_half_normal(double sd, Rng& rng) {
  std::normal_distribution<double> normal;
  return std::abs(normal(rng)) * sd;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("inverse gamma requires shape, rate > 0");
  std::gamma_distribution<double> gamma(shape, 1.0 / rate);
  double g = gamma(rng);
  while (g <= 0.0) g = gamma(rng);
  return 1.0 / g;
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta requires a, b > 0");
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  const double x = ga(rng);
  const double y = gb(rng);
  return x / (x + y);
}

}  // namespace dreamespase::samplers
