#include "dreamespase/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dreamespase/errors.hpp"
#include "dreamespase/random.hpp"
#include "dreamespase/samplers.hpp"

namespace dreamespase::sim {

std::string to_string(SizeClass s) {
  switch (s) {
    case SizeClass::small:
      return "small";
    case SizeClass::medium:
      return "medium";
    case SizeClass::large:
      return "large";
    default:
      return "null";
  }
}

SimSetting SimSetting::for_ratio(double ratio) {
  SimSetting s;
  if (std::abs(ratio - 0.5) < 1e-9) {
    s.p = 50;
    s.fixed_per_size = s.random_per_size = 1;
  } else if (std::abs(ratio - 0.75) < 1e-9) {
    s.p = 75;
    s.fixed_per_size = s.random_per_size = 2;
  } else if (std::abs(ratio - 0.9) < 1e-9) {
    s.p = 90;
    s.fixed_per_size = s.random_per_size = 3;
  } else {
    throw ValidationError("ratio: expected 0.5, 0.75 or 0.9");
  }
  return s;
}

void SimSetting::validate() const {
  auto require = [](bool ok, const std::string& m) {
    if (!ok) throw ValidationError(m);
  };
  require(n_biopsies >= 1, "n_biopsies: must be at least 1");
  require(p >= 1, "p: must be at least 1");
  require(rows >= 1 && cols >= 1 && rows * cols >= 2, "lattice: needs at least two sub-regions");
  require(fixed_per_size >= 0 && random_per_size >= 0, "effect counts: must be non-negative");
  require(3 * (fixed_per_size + random_per_size) <= p, "effect counts: more true effects than covariates");
  for (const auto* ranges : {&fixed_ranges, &random_ranges}) {
    for (std::size_t k = 0; k < 3; ++k) {
      require((*ranges)[k].lo > 0.0 && (*ranges)[k].lo < (*ranges)[k].hi, "size ranges: must be positive and ordered");
      if (k > 0) require((*ranges)[k - 1].hi <= (*ranges)[k].lo, "size ranges: classes must be ordered");
    }
  }
  require(rho >= 0.0 && rho < 1.0, "rho: must lie in [0, 1)");
  require(tau2.has_value() == nu2.has_value(), "tau2, nu2: set both or neither");
  require(!tau2 || (*tau2 > 0.0 && *nu2 > 0.0), "tau2, nu2: must be positive");
  require(snr_fixed_window.lo > 0.0 && snr_fixed_window.lo <= snr_fixed_window.hi, "snr_fixed_window: bad range");
  require(snr_random_window.lo > 0.0 && snr_random_window.lo <= snr_random_window.hi, "snr_random_window: bad range");
}

double snr_fixed(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_x, double var_y) {
  if (!(var_y > 0.0)) throw DomainError("var_y must be positive");
  return alpha.dot(sigma_x * alpha) / var_y;
}

double mean_inverse_diagonal(const spatial::AdjacencyMatrix& adjacency, double c) {
  const Eigen::MatrixXd q(adjacency.car_structure(c));
  const Eigen::LLT<Eigen::MatrixXd> llt(q);
  if (llt.info() != Eigen::Success) throw NumericalError("CAR structure matrix is not positive definite");
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(q.rows(), q.cols()));
  return inv.diagonal().mean();
}

double snr_random(const Eigen::VectorXd& psi2, double phi, const spatial::AdjacencyMatrix& adjacency,
                  const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma2, double var_y) {
  if (!(var_y > 0.0)) throw DomainError("var_y must be positive");
  if (adjacency.has_isolated_nodes()) throw NumericalError("adjacency has an isolated sub-region");
  const double diag = mean_inverse_diagonal(adjacency, phi);
  double total = 0.0;
  for (Eigen::Index k = 0; k < psi2.size(); ++k) total += psi2[k] * (mu[k] * mu[k] + sigma2[k]);
  return diag * total / var_y;
}

namespace {

struct Effects {
  GroundTruth truth;
  double signal_fixed = 0.0;  // alpha' alpha
  double psi2_sum = 0.0;
};

Effects draw_effects(const SimSetting& s, Rng& rng) {
  Effects e;
  auto& t = e.truth;
  t.alpha = Eigen::VectorXd::Zero(s.p);
  t.psi2 = Eigen::VectorXd::Zero(s.p);
  t.fixed_size.assign(s.p, SizeClass::null_effect);
  t.random_size.assign(s.p, SizeClass::null_effect);
  std::vector<int> order(s.p);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const SizeClass classes[3] = {SizeClass::small, SizeClass::medium, SizeClass::large};
  std::size_t next = 0;
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < s.fixed_per_size; ++k) {
      const int j = order[next++];
      const auto r = s.fixed_ranges[c];
      const double magnitude = r.lo + samplers::open_uniform(rng) * (r.hi - r.lo);
      t.alpha[j] = samplers::open_uniform(rng) < 0.5 ? -magnitude : magnitude;
      t.fixed_size[j] = classes[c];
      t.fixed_index.push_back(j);
    }
  }
  for (int c = 0; c < 3; ++c) {
    for (int k = 0; k < s.random_per_size; ++k) {
      const int j = order[next++];
      const auto r = s.random_ranges[c];
      t.psi2[j] = r.lo + samplers::open_uniform(rng) * (r.hi - r.lo);
      t.random_size[j] = classes[c];
      t.random_index.push_back(j);
    }
  }
  std::sort(t.fixed_index.begin(), t.fixed_index.end());
  std::sort(t.random_index.begin(), t.random_index.end());
  e.signal_fixed = t.alpha.squaredNorm();
  e.psi2_sum = t.psi2.sum();
  return e;
}

}  // namespace

SimulatedDataset simulate_dataset(const SimSetting& s) {
  s.validate();
  Rng rng(derive_seed(s.seed, "simulate/effects"));
  const auto lattice = spatial::build_lattice_adjacency(s.rows, s.cols);
  const double lo_ratio = s.snr_random_window.lo / s.snr_fixed_window.hi;
  const double hi_ratio = s.snr_random_window.hi / s.snr_fixed_window.lo;
  const double target_ratio = 0.5 * (lo_ratio + hi_ratio);
  constexpr double kPhiMax = 0.95;

  // Signal ratio S_r / S_f as a function of the covariate-effect correlation.
  Effects effects;
  Calibration cal;
  cal.rho = s.rho;
  for (;;) {
    effects = draw_effects(s, rng);
    const double sf = effects.signal_fixed;
    auto ratio = [&](double phi) { return effects.psi2_sum * mean_inverse_diagonal(lattice, phi) / sf; };
    if (sf <= 0.0 || effects.psi2_sum <= 0.0) {
      // One of the two components is absent; only the other window applies.
      cal.phi = 0.0;
      break;
    }
    const double r0 = ratio(0.0);
    const double r1 = ratio(kPhiMax);
    if (r0 > hi_ratio || r1 < lo_ratio) {
      if (++cal.redraws > 1000) throw NumericalError("SNR windows unreachable for these effect ranges");
      continue;
    }
    if (r0 >= target_ratio) {
      cal.phi = 0.0;
    } else if (r1 <= target_ratio) {
      cal.phi = kPhiMax;
    } else {
      double a = 0.0;
      double b = kPhiMax;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        (ratio(m) < target_ratio ? a : b) = m;
      }
      cal.phi = 0.5 * (a + b);
    }
    break;
  }
  auto& truth = effects.truth;
  const double sf = effects.signal_fixed;
  const double sr = effects.psi2_sum * mean_inverse_diagonal(lattice, cal.phi);

  // var(Y) window satisfying both SNR windows; take its midpoint.
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  if (sf > 0.0) {
    lo = std::max(lo, sf / s.snr_fixed_window.hi);
    hi = std::min(hi, sf / s.snr_fixed_window.lo);
  }
  if (sr > 0.0) {
    lo = std::max(lo, sr / s.snr_random_window.hi);
    hi = std::min(hi, sr / s.snr_random_window.lo);
  }
  if (!std::isfinite(hi)) {
    lo = hi = 2.0;  // no true effects: unit noise split
  }
  if (s.tau2 && s.nu2) {
    cal.tau2 = *s.tau2;
    cal.nu2 = *s.nu2;
    cal.var_y = sf + sr + cal.tau2 * mean_inverse_diagonal(lattice, s.rho) + cal.nu2;
  } else {
    cal.var_y = 0.5 * (lo + hi);
    const double remainder = cal.var_y - sf - sr;
    if (!(remainder > 0.0)) throw NumericalError("SNR calibration leaves no residual variance");
    cal.nu2 = 0.5 * remainder;
    cal.tau2 = 0.5 * remainder / mean_inverse_diagonal(lattice, s.rho);
  }
  cal.snr_fixed = sf / cal.var_y;
  cal.snr_random = sr / cal.var_y;

  SimulatedDataset out;
  out.truth = truth;
  out.calibration = cal;
  const spatial::CarPrecision delta_prec(lattice, s.rho, cal.tau2);
  std::vector<spatial::CarPrecision> eta_prec;
  for (int j : truth.random_index) eta_prec.emplace_back(lattice, cal.phi, truth.psi2[j]);

  Rng data_rng(derive_seed(s.seed, "simulate/data"));
  std::normal_distribution<double> normal;
  const int n = lattice.n();
  for (int i = 0; i < s.n_biopsies; ++i) {
    spatial::BiopsyGraph b;
    b.id = "b" + std::to_string(i + 1);
    b.adjacency = lattice;
    b.x.resize(s.p);
    for (auto& v : b.x) v = normal(data_rng);
    b.y = Eigen::VectorXd::Constant(n, b.x.dot(truth.alpha));
    for (std::size_t k = 0; k < truth.random_index.size(); ++k) {
      b.y += spatial::sample_car(eta_prec[k], data_rng) * b.x[truth.random_index[k]];
    }
    b.y += spatial::sample_car(delta_prec, data_rng);
    for (auto& v : b.y) v += std::sqrt(cal.nu2) * normal(data_rng);
    out.biopsies.push_back(std::move(b));
  }
  return out;
}

}  // namespace dreamespase::sim
