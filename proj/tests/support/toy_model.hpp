#pragma once

// Brute-force oracles for the Gibbs sampler on tiny instances. Everything
// here is written from the model definition with dense linear algebra and
// shares no code with the sampler beyond the data types.

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dreamespase/gibbs.hpp"

namespace toy {

using dreamespase::Rng;
using dreamespase::gibbs::ChainState;
using dreamespase::gibbs::GibbsSampler;
using dreamespase::gibbs::PriorConfig;
using dreamespase::gibbs::Variant;
using dreamespase::spatial::AdjacencyMatrix;
using dreamespase::spatial::BiopsyGraph;
using dreamespase::spatial::Edge;

inline double log_normal(double x, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * x * x / var;
}

inline double log_inverse_gamma(double x, double a, double b) {
  return a * std::log(b) - std::lgamma(a) - (a + 1.0) * std::log(x) - b / x;
}

inline double log_beta_density(double x, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

/// D - c W assembled straight from the edge list.
inline Eigen::MatrixXd car_matrix(const AdjacencyMatrix& adj, double c) {
  const int n = adj.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : adj.edges()) {
    m(e.a, e.a) += 1.0;
    m(e.b, e.b) += 1.0;
    m(e.a, e.b) -= c;
    m(e.b, e.a) -= c;
  }
  return m;
}

/// log N(v; 0, precision^{-1}).
inline double mvn_log_density(const Eigen::VectorXd& v, const Eigen::MatrixXd& precision) {
  const double log_det = std::log(precision.determinant());
  return 0.5 * log_det - 0.5 * v.size() * std::log(2.0 * std::numbers::pi) - 0.5 * v.dot(precision * v);
}

/// One draw from N(0, precision^{-1}).
inline Eigen::VectorXd mvn_draw(const Eigen::MatrixXd& precision, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(precision.rows());
  for (auto& v : z) v = normal(rng);
  const Eigen::LLT<Eigen::MatrixXd> llt(precision);
  return llt.matrixU().solve(z);  // cov = (L L')^{-1}
}

/// Three biopsies: a 3-path, a 4-cycle and a triangle; p covariates.
inline std::vector<BiopsyGraph> make_data(int p, Rng& rng) {
  std::normal_distribution<double> normal;
  const std::vector<std::pair<int, std::vector<Edge>>> graphs{
      {3, {{0, 1}, {1, 2}}}, {4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}}, {3, {{0, 1}, {1, 2}, {0, 2}}}};
  std::vector<BiopsyGraph> data;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    BiopsyGraph b;
    b.id = "t" + std::to_string(i);
    b.adjacency = AdjacencyMatrix(graphs[i].first, graphs[i].second);
    b.y.resize(graphs[i].first);
    for (auto& v : b.y) v = normal(rng);
    b.x.resize(p);
    for (auto& v : b.x) v = normal(rng);
    data.push_back(std::move(b));
  }
  return data;
}

/// A fixed, unremarkable state to condition on.
inline ChainState make_state(const std::vector<BiopsyGraph>& data, const PriorConfig& prior, int p, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.2, 0.9);
  ChainState s;
  s.alpha.resize(p);
  s.gamma.resize(p);
  s.psi2.resize(p);
  s.d.resize(p);
  for (int j = 0; j < p; ++j) {
    s.alpha[j] = 0.5 * normal(rng);
    s.gamma[j] = j % 2;
    s.psi2[j] = j == 0 ? 0.02 : unif(rng);  // j = 0 keeps d_0 genuinely uncertain
    s.d[j] = (j + 1) % 2;
  }
  s.p_gamma = 0.4;
  s.p_d = 0.6;
  for (const auto& b : data) {
    Eigen::MatrixXd eta(b.n(), p);
    for (auto& v : eta.reshaped()) v = 0.5 * normal(rng);
    s.eta.push_back(eta);
    Eigen::VectorXd delta(b.n());
    for (auto& v : delta) v = 0.5 * normal(rng);
    s.delta.push_back(delta);
  }
  s.tau2 = 0.7;
  s.rho_index = static_cast<int>(prior.rho_grid.values.size() / 2);
  s.rho = prior.rho_grid.values[s.rho_index];
  s.nu2 = 0.5;
  return s;
}

inline Eigen::VectorXd mean_of(const ChainState& s, const BiopsyGraph& b, std::size_t i) {
  Eigen::VectorXd m = s.eta[i] * b.x + s.delta[i];
  m.array() += b.x.dot(s.alpha);
  return m;
}

/// Full log density of (Y, all parameters) written term by term.
inline double log_joint(const ChainState& s, const std::vector<BiopsyGraph>& data, const PriorConfig& pr,
                        Variant variant) {
  const auto p = s.alpha.size();
  double lp = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd r = data[i].y - mean_of(s, data[i], i);
    for (double e : r) lp += log_normal(e, s.nu2);
  }
  for (Eigen::Index j = 0; j < p; ++j) {
    lp += log_normal(s.alpha[j], s.gamma[j] ? pr.sigma2_slab : pr.sigma2_spike);
    lp += s.gamma[j] ? std::log(s.p_gamma) : std::log1p(-s.p_gamma);
    lp += s.d[j] ? std::log(s.p_d) : std::log1p(-s.p_d);
    // psi_j ~ half-normal(xi2); density of psi2 = psi_j^2 carries 1 / (2 psi_j)
    const double psi = std::sqrt(s.psi2[j]);
    lp += std::log(2.0) + log_normal(psi, s.d[j] ? pr.xi2_slab : pr.xi2_spike) - std::log(2.0 * psi);
  }
  lp += log_beta_density(s.p_gamma, pr.beta_gamma_a, pr.beta_gamma_b);
  lp += log_beta_density(s.p_d, pr.beta_d_a, pr.beta_d_b);
  const double rho = pr.rho_grid.values[s.rho_index];
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& adj = data[i].adjacency;
    const Eigen::MatrixXd q_eta =
        variant == Variant::nsds ? Eigen::MatrixXd::Identity(adj.n(), adj.n()) : car_matrix(adj, pr.phi);
    for (Eigen::Index j = 0; j < p; ++j) lp += mvn_log_density(s.eta[i].col(j), q_eta / s.psi2[j]);
    lp += mvn_log_density(s.delta[i], car_matrix(adj, rho) / s.tau2);
  }
  lp += log_inverse_gamma(s.tau2, pr.a_tau, pr.b_tau) + log_inverse_gamma(s.nu2, pr.a_nu, pr.b_nu);
  lp += std::log(pr.rho_grid.probs[s.rho_index]);
  return lp;
}

struct Gaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Reads the Gaussian off a log density that is quadratic in its argument,
/// using central differences (exact for quadratics up to rounding).
inline Gaussian gaussian_from_log_density(const std::function<double(const Eigen::VectorXd&)>& f, int dim) {
  const double h = 0.5;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(dim);
  const double f0 = f(zero);
  Eigen::MatrixXd hess(dim, dim);
  Eigen::VectorXd grad(dim);
  auto e = [&](int k) {
    Eigen::VectorXd v = zero;
    v[k] = h;
    return v;
  };
  for (int j = 0; j < dim; ++j) {
    grad[j] = (f(e(j)) - f(-e(j))) / (2.0 * h);
    for (int k = 0; k < dim; ++k) {
      hess(j, k) = (f(e(j) + e(k)) - f(e(j)) - f(e(k)) + f0) / (h * h);
    }
  }
  const Eigen::MatrixXd precision = -0.5 * (hess + hess.transpose());
  Gaussian g;
  g.cov = precision.inverse();
  g.mean = g.cov * grad;
  return g;
}

inline double normal_cdf(double x, double mean, double var) {
  return 0.5 * boost::math::erfc(-(x - mean) / std::sqrt(2.0 * var));
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, (k + 1) / n - f, f - k / n});
  }
  return d;
}

/// Largest gap between empirical and exact CDFs of a finite distribution.
inline double ks_discrete(const std::vector<int>& sample, const std::vector<double>& probs) {
  std::vector<double> freq(probs.size(), 0.0);
  for (int k : sample) freq[k] += 1.0 / static_cast<double>(sample.size());
  double d = 0.0;
  double fe = 0.0;
  double fp = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    fe += freq[k];
    fp += probs[k];
    d = std::max(d, std::abs(fe - fp));
  }
  return d;
}

/// Numerical CDF of an unnormalized scalar log density, tabulated on a fine
/// grid in a transformed coordinate (log for positive, logit for unit
/// interval parameters) and integrated by the trapezoid rule.
class GridCdf {
 public:
  enum class Support { positive, unit };

  GridCdf(const std::function<double(double)>& log_density, Support support, const std::vector<double>& sample,
          int points = 40001)
      : support_(support) {
    double lo = to_u(*std::min_element(sample.begin(), sample.end()));
    double hi = to_u(*std::max_element(sample.begin(), sample.end()));
    const double span = hi - lo;
    lo -= span + 1.0;
    hi += span + 1.0;
    u_.resize(points);
    std::vector<double> lg(points);
    double top = -INFINITY;
    for (int k = 0; k < points; ++k) {
      u_[k] = lo + (hi - lo) * k / (points - 1);
      const double x = from_u(u_[k]);
      const double jac = support_ == Support::positive ? std::log(x) : std::log(x) + std::log1p(-x);
      lg[k] = log_density(x) + jac;
      if (!std::isfinite(lg[k])) lg[k] = -INFINITY;
      top = std::max(top, lg[k]);
    }
    cdf_.assign(points, 0.0);
    for (int k = 1; k < points; ++k) {
      cdf_[k] = cdf_[k - 1] + 0.5 * (std::exp(lg[k - 1] - top) + std::exp(lg[k] - top)) * (u_[k] - u_[k - 1]);
    }
    for (auto& c : cdf_) c /= cdf_.back();
  }

  double operator()(double x) const {
    const double u = to_u(x);
    if (u <= u_.front()) return 0.0;
    if (u >= u_.back()) return 1.0;
    const auto it = std::upper_bound(u_.begin(), u_.end(), u);
    const auto k = static_cast<std::size_t>(it - u_.begin());
    const double t = (u - u_[k - 1]) / (u_[k] - u_[k - 1]);
    return cdf_[k - 1] + t * (cdf_[k] - cdf_[k - 1]);
  }

 private:
  double to_u(double x) const { return support_ == Support::positive ? std::log(x) : std::log(x / (1.0 - x)); }
  double from_u(double u) const { return support_ == Support::positive ? std::exp(u) : 1.0 / (1.0 + std::exp(-u)); }

  Support support_;
  std::vector<double> u_;
  std::vector<double> cdf_;
};

struct Check {
  std::string name;
  double ks = 0.0;
};

/// Repeatedly resets the sampler to s0, applies one update and compares the
/// distribution of the result with the brute-force conditional of
/// log_joint. Returns one KS distance per tested quantity.
inline std::vector<Check> conditional_checks(int draws, std::uint64_t seed, Variant variant = Variant::spatial) {
  Rng rng(seed);
  const int p = 2;
  PriorConfig prior;
  prior.rho_grid = dreamespase::gibbs::RhoGrid::uniform(5);
  const auto data = make_data(p, rng);
  const auto s0 = make_state(data, prior, p, rng);
  GibbsSampler sampler(data, prior, variant, false);
  auto lj = [&](const ChainState& s) { return log_joint(s, data, prior, variant); };

  auto collect = [&](const std::function<void(Rng&)>& update) {
    std::vector<ChainState> out;
    out.reserve(draws);
    for (int k = 0; k < draws; ++k) {
      sampler.set_state(s0);
      update(rng);
      out.push_back(sampler.state());
    }
    return out;
  };
  std::vector<Check> checks;

  auto gaussian_checks = [&](const std::string& name, const std::vector<ChainState>& got,
                             const std::function<void(ChainState&, const Eigen::VectorXd&)>& set,
                             const std::function<Eigen::VectorXd(const ChainState&)>& get, int dim) {
    const auto g = gaussian_from_log_density(
        [&](const Eigen::VectorXd& v) {
          auto s = s0;
          set(s, v);
          return lj(s);
        },
        dim);
    for (int k = 0; k <= dim; ++k) {
      // coordinates, then the sum of all coordinates
      Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
      if (k < dim) {
        w[k] = 1.0;
      } else {
        w.setOnes();
      }
      std::vector<double> xs;
      for (const auto& s : got) xs.push_back(w.dot(get(s)));
      const double m = w.dot(g.mean);
      const double var = w.dot(g.cov * w);
      checks.push_back({name + (k < dim ? "[" + std::to_string(k) + "]" : "[sum]"),
                        ks_statistic(xs, [&](double x) { return normal_cdf(x, m, var); })});
    }
  };

  auto scalar_check = [&](const std::string& name, const std::vector<double>& xs,
                          const std::function<void(ChainState&, double)>& set, GridCdf::Support support) {
    const GridCdf cdf(
        [&](double x) {
          auto s = s0;
          set(s, x);
          return lj(s);
        },
        support, xs);
    checks.push_back({name, ks_statistic(xs, cdf)});
  };

  auto binary_check = [&](const std::string& name, const std::vector<int>& xs,
                          const std::function<void(ChainState&, int)>& set) {
    auto s1 = s0;
    set(s1, 1);
    auto s0c = s0;
    set(s0c, 0);
    const double l1 = lj(s1);
    const double l0 = lj(s0c);
    const double p1 = 1.0 / (1.0 + std::exp(l0 - l1));
    checks.push_back({name, ks_discrete(xs, {1.0 - p1, p1})});
  };

  {
    const auto got = collect([&](Rng& r) { sampler.update_alpha(r); });
    gaussian_checks(
        "alpha", got, [](ChainState& s, const Eigen::VectorXd& v) { s.alpha = v; },
        [](const ChainState& s) { return s.alpha; }, p);
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_gamma(r); });
    for (int j = 0; j < p; ++j) {
      std::vector<int> xs;
      for (const auto& s : got) xs.push_back(s.gamma[j]);
      binary_check("gamma[" + std::to_string(j) + "]", xs, [j](ChainState& s, int v) { s.gamma[j] = v; });
    }
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_p_gamma(r); });
    std::vector<double> xs;
    for (const auto& s : got) xs.push_back(s.p_gamma);
    scalar_check("p_gamma", xs, [](ChainState& s, double v) { s.p_gamma = v; }, GridCdf::Support::unit);
  }
  for (int j = 0; j < p; ++j) {
    const auto got = collect([&](Rng& r) { sampler.update_eta_column(j, r); });
    for (std::size_t i = 0; i < data.size(); ++i) {
      gaussian_checks(
          "eta[" + std::to_string(i) + "][:," + std::to_string(j) + "]", got,
          [i, j](ChainState& s, const Eigen::VectorXd& v) { s.eta[i].col(j) = v; },
          [i, j](const ChainState& s) { return Eigen::VectorXd(s.eta[i].col(j)); }, data[i].n());
    }
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_psi2(r); });
    for (int j = 0; j < p; ++j) {
      std::vector<double> xs;
      for (const auto& s : got) xs.push_back(s.psi2[j]);
      scalar_check("psi2[" + std::to_string(j) + "]", xs, [j](ChainState& s, double v) { s.psi2[j] = v; },
                   GridCdf::Support::positive);
    }
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_d(r); });
    for (int j = 0; j < p; ++j) {
      std::vector<int> xs;
      for (const auto& s : got) xs.push_back(s.d[j]);
      binary_check("d[" + std::to_string(j) + "]", xs, [j](ChainState& s, int v) { s.d[j] = v; });
    }
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_p_d(r); });
    std::vector<double> xs;
    for (const auto& s : got) xs.push_back(s.p_d);
    scalar_check("p_d", xs, [](ChainState& s, double v) { s.p_d = v; }, GridCdf::Support::unit);
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_delta(r); });
    for (std::size_t i = 0; i < data.size(); ++i) {
      gaussian_checks(
          "delta[" + std::to_string(i) + "]", got, [i](ChainState& s, const Eigen::VectorXd& v) { s.delta[i] = v; },
          [i](const ChainState& s) { return s.delta[i]; }, data[i].n());
    }
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_tau2(r); });
    std::vector<double> xs;
    for (const auto& s : got) xs.push_back(s.tau2);
    scalar_check("tau2", xs, [](ChainState& s, double v) { s.tau2 = v; }, GridCdf::Support::positive);
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_rho(r); });
    std::vector<int> xs;
    for (const auto& s : got) xs.push_back(s.rho_index);
    const auto k = prior.rho_grid.values.size();
    std::vector<double> logw(k);
    for (std::size_t v = 0; v < k; ++v) {
      auto s = s0;
      s.rho_index = static_cast<int>(v);
      logw[v] = lj(s);
    }
    const double top = *std::max_element(logw.begin(), logw.end());
    std::vector<double> probs(k);
    double total = 0.0;
    for (std::size_t v = 0; v < k; ++v) total += probs[v] = std::exp(logw[v] - top);
    for (auto& q : probs) q /= total;
    checks.push_back({"rho", ks_discrete(xs, probs)});
  }
  {
    const auto got = collect([&](Rng& r) { sampler.update_nu2(r); });
    std::vector<double> xs;
    for (const auto& s : got) xs.push_back(s.nu2);
    scalar_check("nu2", xs, [](ChainState& s, double v) { s.nu2 = v; }, GridCdf::Support::positive);
  }
  return checks;
}

/// The toy model with proper priors, as used by the joint-kernel test.
inline PriorConfig proper_prior() {
  PriorConfig prior;
  prior.sigma2_slab = 4.0;
  prior.a_tau = prior.a_nu = 3.0;
  prior.b_tau = prior.b_nu = 2.0;
  prior.rho_grid = dreamespase::gibbs::RhoGrid::uniform(5);
  return prior;
}

inline ChainState draw_from_prior(const std::vector<BiopsyGraph>& data, const PriorConfig& pr, int p, Rng& rng) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto beta = [&](double a, double b) {
    const double x = std::gamma_distribution<double>(a, 1.0)(rng);
    const double y = std::gamma_distribution<double>(b, 1.0)(rng);
    return x / (x + y);
  };
  auto inv_gamma = [&](double a, double b) { return 1.0 / std::gamma_distribution<double>(a, 1.0 / b)(rng); };
  ChainState s;
  s.p_gamma = beta(pr.beta_gamma_a, pr.beta_gamma_b);
  s.p_d = beta(pr.beta_d_a, pr.beta_d_b);
  s.alpha.resize(p);
  s.gamma.resize(p);
  s.psi2.resize(p);
  s.d.resize(p);
  for (int j = 0; j < p; ++j) {
    s.gamma[j] = unif(rng) < s.p_gamma;
    s.alpha[j] = std::sqrt(s.gamma[j] ? pr.sigma2_slab : pr.sigma2_spike) * normal(rng);
    s.d[j] = unif(rng) < s.p_d;
    const double psi = std::sqrt(s.d[j] ? pr.xi2_slab : pr.xi2_spike) * std::abs(normal(rng));
    s.psi2[j] = psi * psi;
  }
  s.tau2 = inv_gamma(pr.a_tau, pr.b_tau);
  s.nu2 = inv_gamma(pr.a_nu, pr.b_nu);
  std::discrete_distribution<int> grid(pr.rho_grid.probs.begin(), pr.rho_grid.probs.end());
  s.rho_index = grid(rng);
  s.rho = pr.rho_grid.values[s.rho_index];
  for (const auto& b : data) {
    const Eigen::MatrixXd q_eta = car_matrix(b.adjacency, pr.phi);
    Eigen::MatrixXd eta(b.n(), p);
    for (int j = 0; j < p; ++j) eta.col(j) = mvn_draw(q_eta / s.psi2[j], rng);
    s.eta.push_back(eta);
    s.delta.push_back(mvn_draw(car_matrix(b.adjacency, s.rho) / s.tau2, rng));
  }
  return s;
}

inline std::vector<Eigen::VectorXd> draw_outcomes(const ChainState& s, const std::vector<BiopsyGraph>& data,
                                                  Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<Eigen::VectorXd> y;
  for (std::size_t i = 0; i < data.size(); ++i) {
    Eigen::VectorXd v = mean_of(s, data[i], i);
    for (auto& e : v) e += std::sqrt(s.nu2) * normal(rng);
    y.push_back(v);
  }
  return y;
}

/// Successive-conditional test with independent chains: each chain starts
/// from an exact prior draw and its simulated data, then alternates a full
/// sweep with a fresh draw of Y. The final parameters must follow the prior.
inline std::vector<Check> joint_kernel_checks(int chains, int cycles, std::uint64_t seed) {
  Rng rng(seed);
  const int p = 2;
  const auto prior = proper_prior();
  auto data = make_data(p, rng);
  GibbsSampler sampler(data, prior, Variant::spatial, false);

  std::vector<std::vector<double>> alpha(p), psi2(p);
  std::vector<double> tau2, nu2;
  for (int c = 0; c < chains; ++c) {
    auto s = draw_from_prior(data, prior, p, rng);
    sampler.set_outcomes(draw_outcomes(s, data, rng));
    sampler.set_state(s);
    for (int k = 0; k < cycles; ++k) {
      sampler.sweep(rng);
      s = sampler.state();
      sampler.set_outcomes(draw_outcomes(s, data, rng));
    }
    for (int j = 0; j < p; ++j) {
      alpha[j].push_back(s.alpha[j]);
      psi2[j].push_back(s.psi2[j]);
    }
    tau2.push_back(s.tau2);
    nu2.push_back(s.nu2);
  }

  // Prior marginals: P(gamma = 1) = E[P_gamma] = a / (a + b).
  const double pg = prior.beta_gamma_a / (prior.beta_gamma_a + prior.beta_gamma_b);
  const double pd = prior.beta_d_a / (prior.beta_d_a + prior.beta_d_b);
  auto alpha_cdf = [&](double x) {
    return pg * normal_cdf(x, 0.0, prior.sigma2_slab) + (1.0 - pg) * normal_cdf(x, 0.0, prior.sigma2_spike);
  };
  auto psi2_cdf = [&](double s) {
    const double r = std::sqrt(std::max(s, 0.0));
    return pd * boost::math::erf(r / std::sqrt(2.0 * prior.xi2_slab)) +
           (1.0 - pd) * boost::math::erf(r / std::sqrt(2.0 * prior.xi2_spike));
  };
  auto ig_cdf = [](double a, double b) {
    return [a, b](double x) { return x > 0.0 ? boost::math::gamma_q(a, b / x) : 0.0; };
  };

  std::vector<Check> checks;
  for (int j = 0; j < p; ++j) {
    checks.push_back({"alpha[" + std::to_string(j) + "]", ks_statistic(alpha[j], alpha_cdf)});
    checks.push_back({"psi2[" + std::to_string(j) + "]", ks_statistic(psi2[j], psi2_cdf)});
  }
  checks.push_back({"tau2", ks_statistic(tau2, ig_cdf(prior.a_tau, prior.b_tau))});
  checks.push_back({"nu2", ks_statistic(nu2, ig_cdf(prior.a_nu, prior.b_nu))});
  return checks;
}

}  // namespace toy
