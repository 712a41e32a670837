#include "dreamespase/gibbs.hpp"

#include <Eigen/Eigenvalues>
#include <boost/random/normal_distribution.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "dreamespase/errors.hpp"
#include "dreamespase/samplers.hpp"

namespace dreamespase::gibbs {

namespace {

constexpr double kFloor = 1e-12;

double log_normal_pdf(double x, double var) {
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * x * x / var;
}

double log_half_normal_pdf(double x, double var) {
  return std::log(2.0) + log_normal_pdf(x, var);
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

RhoGrid RhoGrid::uniform(int k) {
  require(k >= 1, "rho_grid: uniform:K needs K >= 1");
  RhoGrid g;
  for (int i = 0; i < k; ++i) {
    g.values.push_back(static_cast<double>(i) / k);
    g.probs.push_back(1.0 / k);
  }
  return g;
}

RhoGrid RhoGrid::parse(const std::string& shorthand) {
  const std::string prefix = "uniform:";
  require(shorthand.rfind(prefix, 0) == 0, "rho_grid: expected \"uniform:K\", got \"" + shorthand + "\"");
  const std::string rest = shorthand.substr(prefix.size());
  std::size_t used = 0;
  int k = 0;
  try {
    k = std::stoi(rest, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == rest.size() && used > 0, "rho_grid: bad grid size in \"" + shorthand + "\"");
  return uniform(k);
}

void PriorConfig::validate() const {
  auto positive = [](double v, const char* name) {
    require(std::isfinite(v) && v > 0.0, std::string(name) + ": must be a positive number");
  };
  positive(sigma2_spike, "sigma2_spike");
  positive(sigma2_slab, "sigma2_slab");
  positive(xi2_spike, "xi2_spike");
  positive(xi2_slab, "xi2_slab");
  require(sigma2_spike < sigma2_slab, "sigma2_spike: must be smaller than sigma2_slab");
  require(xi2_spike < xi2_slab, "xi2_spike: must be smaller than xi2_slab");
  positive(a_tau, "a_tau");
  positive(b_tau, "b_tau");
  positive(a_nu, "a_nu");
  positive(b_nu, "b_nu");
  positive(beta_gamma_a, "beta_gamma_a");
  positive(beta_gamma_b, "beta_gamma_b");
  positive(beta_d_a, "beta_d_a");
  positive(beta_d_b, "beta_d_b");
  require(std::isfinite(phi) && std::abs(phi) < 1.0, "phi: must lie in (-1, 1)");
  const auto& v = rho_grid.values;
  const auto& pr = rho_grid.probs;
  require(!v.empty(), "rho_grid.values: must not be empty");
  require(v.size() == pr.size(), "rho_grid.probs: must have one entry per value");
  double total = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    require(std::isfinite(v[k]) && v[k] >= 0.0 && v[k] < 1.0,
            "rho_grid.values[" + std::to_string(k) + "]: must lie in [0, 1)");
    require(std::isfinite(pr[k]) && pr[k] >= 0.0,
            "rho_grid.probs[" + std::to_string(k) + "]: must be non-negative");
    total += pr[k];
  }
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
          "rho_grid.values: must be distinct");
  require(std::abs(total - 1.0) <= 1e-12, "rho_grid.probs: must sum to 1");
}

Variant parse_variant(const std::string& name) {
  if (name == "spatial") return Variant::spatial;
  if (name == "nsds") return Variant::nsds;
  throw ValidationError("variant: expected \"spatial\" or \"nsds\", got \"" + name + "\"");
}

std::string to_string(Variant v) { return v == Variant::spatial ? "spatial" : "nsds"; }

void Schedule::validate() const {
  require(iterations >= 1, "iterations: must be at least 1");
  require(burn_in >= 0 && burn_in < iterations, "burn_in: must lie in [0, iterations)");
  require(thin >= 1, "thin: must be at least 1");
}

std::vector<Eigen::VectorXd> residual(const ChainState& state, const std::vector<BiopsyGraph>& data,
                                      Component drop) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& b = data[i];
    Eigen::VectorXd r = b.y;
    if (drop != Component::fixed) r.array() -= b.x.dot(state.alpha);
    if (drop != Component::eta) r -= state.eta[i] * b.x;
    if (drop != Component::delta) r -= state.delta[i];
    out.push_back(std::move(r));
  }
  return out;
}

double log_likelihood(const ChainState& state, const std::vector<BiopsyGraph>& data) {
  double ll = 0.0;
  for (const auto& r : residual(state, data, Component::none)) {
    for (double e : r) ll += log_normal_pdf(e, state.nu2);
  }
  return ll;
}

// ---------------------------------------------------------------------------

namespace {

// Spectral form U diag(lambda) U' of one structure matrix.
struct Spectrum {
  Eigen::MatrixXd u;
  Eigen::VectorXd lambda;
};

Spectrum decompose(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw NumericalError("CAR structure matrix is not positive definite");
  }
  return {es.eigenvectors(), es.eigenvalues()};
}

struct Structure {
  spatial::AdjacencyMatrix adjacency;
  Eigen::VectorXd degree;
  spatial::SparseMatrix w;
  Spectrum eta;                    // D - phi W, or the identity for nsds
  std::vector<Spectrum> delta;     // D - v_k W per grid value
  std::vector<double> log_det;     // log det(D - v_k W)
};

}  // namespace

struct GibbsSampler::Impl {
  std::vector<BiopsyGraph> data;
  PriorConfig prior;
  Variant variant = Variant::spatial;
  Eigen::VectorXd center;
  Eigen::VectorXd scale;
  int p = 0;
  int total = 0;
  std::vector<Structure> structures;
  std::vector<int> structure_of;
  Eigen::MatrixXd xtnx;  // sum_i n_i x_i x_i'
  std::vector<double> rho_log_det;
  double var_y = 1.0;
  bool warned_floor = false;
  Eigen::VectorXd z_buffer;

  Eigen::VectorXd alpha;
  Eigen::VectorXi gamma;
  double p_gamma = 0.5;
  Eigen::VectorXd psi2;
  Eigen::VectorXi d;
  double p_d = 0.5;
  std::vector<Eigen::MatrixXd> eta_t;  // eigen coordinates of Structure::eta
  std::vector<Eigen::VectorXd> delta;
  double tau2 = 1.0;
  int rho_index = 0;
  double nu2 = 1.0;
  std::vector<Eigen::VectorXd> resid;  // Y - full mean

  const Structure& structure(std::size_t i) const { return structures[structure_of[i]]; }

  void build() {
    const int n_b = static_cast<int>(data.size());
    xtnx = Eigen::MatrixXd::Zero(p, p);
    for (int i = 0; i < n_b; ++i) {
      const auto& b = data[i];
      xtnx.noalias() += static_cast<double>(b.n()) * b.x * b.x.transpose();
      total += b.n();
      int found = -1;
      for (std::size_t s = 0; s < structures.size(); ++s) {
        if (structures[s].adjacency == b.adjacency) {
          found = static_cast<int>(s);
          break;
        }
      }
      if (found < 0) {
        structures.push_back(make_structure(b.adjacency));
        found = static_cast<int>(structures.size()) - 1;
      }
      structure_of.push_back(found);
    }
    const auto k_grid = prior.rho_grid.values.size();
    rho_log_det.assign(k_grid, 0.0);
    for (int i = 0; i < n_b; ++i) {
      for (std::size_t k = 0; k < k_grid; ++k) rho_log_det[k] += structure(i).log_det[k];
    }
    double sum = 0.0;
    double sum2 = 0.0;
    for (const auto& b : data) {
      sum += b.y.sum();
      sum2 += b.y.squaredNorm();
    }
    const double mean = sum / total;
    var_y = total > 1 ? (sum2 - total * mean * mean) / (total - 1) : 0.0;
    if (!(var_y > 0.0)) var_y = 1.0;
  }

  Structure make_structure(const spatial::AdjacencyMatrix& adj) const {
    Structure s;
    s.adjacency = adj;
    const int n = adj.n();
    s.degree.resize(n);
    for (int v = 0; v < n; ++v) s.degree[v] = adj.degrees()[v];
    s.w = adj.weights();
    if (variant == Variant::nsds) {
      s.eta = {Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Ones(n)};
    } else {
      s.eta = decompose(Eigen::MatrixXd(adj.car_structure(prior.phi)));
    }
    for (double v : prior.rho_grid.values) {
      s.delta.push_back(decompose(Eigen::MatrixXd(adj.car_structure(v))));
      s.log_det.push_back(spatial::CarPrecision(adj, v, 1.0).base_log_det());
    }
    return s;
  }

  void recompute_residual() {
    resid.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& b = data[i];
      Eigen::VectorXd eta_x = structure(i).eta.u * (eta_t[i] * b.x);
      resid[i] = b.y - eta_x - delta[i];
      resid[i].array() -= b.x.dot(alpha);
    }
  }

  // Draws column j of every eta block in eigen coordinates, where rt holds
  // U' times the residual of each biopsy.
  void eta_column(int j, std::vector<Eigen::VectorXd>& rt, Rng& rng) {
    boost::random::normal_distribution<double> normal;  // ziggurat; this loop dominates a sweep
    const double inv_s = 1.0 / std::max(psi2[j], kFloor);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double x = data[i].x[j];
      const auto& lambda = structure(i).eta.lambda;
      auto col = eta_t[i].col(j);
      auto& r = rt[i];
      const Eigen::Index n = r.size();
      z_buffer.resize(n);
      for (Eigen::Index k = 0; k < n; ++k) z_buffer[k] = normal(rng);
      r += x * col;
      const Eigen::ArrayXd prec = lambda.array() * inv_s + x * x / nu2;
      col = ((x / nu2) * r.array() / prec + z_buffer.array() / prec.sqrt()).matrix();
      r -= x * col;
    }
  }

  std::vector<Eigen::VectorXd> rotated_residual() const {
    std::vector<Eigen::VectorXd> rt(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) rt[i] = structure(i).eta.u.transpose() * resid[i];
    return rt;
  }

  void unrotate_residual(const std::vector<Eigen::VectorXd>& rt) {
    for (std::size_t i = 0; i < data.size(); ++i) resid[i] = structure(i).eta.u * rt[i];
  }

  // delta_i' (D - v W) delta_i split as dD - v dW.
  std::pair<double, double> delta_quadratics(std::size_t i) const {
    const auto& s = structure(i);
    const auto& dl = delta[i];
    const double dd = (s.degree.array() * dl.array().square()).sum();
    const double dw = dl.dot(s.w * dl);
    return {dd, dw};
  }
};

GibbsSampler::GibbsSampler(std::vector<BiopsyGraph> data, PriorConfig prior, Variant variant,
                           bool standardize)
    : impl_(std::make_unique<Impl>()) {
  prior.validate();
  require(!data.empty(), "data: at least one biopsy is required");
  const Eigen::Index p = data.front().x.size();
  require(p >= 1, "covariates: at least one covariate is required");
  for (const auto& b : data) {
    spatial::validate(b);
    require(b.x.size() == p, "biopsy " + b.id + ": expected " + std::to_string(p) + " covariates, got " +
                                 std::to_string(b.x.size()));
    if (b.adjacency.has_isolated_nodes()) {
      throw ValidationError("biopsy " + b.id + ": sub-region " +
                            std::to_string(b.adjacency.isolated_nodes().front()) +
                            " has no neighbours");
    }
  }
  auto& m = *impl_;
  m.prior = std::move(prior);
  m.variant = variant;
  m.p = static_cast<int>(p);
  m.center = Eigen::VectorXd::Zero(p);
  m.scale = Eigen::VectorXd::Ones(p);
  if (standardize) {
    require(data.size() >= 2, "standardize: needs at least two biopsies");
    const double nb = static_cast<double>(data.size());
    for (const auto& b : data) m.center += b.x;
    m.center /= nb;
    Eigen::VectorXd ss = Eigen::VectorXd::Zero(p);
    for (const auto& b : data) ss.array() += (b.x - m.center).array().square();
    m.scale = (ss / (nb - 1.0)).cwiseSqrt();
    for (Eigen::Index j = 0; j < p; ++j) {
      require(m.scale[j] > 0.0, "covariates: column " + std::to_string(j) +
                                    " is constant across biopsies and cannot be standardized");
    }
    for (auto& b : data) b.x = ((b.x - m.center).array() / m.scale.array()).matrix();
  }
  m.data = std::move(data);
  m.build();
  initialize();
}

GibbsSampler::~GibbsSampler() = default;
GibbsSampler::GibbsSampler(GibbsSampler&&) noexcept = default;
GibbsSampler& GibbsSampler::operator=(GibbsSampler&&) noexcept = default;

int GibbsSampler::p() const noexcept { return impl_->p; }
int GibbsSampler::biopsies() const noexcept { return static_cast<int>(impl_->data.size()); }
int GibbsSampler::total_subregions() const noexcept { return impl_->total; }
const PriorConfig& GibbsSampler::prior() const noexcept { return impl_->prior; }
Variant GibbsSampler::variant() const noexcept { return impl_->variant; }
const std::vector<BiopsyGraph>& GibbsSampler::data() const noexcept { return impl_->data; }
const Eigen::VectorXd& GibbsSampler::x_center() const noexcept { return impl_->center; }
const Eigen::VectorXd& GibbsSampler::x_scale() const noexcept { return impl_->scale; }
const std::vector<double>& GibbsSampler::rho_log_dets() const noexcept { return impl_->rho_log_det; }

void GibbsSampler::initialize() {
  auto& m = *impl_;
  m.alpha = Eigen::VectorXd::Zero(m.p);
  m.gamma = Eigen::VectorXi::Zero(m.p);
  m.d = Eigen::VectorXi::Zero(m.p);
  m.p_gamma = 0.5;
  m.p_d = 0.5;
  m.psi2 = Eigen::VectorXd::Constant(m.p, m.prior.xi2_spike);
  m.eta_t.clear();
  m.delta.clear();
  for (const auto& b : m.data) {
    m.eta_t.push_back(Eigen::MatrixXd::Zero(b.n(), m.p));
    m.delta.push_back(Eigen::VectorXd::Zero(b.n()));
  }
  m.tau2 = m.var_y;
  m.nu2 = m.var_y;
  const auto& v = m.prior.rho_grid.values;
  m.rho_index = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  m.recompute_residual();
}

void GibbsSampler::set_state(const ChainState& s) {
  auto& m = *impl_;
  const auto p = m.p;
  require(s.alpha.size() == p && s.gamma.size() == p && s.psi2.size() == p && s.d.size() == p,
          "state: per-covariate vectors must have length p");
  require(s.eta.size() == m.data.size() && s.delta.size() == m.data.size(),
          "state: one eta block and one delta vector per biopsy");
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    require(s.eta[i].rows() == m.data[i].n() && s.eta[i].cols() == p,
            "state: eta block " + std::to_string(i) + " has the wrong shape");
    require(s.delta[i].size() == m.data[i].n(),
            "state: delta vector " + std::to_string(i) + " has the wrong length");
  }
  require(s.tau2 > 0.0 && s.nu2 > 0.0 && (s.psi2.array() > 0.0).all(), "state: variances must be positive");
  require(s.rho_index >= 0 && s.rho_index < static_cast<int>(m.prior.rho_grid.values.size()),
          "state: rho_index outside the grid");
  m.alpha = s.alpha;
  m.gamma = s.gamma;
  m.p_gamma = s.p_gamma;
  m.psi2 = s.psi2;
  m.d = s.d;
  m.p_d = s.p_d;
  m.tau2 = s.tau2;
  m.rho_index = s.rho_index;
  m.nu2 = s.nu2;
  m.delta = s.delta;
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    m.eta_t[i] = m.structure(i).eta.u.transpose() * s.eta[i];
  }
  m.recompute_residual();
}

void GibbsSampler::set_outcomes(const std::vector<Eigen::VectorXd>& y) {
  auto& m = *impl_;
  require(y.size() == m.data.size(), "outcomes: one vector per biopsy");
  for (std::size_t i = 0; i < y.size(); ++i) {
    require(y[i].size() == m.data[i].n(), "outcomes: vector " + std::to_string(i) + " has the wrong length");
    require(y[i].allFinite(), "outcomes: non-finite value in biopsy " + m.data[i].id);
  }
  for (std::size_t i = 0; i < y.size(); ++i) m.data[i].y = y[i];
  m.recompute_residual();
}

ChainState GibbsSampler::state() const {
  const auto& m = *impl_;
  ChainState s;
  s.alpha = m.alpha;
  s.gamma = m.gamma;
  s.p_gamma = m.p_gamma;
  s.psi2 = m.psi2;
  s.d = m.d;
  s.p_d = m.p_d;
  for (std::size_t i = 0; i < m.data.size(); ++i) s.eta.push_back(m.structure(i).eta.u * m.eta_t[i]);
  s.delta = m.delta;
  s.tau2 = m.tau2;
  s.rho_index = m.rho_index;
  s.rho = m.prior.rho_grid.values[m.rho_index];
  s.nu2 = m.nu2;
  return s;
}

void GibbsSampler::update_alpha(Rng& rng) {
  auto& m = *impl_;
  Eigen::MatrixXd prec = m.xtnx / m.nu2;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.p);
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const auto& b = m.data[i];
    const double ybar = m.resid[i].mean() + b.x.dot(m.alpha);
    rhs += (b.n() * ybar / m.nu2) * b.x;
  }
  for (int j = 0; j < m.p; ++j) {
    prec(j, j) += 1.0 / (m.gamma[j] ? m.prior.sigma2_slab : m.prior.sigma2_spike);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  if (llt.info() != Eigen::Success) throw NumericalError("alpha: posterior precision is not positive definite");
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(m.p);
  for (auto& zi : z) zi = normal(rng);
  Eigen::VectorXd next = llt.solve(rhs) + llt.matrixU().solve(z);
  const Eigen::VectorXd change = next - m.alpha;
  for (std::size_t i = 0; i < m.data.size(); ++i) m.resid[i].array() -= m.data[i].x.dot(change);
  m.alpha = std::move(next);
}

void GibbsSampler::update_gamma(Rng& rng) {
  auto& m = *impl_;
  for (int j = 0; j < m.p; ++j) {
    const double slab = log_normal_pdf(m.alpha[j], m.prior.sigma2_slab) + std::log(m.p_gamma);
    const double spike = log_normal_pdf(m.alpha[j], m.prior.sigma2_spike) + std::log1p(-m.p_gamma);
    const double prob = 1.0 / (1.0 + std::exp(spike - slab));
    m.gamma[j] = samplers::open_uniform(rng) < prob ? 1 : 0;
  }
}

void GibbsSampler::update_p_gamma(Rng& rng) {
  auto& m = *impl_;
  const double on = m.gamma.sum();
  m.p_gamma = samplers::sample_beta(m.prior.beta_gamma_a + on, m.prior.beta_gamma_b + m.p - on, rng);
}

void GibbsSampler::update_eta(Rng& rng) {
  auto& m = *impl_;
  auto rt = m.rotated_residual();
  for (int j = 0; j < m.p; ++j) m.eta_column(j, rt, rng);
  m.unrotate_residual(rt);
}

void GibbsSampler::update_eta_column(int j, Rng& rng) {
  auto& m = *impl_;
  if (j < 0 || j >= m.p) throw DomainError("eta column out of range");
  auto rt = m.rotated_residual();
  m.eta_column(j, rt, rng);
  m.unrotate_residual(rt);
}

double GibbsSampler::psi2_quadratic(int j) const {
  const auto& m = *impl_;
  double b = 0.0;
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    b += (m.structure(i).eta.lambda.array() * m.eta_t[i].col(j).array().square()).sum();
  }
  return b;
}

void GibbsSampler::update_psi2(Rng& rng) {
  auto& m = *impl_;
  const double c = -0.5 * m.total + 0.5;
  for (int j = 0; j < m.p; ++j) {
    double b = psi2_quadratic(j);
    if (!(b > kFloor)) {
      if (!m.warned_floor) {
        spdlog::warn("psi2 update: eta column {} is numerically zero; flooring its quadratic form", j);
        m.warned_floor = true;
      }
      b = kFloor;
    }
    const double a = 1.0 / (m.d[j] ? m.prior.xi2_slab : m.prior.xi2_spike);
    m.psi2[j] = std::max(samplers::sample_gig({a, b, c}, rng), kFloor);
  }
}

void GibbsSampler::update_d(Rng& rng) {
  auto& m = *impl_;
  for (int j = 0; j < m.p; ++j) {
    const double psi = std::sqrt(m.psi2[j]);
    const double slab = log_half_normal_pdf(psi, m.prior.xi2_slab) + std::log(m.p_d);
    const double spike = log_half_normal_pdf(psi, m.prior.xi2_spike) + std::log1p(-m.p_d);
    const double prob = 1.0 / (1.0 + std::exp(spike - slab));
    m.d[j] = samplers::open_uniform(rng) < prob ? 1 : 0;
  }
}

void GibbsSampler::update_p_d(Rng& rng) {
  auto& m = *impl_;
  const double on = m.d.sum();
  m.p_d = samplers::sample_beta(m.prior.beta_d_a + on, m.prior.beta_d_b + m.p - on, rng);
}

void GibbsSampler::update_delta(Rng& rng) {
  auto& m = *impl_;
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const auto& spec = m.structure(i).delta[m.rho_index];
    Eigen::VectorXd r = m.resid[i] + m.delta[i];
    Eigen::VectorXd rt = spec.u.transpose() * r;
    for (Eigen::Index k = 0; k < rt.size(); ++k) {
      const double prec = spec.lambda[k] / m.tau2 + 1.0 / m.nu2;
      rt[k] = rt[k] / m.nu2 / prec + normal(rng) / std::sqrt(prec);
    }
    m.delta[i] = spec.u * rt;
    m.resid[i] = r - m.delta[i];
  }
}

void GibbsSampler::update_tau2(Rng& rng) {
  auto& m = *impl_;
  const double v = m.prior.rho_grid.values[m.rho_index];
  double quad = 0.0;
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const auto [dd, dw] = m.delta_quadratics(i);
    quad += dd - v * dw;
  }
  m.tau2 = samplers::sample_inverse_gamma(m.prior.a_tau + 0.5 * m.total, m.prior.b_tau + 0.5 * quad, rng);
}

std::vector<double> GibbsSampler::rho_log_weights() const {
  const auto& m = *impl_;
  double dd = 0.0;
  double dw = 0.0;
  for (std::size_t i = 0; i < m.data.size(); ++i) {
    const auto q = m.delta_quadratics(i);
    dd += q.first;
    dw += q.second;
  }
  const auto& grid = m.prior.rho_grid;
  std::vector<double> w(grid.values.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (grid.probs[k] <= 0.0) {
      w[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    w[k] = 0.5 * m.rho_log_det[k] - (dd - grid.values[k] * dw) / (2.0 * m.tau2) + std::log(grid.probs[k]);
  }
  return w;
}

void GibbsSampler::update_rho(Rng& rng) {
  const auto w = rho_log_weights();
  impl_->rho_index = static_cast<int>(samplers::gumbel_max_categorical(w, rng));
}

void GibbsSampler::update_nu2(Rng& rng) {
  auto& m = *impl_;
  double sse = 0.0;
  for (const auto& r : m.resid) sse += r.squaredNorm();
  m.nu2 = samplers::sample_inverse_gamma(m.prior.a_nu + 0.5 * m.total, m.prior.b_nu + 0.5 * sse, rng);
}

void GibbsSampler::sweep(Rng& rng) {
  update_alpha(rng);
  update_gamma(rng);
  update_p_gamma(rng);
  update_eta(rng);
  update_psi2(rng);
  update_d(rng);
  update_p_d(rng);
  update_delta(rng);
  update_tau2(rng);
  update_rho(rng);
  update_nu2(rng);
}

double GibbsSampler::log_likelihood() const {
  const auto& m = *impl_;
  double sse = 0.0;
  for (const auto& r : m.resid) sse += r.squaredNorm();
  return -0.5 * m.total * std::log(2.0 * std::numbers::pi * m.nu2) - 0.5 * sse / m.nu2;
}

std::vector<Eigen::VectorXd> GibbsSampler::full_residual() const { return impl_->resid; }

// ---------------------------------------------------------------------------

PosteriorSamples run_chain(std::vector<BiopsyGraph> data, const PriorConfig& prior,
                           const Schedule& schedule, Variant variant, bool standardize) {
  schedule.validate();
  GibbsSampler sampler(std::move(data), prior, variant, standardize);
  Rng rng(derive_seed(schedule.seed, "gibbs/chain"));
  const int p = sampler.p();
  const int kept = schedule.kept();

  PosteriorSamples out;
  out.schedule = schedule;
  out.variant = variant;
  out.p = p;
  out.alpha.resize(kept, p);
  out.gamma.resize(kept, p);
  out.psi2.resize(kept, p);
  out.d.resize(kept, p);
  out.loglik_trace.reserve(schedule.iterations);
  out.x_center = sampler.x_center();
  out.x_scale = sampler.x_scale();
  for (const auto& b : sampler.data()) {
    out.eta_mean.push_back(Eigen::MatrixXd::Zero(b.n(), p));
    out.delta_mean.push_back(Eigen::VectorXd::Zero(b.n()));
  }

  int row = 0;
  for (int t = 1; t <= schedule.iterations; ++t) {
    sampler.sweep(rng);
    const double ll = sampler.log_likelihood();
    if (!std::isfinite(ll)) {
      const auto s = sampler.state();
      std::ostringstream msg;
      msg << "non-finite log-likelihood at iteration " << t << " (nu2=" << s.nu2 << ", tau2=" << s.tau2
          << ", rho=" << s.rho << ", psi2 range [" << s.psi2.minCoeff() << ", " << s.psi2.maxCoeff()
          << "], |alpha|max=" << s.alpha.cwiseAbs().maxCoeff() << ")";
      throw NumericalError(msg.str());
    }
    out.loglik_trace.push_back(ll);
    if (t <= schedule.burn_in || (t - schedule.burn_in) % schedule.thin != 0 || row >= kept) continue;
    const auto s = sampler.state();
    out.alpha.row(row) = s.alpha.transpose();
    out.gamma.row(row) = s.gamma.transpose();
    out.psi2.row(row) = s.psi2.transpose();
    out.d.row(row) = s.d.transpose();
    out.p_gamma.push_back(s.p_gamma);
    out.p_d.push_back(s.p_d);
    out.tau2.push_back(s.tau2);
    out.rho.push_back(s.rho);
    out.nu2.push_back(s.nu2);
    out.loglik.push_back(ll);
    for (std::size_t i = 0; i < s.eta.size(); ++i) {
      out.eta_mean[i] += s.eta[i];
      out.delta_mean[i] += s.delta[i];
    }
    ++row;
  }
  if (kept > 0) {
    for (auto& e : out.eta_mean) e /= kept;
    for (auto& dl : out.delta_mean) dl /= kept;
  }
  return out;
}

// ---------------------------------------------------------------------------

double spectrum0_ar(const std::vector<double>& x) {
  const auto n = static_cast<int>(x.size());
  if (n < 2) throw DomainError("spectral estimate needs at least two values");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  const int max_order = std::min(n - 1, static_cast<int>(std::floor(10.0 * std::log10(n))));
  std::vector<double> acov(max_order + 1, 0.0);
  for (int lag = 0; lag <= max_order; ++lag) {
    double s = 0.0;
    for (int t = lag; t < n; ++t) s += (x[t] - mean) * (x[t - lag] - mean);
    acov[lag] = s / n;
  }
  if (!(acov[0] > 0.0)) throw DomainError("spectral estimate of a constant series");

  // Levinson-Durbin over orders 0..max_order; keep the AIC-best fit.
  std::vector<double> phi;
  std::vector<double> best_phi;
  double var = acov[0];
  double best_var = var;
  double best_aic = n * std::log(var);
  for (int k = 1; k <= max_order; ++k) {
    double num = acov[k];
    for (int j = 0; j < k - 1; ++j) num -= phi[j] * acov[k - 1 - j];
    const double refl = num / var;
    std::vector<double> next(k);
    for (int j = 0; j < k - 1; ++j) next[j] = phi[j] - refl * phi[k - 2 - j];
    next[k - 1] = refl;
    phi = std::move(next);
    var *= (1.0 - refl * refl);
    if (!(var > 0.0)) break;
    const double aic = n * std::log(var) + 2.0 * k;
    if (aic < best_aic) {
      best_aic = aic;
      best_phi = phi;
      best_var = var;
    }
  }
  const int order = static_cast<int>(best_phi.size());
  const double var_pred = best_var * n / (n - (order + 1));
  double sum = 1.0;
  for (double a : best_phi) sum -= a;
  return var_pred / (sum * sum);
}

GewekeResult geweke_diagnostic(const std::vector<double>& trace, double frac_a, double frac_b) {
  if (trace.size() < 100) throw DomainError("Geweke diagnostic needs a trace of length >= 100");
  if (!(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0)) {
    throw DomainError("Geweke fractions must be positive and sum to at most 1");
  }
  const auto n = trace.size();
  const auto na = static_cast<std::size_t>(std::floor(frac_a * n));
  const auto nb = static_cast<std::size_t>(std::floor(frac_b * n));
  const std::vector<double> a(trace.begin(), trace.begin() + na);
  const std::vector<double> b(trace.end() - nb, trace.end());
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / v.size();
  };
  const double va = spectrum0_ar(a) / a.size();
  const double vb = spectrum0_ar(b) / b.size();
  GewekeResult r;
  r.z = (mean(a) - mean(b)) / std::sqrt(va + vb);
  r.p = std::erfc(std::abs(r.z) / std::numbers::sqrt2);
  return r;
}

SelectionReport summarize_selection(const PosteriorSamples& samples, double threshold) {
  const int kept = samples.kept();
  if (kept == 0) throw DomainError("selection summary needs at least one kept draw");
  SelectionReport r;
  r.threshold = threshold;
  for (int j = 0; j < samples.p; ++j) {
    r.names.push_back("x" + std::to_string(j + 1));
    const double pf = samples.gamma.col(j).cast<double>().mean();
    const double pr = samples.d.col(j).cast<double>().mean();
    r.fixed_probability.push_back(pf);
    r.random_probability.push_back(pr);
    r.alpha_mean.push_back(samples.alpha.col(j).mean());
    r.psi2_mean.push_back(samples.psi2.col(j).mean());
    r.fixed_selected.push_back(pf > threshold);
    r.random_selected.push_back(pr > threshold);
  }
  // Post-burn-in, unthinned.
  const auto skip = std::min<std::size_t>(samples.schedule.burn_in, samples.loglik_trace.size());
  const std::vector<double> trace(samples.loglik_trace.begin() + skip, samples.loglik_trace.end());
  if (trace.size() >= 100) {
    try {
      r.geweke = geweke_diagnostic(trace);
      r.has_geweke = true;
    } catch (const DomainError& e) {
      spdlog::warn("Geweke diagnostic unavailable: {}", e.what());
    }
  }
  return r;
}

}  // namespace dreamespase::gibbs
