#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dreamespase/random.hpp"
#include "dreamespase/spatial.hpp"

namespace dreamespase::gibbs {

using spatial::BiopsyGraph;

/// Discrete prior on the spatial correlation of the global CAR effect.
struct RhoGrid {
  std::vector<double> values;
  std::vector<double> probs;

  /// K equispaced values 0, 1/K, ..., (K-1)/K with equal mass.
  static RhoGrid uniform(int k);
  /// Parses "uniform:K".
  static RhoGrid parse(const std::string& shorthand);
};

struct PriorConfig {
  double sigma2_spike = 0.03;
  double sigma2_slab = 100.0;
  double xi2_spike = 0.01;
  double xi2_slab = 1.0;
  double a_tau = 0.001;
  double b_tau = 0.001;
  double a_nu = 0.001;
  double b_nu = 0.001;
  double phi = 0.3;
  RhoGrid rho_grid = RhoGrid::uniform(20);
  double beta_gamma_a = 1.0;
  double beta_gamma_b = 1.0;
  double beta_d_a = 1.0;
  double beta_d_b = 1.0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// spatial: covariate effects follow a CAR(phi) on each biopsy graph.
/// nsds: covariate effects use the identity structure (exchangeable).
enum class Variant { spatial, nsds };

Variant parse_variant(const std::string& name);
std::string to_string(Variant v);

struct ChainState {
  Eigen::VectorXd alpha;
  Eigen::VectorXi gamma;
  double p_gamma = 0.5;
  Eigen::VectorXd psi2;
  Eigen::VectorXi d;
  double p_d = 0.5;
  std::vector<Eigen::MatrixXd> eta;  // n_i x p
  std::vector<Eigen::VectorXd> delta;
  double tau2 = 1.0;
  int rho_index = 0;
  double rho = 0.0;
  double nu2 = 1.0;
};

/// Mean components of the outcome model that residual() can leave out.
enum class Component { none, fixed, eta, delta };

/// Y_i minus every mean component except the dropped one. Evaluated from
/// scratch, with the covariates exactly as given.
std::vector<Eigen::VectorXd> residual(const ChainState& state, const std::vector<BiopsyGraph>& data,
                                      Component drop);

/// Sum over sub-regions of log N(y; mean, nu2), covariates as given.
double log_likelihood(const ChainState& state, const std::vector<BiopsyGraph>& data);

struct Schedule {
  int iterations = 20000;
  int burn_in = 10000;
  int thin = 10;
  std::uint64_t seed = 1;

  int kept() const noexcept { return (iterations - burn_in) / thin; }
  void validate() const;
};

struct PosteriorSamples {
  Schedule schedule;
  Variant variant = Variant::spatial;
  int p = 0;
  Eigen::MatrixXd alpha;  // kept x p
  Eigen::MatrixXi gamma;
  Eigen::MatrixXd psi2;
  Eigen::MatrixXi d;
  std::vector<double> p_gamma;
  std::vector<double> p_d;
  std::vector<double> tau2;
  std::vector<double> rho;
  std::vector<double> nu2;
  std::vector<double> loglik;        // kept iterations
  std::vector<double> loglik_trace;  // every iteration
  std::vector<Eigen::MatrixXd> eta_mean;
  std::vector<Eigen::VectorXd> delta_mean;
  Eigen::VectorXd x_center;  // standardization applied before fitting
  Eigen::VectorXd x_scale;

  int kept() const noexcept { return static_cast<int>(tau2.size()); }
};

/// Data, priors and cached factorizations for one fit, plus the working
/// state of one chain. Each update draws from its exact full conditional
/// given the current values of everything else.
///
/// Biopsies sharing an adjacency structure share one eigendecomposition of
/// every CAR structure matrix; covariate effects are held in that eigenbasis
/// so per-column updates cost O(n_i).
class GibbsSampler {
 public:
  /// Validates everything up front. With standardize set, each covariate is
  /// centred and scaled to unit sample variance across biopsies.
  GibbsSampler(std::vector<BiopsyGraph> data, PriorConfig prior, Variant variant,
               bool standardize = true);
  ~GibbsSampler();
  GibbsSampler(GibbsSampler&&) noexcept;
  GibbsSampler& operator=(GibbsSampler&&) noexcept;

  int p() const noexcept;
  int biopsies() const noexcept;
  int total_subregions() const noexcept;
  const PriorConfig& prior() const noexcept;
  Variant variant() const noexcept;
  /// The data as the sampler sees it (after any standardization).
  const std::vector<BiopsyGraph>& data() const noexcept;
  const Eigen::VectorXd& x_center() const noexcept;
  const Eigen::VectorXd& x_scale() const noexcept;

  /// Deterministic start: alpha = 0, indicators 0, inclusion probabilities
  /// 0.5, eta = delta = 0, psi2 = xi2_spike, tau2 = nu2 = var(Y), rho at the
  /// smallest grid value.
  void initialize();
  /// Throws ValidationError on dimension mismatch or invalid values.
  void set_state(const ChainState& state);
  ChainState state() const;
  /// Replaces the outcomes (same shapes), keeping the current state.
  void set_outcomes(const std::vector<Eigen::VectorXd>& y);

  void update_alpha(Rng& rng);
  void update_gamma(Rng& rng);
  void update_p_gamma(Rng& rng);
  void update_eta(Rng& rng);
  void update_eta_column(int j, Rng& rng);
  void update_psi2(Rng& rng);
  void update_d(Rng& rng);
  void update_p_d(Rng& rng);
  void update_delta(Rng& rng);
  void update_tau2(Rng& rng);
  void update_rho(Rng& rng);
  void update_nu2(Rng& rng);
  /// alpha, gamma, P_gamma, eta, psi2, d, P_d, delta, tau2, rho, nu2.
  void sweep(Rng& rng);

  double log_likelihood() const;
  /// Unnormalized log posterior weight of each rho grid value.
  std::vector<double> rho_log_weights() const;
  /// log det(D_w - v_k W) summed over biopsies, one entry per grid value.
  const std::vector<double>& rho_log_dets() const noexcept;
  /// Rate parameter b of the psi2_j conditional: sum_i eta_ij' Q eta_ij.
  double psi2_quadratic(int j) const;
  /// Current full residual Y - mean, per biopsy.
  std::vector<Eigen::VectorXd> full_residual() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Runs one chain from the deterministic start.
PosteriorSamples run_chain(std::vector<BiopsyGraph> data, const PriorConfig& prior,
                           const Schedule& schedule, Variant variant, bool standardize = true);

struct GewekeResult {
  double z = 0.0;
  double p = 1.0;
};

/// Compares the means of the first frac_a and last frac_b of the trace using
/// autoregressive spectral estimates of their variances at frequency zero.
/// Throws DomainError for traces shorter than 100 or with zero variance.
GewekeResult geweke_diagnostic(const std::vector<double>& trace, double frac_a = 0.1,
                               double frac_b = 0.5);

/// Spectral density at frequency zero from the AIC-selected autoregressive fit.
double spectrum0_ar(const std::vector<double>& x);

struct SelectionReport {
  std::vector<std::string> names;
  std::vector<double> fixed_probability;
  std::vector<double> random_probability;
  std::vector<double> alpha_mean;
  std::vector<double> psi2_mean;
  std::vector<bool> fixed_selected;
  std::vector<bool> random_selected;
  double threshold = 0.5;
  GewekeResult geweke;
  bool has_geweke = false;
};

/// Inclusion probability is the mean of the indicator draws; a covariate is
/// selected when it strictly exceeds the threshold.
SelectionReport summarize_selection(const PosteriorSamples& samples, double threshold = 0.5);

}  // namespace dreamespase::gibbs
