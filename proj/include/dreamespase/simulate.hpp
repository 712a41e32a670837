#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dreamespase/spatial.hpp"

namespace dreamespase::sim {

enum class SizeClass { null_effect, small, medium, large };

std::string to_string(SizeClass s);

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct SimSetting {
  int n_biopsies = 200;
  int p = 50;
  int rows = 5;
  int cols = 5;
  int fixed_per_size = 1;   // true fixed effects in each size class
  int random_per_size = 1;  // true random effects in each size class
  std::array<Range, 3> fixed_ranges{{{0.13, 0.23}, {0.23, 0.33}, {0.33, 0.43}}};
  std::array<Range, 3> random_ranges{{{0.1, 0.2}, {0.2, 0.3}, {0.3, 0.4}}};
  double rho = 0.3;
  Range snr_fixed_window{0.37, 0.42};
  Range snr_random_window{0.38, 0.39};
  // When both are set they replace the calibrated noise variances.
  std::optional<double> tau2;
  std::optional<double> nu2;
  std::uint64_t seed = 1;

  /// The three simulation settings by relative dimensionality 2p/N
  /// (0.5, 0.75, 0.9) with N = 200.
  static SimSetting for_ratio(double ratio);
  void validate() const;
};

struct GroundTruth {
  Eigen::VectorXd alpha;
  Eigen::VectorXd psi2;
  std::vector<SizeClass> fixed_size;   // per covariate
  std::vector<SizeClass> random_size;  // per covariate
  std::vector<int> fixed_index;
  std::vector<int> random_index;
};

/// Generating values chosen so both SNRs land in their windows.
struct Calibration {
  double phi = 0.0;  // spatial correlation of the covariate effects
  double rho = 0.3;
  double tau2 = 0.0;
  double nu2 = 0.0;
  double var_y = 0.0;
  double snr_fixed = 0.0;
  double snr_random = 0.0;
  int redraws = 0;  // effect-size redraws needed to make the windows feasible
};

struct SimulatedDataset {
  std::vector<spatial::BiopsyGraph> biopsies;
  GroundTruth truth;
  Calibration calibration;
};

/// alpha' Sigma_x alpha / var_y.
double snr_fixed(const Eigen::VectorXd& alpha, const Eigen::MatrixXd& sigma_x, double var_y);

/// (1/n) sum_j sum_k var(eta_jk) (mu_k^2 + sigma2_k) / var_y with var(eta_jk)
/// the j-th diagonal entry of psi2_k (D_w - phi W)^-1.
double snr_random(const Eigen::VectorXd& psi2, double phi, const spatial::AdjacencyMatrix& adjacency,
                  const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma2, double var_y);

/// Mean diagonal of (D_w - c W)^-1.
double mean_inverse_diagonal(const spatial::AdjacencyMatrix& adjacency, double c);

/// Covariates i.i.d. N(0, 1); true effects with random signs and sizes
/// uniform in their class ranges; fixed and random effects on disjoint
/// covariates. The covariate-effect correlation, var(Y), tau2 and nu2 are
/// calibrated so the SNRs fall in the setting's windows.
SimulatedDataset simulate_dataset(const SimSetting& setting);

}  // namespace dreamespase::sim
