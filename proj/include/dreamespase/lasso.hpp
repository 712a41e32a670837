#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "dreamespase/metrics.hpp"
#include "dreamespase/spatial.hpp"

namespace dreamespase::sim {

struct LassoFit {
  double intercept = 0.0;
  Eigen::VectorXd beta;  // on the original column scale
  Eigen::VectorXd beta_standardized;
  int cycles = 0;
  std::vector<double> objective;  // after each cycle, when requested
};

struct LassoOptions {
  double tolerance = 1e-8;  // max absolute coordinate change per cycle
  int max_cycles = 10000;
  bool record_objective = false;
};

/// Minimizes (1/2n)||y - b0 - X b||^2 + lambda ||b_s||_1 by cyclic coordinate
/// descent, where b_s are the coefficients of the internally standardized
/// columns (population scale) and the intercept is unpenalized. Constant
/// columns get a zero coefficient. A warm start (standardized scale) may be
/// supplied. Throws NumericalError if the tolerance is not reached.
LassoFit lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                  const LassoOptions& options = {}, const Eigen::VectorXd* warm_start = nullptr);

/// Smallest lambda giving the all-zero solution: max_j |x_sj' (y - ybar)| / n.
double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// count values log-spaced from lambda_max down to lambda_max * ratio.
std::vector<double> lambda_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int count = 100,
                                double ratio = 1e-3);

struct LassoPath {
  std::vector<double> lambdas;
  std::vector<Eigen::VectorXd> betas;  // original scale, one per lambda
};

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& lambdas);

struct CvResult {
  std::vector<double> lambdas;
  std::vector<double> mean_error;  // held-out squared error per row
  std::size_t best = 0;
  std::vector<int> folds;  // fold of each group
};

/// K-fold cross-validation with rows grouped (all rows of a group share a
/// fold). Folds holding a constant training outcome are re-drawn with a new
/// seed, with a warning.
CvResult cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& group,
                        int n_groups, int k_folds, std::uint64_t seed, const std::vector<double>& lambdas);

/// Two independent lassos with 3-fold biopsy-level cross-validation: fixed
/// effects regress sub-region outcomes on the biopsy covariates (one row per
/// sub-region); random effects regress each biopsy's outcome standard
/// deviation on the absolute covariates. A covariate is selected when its
/// coefficient at the CV-chosen penalty is non-zero; its score is the largest
/// penalty on the path at which it is non-zero (0 if never).
Selection analyst_model(const std::vector<spatial::BiopsyGraph>& biopsies, std::uint64_t seed);

}  // namespace dreamespase::sim
