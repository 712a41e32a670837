#include "dreamespase/lasso.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dreamespase/errors.hpp"
#include "dreamespase/random.hpp"

namespace dreamespase::sim {

namespace {

// Sufficient statistics of the standardized problem.
struct Standardized {
  Eigen::VectorXd x_mean;
  Eigen::VectorXd x_scale;  // 0 for constant columns
  double y_mean = 0.0;
  Eigen::MatrixXd gram;  // X_s' X_s / n
  Eigen::VectorXd xty;   // X_s' (y - ybar) / n
  double yty = 0.0;      // ||y - ybar||^2 / n
};

Standardized standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw ValidationError("lasso: X and y differ in rows");
  if (x.rows() < 1 || x.cols() < 1) throw ValidationError("lasso: empty design");
  const double n = static_cast<double>(x.rows());
  Standardized s;
  s.x_mean = x.colwise().mean().transpose();
  s.y_mean = y.mean();
  Eigen::MatrixXd xs = x.rowwise() - s.x_mean.transpose();
  s.x_scale = (xs.colwise().squaredNorm() / n).cwiseSqrt().transpose();
  for (Eigen::Index j = 0; j < xs.cols(); ++j) {
    if (s.x_scale[j] > 1e-12 * std::max(1.0, std::abs(s.x_mean[j]))) {
      xs.col(j) /= s.x_scale[j];
    } else {
      s.x_scale[j] = 0.0;
      xs.col(j).setZero();
    }
  }
  const Eigen::VectorXd yc = y.array() - s.y_mean;
  s.gram = xs.transpose() * xs / n;
  s.xty = xs.transpose() * yc / n;
  s.yty = yc.squaredNorm() / n;
  return s;
}

double soft(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

double objective(const Standardized& s, const Eigen::VectorXd& b, double lambda) {
  return 0.5 * s.yty - s.xty.dot(b) + 0.5 * b.dot(s.gram * b) + lambda * b.lpNorm<1>();
}

LassoFit solve(const Standardized& s, double lambda, const LassoOptions& options, const Eigen::VectorXd* warm) {
  if (!(lambda >= 0.0)) throw DomainError("lasso: lambda must be non-negative");
  const Eigen::Index p = s.gram.rows();
  Eigen::VectorXd b = warm ? *warm : Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.x_scale[j] == 0.0) b[j] = 0.0;
  }
  Eigen::VectorXd grad = s.xty - s.gram * b;  // X_s' r / n
  LassoFit fit;
  double change = 0.0;
  for (fit.cycles = 1; fit.cycles <= options.max_cycles; ++fit.cycles) {
    change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (s.x_scale[j] == 0.0) continue;
      const double next = soft(grad[j] + b[j], lambda);
      const double delta = next - b[j];
      if (delta != 0.0) {
        grad -= s.gram.col(j) * delta;
        b[j] = next;
        change = std::max(change, std::abs(delta));
      }
    }
    if (options.record_objective) fit.objective.push_back(objective(s, b, lambda));
    if (change < options.tolerance) break;
  }
  if (fit.cycles > options.max_cycles) {
    std::ostringstream msg;
    msg << "lasso did not converge in " << options.max_cycles << " cycles (lambda=" << lambda
        << ", last max change=" << change << ", |b|_1=" << b.lpNorm<1>() << ")";
    throw NumericalError(msg.str());
  }
  fit.beta_standardized = b;
  fit.beta = Eigen::VectorXd::Zero(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (s.x_scale[j] > 0.0) fit.beta[j] = b[j] / s.x_scale[j];
  }
  fit.intercept = s.y_mean - s.x_mean.dot(fit.beta);
  return fit;
}

}  // namespace

LassoFit lasso_cd(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, const LassoOptions& options,
                  const Eigen::VectorXd* warm_start) {
  return solve(standardize(x, y), lambda, options, warm_start);
}

double lambda_max(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  return standardize(x, y).xty.cwiseAbs().maxCoeff();
}

std::vector<double> lambda_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int count, double ratio) {
  if (count < 1 || !(ratio > 0.0 && ratio < 1.0)) throw DomainError("lambda path: bad count or ratio");
  const double top = lambda_max(x, y);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / (count - 1);
    out.push_back(top * std::pow(ratio, t));
  }
  return out;
}

LassoPath lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<double>& lambdas) {
  const auto s = standardize(x, y);
  LassoPath path;
  path.lambdas = lambdas;
  Eigen::VectorXd warm = Eigen::VectorXd::Zero(x.cols());
  for (double lambda : lambdas) {
    const auto fit = solve(s, lambda, {}, &warm);
    warm = fit.beta_standardized;
    path.betas.push_back(fit.beta);
  }
  return path;
}

CvResult cross_validate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& group,
                        int n_groups, int k_folds, std::uint64_t seed, const std::vector<double>& lambdas) {
  if (n_groups < k_folds) throw ValidationError("cross-validation needs at least as many groups as folds");
  if (static_cast<Eigen::Index>(group.size()) != x.rows()) throw ValidationError("cross-validation: group per row");
  CvResult cv;
  cv.lambdas = lambdas;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 20) throw NumericalError("cross-validation: could not form non-degenerate folds");
    Rng rng(derive_seed(seed, "cv/" + std::to_string(attempt)));
    std::vector<int> order(n_groups);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    cv.folds.assign(n_groups, 0);
    for (int k = 0; k < n_groups; ++k) cv.folds[order[k]] = k % k_folds;

    bool degenerate = false;
    std::vector<double> sse(lambdas.size(), 0.0);
    for (int f = 0; f < k_folds && !degenerate; ++f) {
      std::vector<Eigen::Index> train;
      std::vector<Eigen::Index> test;
      for (Eigen::Index r = 0; r < x.rows(); ++r) (cv.folds[group[r]] == f ? test : train).push_back(r);
      const Eigen::MatrixXd xt = x(train, Eigen::all);
      const Eigen::VectorXd yt = y(train);
      if ((yt.array() == yt[0]).all()) {
        degenerate = true;
        break;
      }
      const auto path = lasso_path(xt, yt, lambdas);
      const auto s = standardize(xt, yt);
      for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double b0 = s.y_mean - s.x_mean.dot(path.betas[k]);
        for (auto r : test) {
          const double e = y[r] - b0 - x.row(r).dot(path.betas[k]);
          sse[k] += e * e;
        }
      }
    }
    if (degenerate) {
      spdlog::warn("cross-validation fold has a constant training outcome; re-drawing folds");
      continue;
    }
    cv.mean_error.resize(lambdas.size());
    for (std::size_t k = 0; k < lambdas.size(); ++k) cv.mean_error[k] = sse[k] / x.rows();
    cv.best = static_cast<std::size_t>(std::min_element(cv.mean_error.begin(), cv.mean_error.end()) -
                                       cv.mean_error.begin());
    return cv;
  }
}

namespace {

void select_stage(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<int>& group, int n_groups,
                  std::uint64_t seed, std::vector<bool>& selected, std::vector<double>& score) {
  const auto p = static_cast<std::size_t>(x.cols());
  selected.assign(p, false);
  score.assign(p, 0.0);
  if (!(lambda_max(x, y) > 0.0)) return;
  const auto lambdas = lambda_path(x, y);
  const auto path = lasso_path(x, y, lambdas);
  const auto cv = cross_validate(x, y, group, n_groups, 3, seed, lambdas);
  for (std::size_t j = 0; j < p; ++j) {
    selected[j] = path.betas[cv.best][j] != 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
      if (path.betas[k][j] != 0.0) {
        score[j] = lambdas[k];
        break;
      }
    }
  }
}

}  // namespace

Selection analyst_model(const std::vector<spatial::BiopsyGraph>& biopsies, std::uint64_t seed) {
  if (biopsies.size() < 3) throw ValidationError("analyst model needs at least 3 biopsies for 3-fold CV");
  const auto p = biopsies.front().x.size();
  const int nb = static_cast<int>(biopsies.size());
  Eigen::Index rows = 0;
  for (const auto& b : biopsies) {
    if (b.x.size() != p) throw ValidationError("biopsy " + b.id + ": covariate count differs");
    if (b.n() < 2) throw ValidationError("biopsy " + b.id + ": needs at least two sub-regions");
    rows += b.n();
  }

  Eigen::MatrixXd xf(rows, p);
  Eigen::VectorXd yf(rows);
  std::vector<int> gf(rows);
  Eigen::MatrixXd xr(nb, p);
  Eigen::VectorXd yr(nb);
  std::vector<int> gr(nb);
  Eigen::Index r = 0;
  for (int i = 0; i < nb; ++i) {
    const auto& b = biopsies[i];
    for (int k = 0; k < b.n(); ++k, ++r) {
      xf.row(r) = b.x.transpose();
      yf[r] = b.y[k];
      gf[r] = i;
    }
    xr.row(i) = b.x.cwiseAbs().transpose();
    const double mean = b.y.mean();
    yr[i] = std::sqrt((b.y.array() - mean).square().sum() / (b.n() - 1));
    gr[i] = i;
  }

  Selection out;
  select_stage(xf, yf, gf, nb, derive_seed(seed, "analyst/fixed"), out.fixed_selected, out.fixed_score);
  select_stage(xr, yr, gr, nb, derive_seed(seed, "analyst/random"), out.random_selected, out.random_score);
  return out;
}

}  // namespace dreamespase::sim
