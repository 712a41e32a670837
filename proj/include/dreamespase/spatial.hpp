#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <vector>

#include "dreamespase/random.hpp"

namespace dreamespase::spatial {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct Edge {
  int a = 0;
  int b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Symmetric 0/1 neighbourhood structure over the sub-regions of one biopsy.
///
/// Edges are stored once with a < b, sorted and de-duplicated; self loops are
/// rejected. Node degrees are the diagonal of D_w.
class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  /// Throws ValidationError on out-of-range nodes, self loops or n < 1.
  AdjacencyMatrix(int n, std::vector<Edge> edges);

  int n() const noexcept { return n_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  /// Degree-0 nodes make every CAR precision on this graph singular.
  bool has_isolated_nodes() const noexcept;
  std::vector<int> isolated_nodes() const;

  /// W as a sparse symmetric matrix.
  SparseMatrix weights() const;
  /// D_w - c W.
  SparseMatrix car_structure(double c) const;
  Eigen::MatrixXd dense() const;

  /// Restriction to the listed nodes (renumbered in the given order).
  AdjacencyMatrix induced(const std::vector<int>& keep) const;

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<int> degrees_;
};

/// Rook (edge-sharing) adjacency over a rows x cols grid, row-major node order.
/// A 1 x 1 grid yields a single isolated node; check has_isolated_nodes().
AdjacencyMatrix build_lattice_adjacency(int rows, int cols);

/// Precision (1/scale) (D_w - c W) with a cached sparse Cholesky factor of the
/// base matrix. Immutable; rescaling reuses the factor.
class CarPrecision {
 public:
  /// Throws DomainError if |c| >= 1 or scale <= 0, NumericalError if the base
  /// matrix is singular (an isolated node) or otherwise not positive definite.
  CarPrecision(const AdjacencyMatrix& adjacency, double c, double scale);

  int n() const noexcept { return static_cast<int>(base_.rows()); }
  double correlation() const noexcept { return c_; }
  double scale() const noexcept { return scale_; }
  const SparseMatrix& base() const noexcept { return base_; }

  /// log det of D_w - c W.
  double base_log_det() const noexcept { return base_log_det_; }
  /// log det of the full precision: n log(1/scale) + logdet(base).
  double log_det() const noexcept;
  /// v' (base / scale) v.
  double quad_form(const Eigen::VectorXd& v) const;

  CarPrecision rescaled(double scale) const;
  Eigen::MatrixXd dense() const;

  /// Maps a standard-normal vector z to a draw with covariance scale * base^{-1}.
  Eigen::VectorXd color(const Eigen::VectorXd& z) const;

 private:
  CarPrecision() = default;

  double c_ = 0.0;
  double scale_ = 1.0;
  SparseMatrix base_;
  SparseMatrix lower_;  // L with P base P' = L L'
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> perm_inv_;
  double base_log_det_ = 0.0;
};

/// Exact zero-mean Gaussian log-density of v under the precision.
double car_log_density(const Eigen::VectorXd& v, const CarPrecision& precision);

/// One exact draw from N(0, precision^{-1}).
Eigen::VectorXd sample_car(const CarPrecision& precision, Rng& rng);

/// One biopsy: its sub-region graph, sub-region outcomes and covariate vector.
struct BiopsyGraph {
  std::string id;
  AdjacencyMatrix adjacency;
  Eigen::VectorXd y;
  Eigen::VectorXd x;

  int n() const noexcept { return adjacency.n(); }
};

/// Throws ValidationError when len(y) != n or covariates are non-finite.
void validate(const BiopsyGraph& biopsy);

}  // namespace dreamespase::spatial
