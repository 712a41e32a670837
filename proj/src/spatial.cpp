#include "dreamespase/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_map>

#include "dreamespase/errors.hpp"

namespace dreamespase::spatial {

AdjacencyMatrix::AdjacencyMatrix(int n, std::vector<Edge> edges) : n_(n) {
  if (n < 1) throw ValidationError("adjacency needs at least one node");
  for (auto& e : edges) {
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) {
      throw ValidationError("adjacency edge (" + std::to_string(e.a) + "," +
                            std::to_string(e.b) + ") outside 0.." + std::to_string(n - 1));
    }
    if (e.a == e.b) throw ValidationError("adjacency self loop at node " + std::to_string(e.a));
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  degrees_.assign(n, 0);
  for (const auto& e : edges_) {
    ++degrees_[e.a];
    ++degrees_[e.b];
  }
}

bool AdjacencyMatrix::has_isolated_nodes() const noexcept {
  return std::find(degrees_.begin(), degrees_.end(), 0) != degrees_.end();
}

std::vector<int> AdjacencyMatrix::isolated_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < n_; ++i) {
    if (degrees_[i] == 0) out.push_back(i);
  }
  return out;
}

SparseMatrix AdjacencyMatrix::weights() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * edges_.size());
  for (const auto& e : edges_) {
    t.emplace_back(e.a, e.b, 1.0);
    t.emplace_back(e.b, e.a, 1.0);
  }
  SparseMatrix w(n_, n_);
  w.setFromTriplets(t.begin(), t.end());
  return w;
}

SparseMatrix AdjacencyMatrix::car_structure(double c) const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(2 * edges_.size() + n_);
  for (int i = 0; i < n_; ++i) t.emplace_back(i, i, static_cast<double>(degrees_[i]));
  if (c != 0.0) {
    for (const auto& e : edges_) {
      t.emplace_back(e.a, e.b, -c);
      t.emplace_back(e.b, e.a, -c);
    }
  }
  SparseMatrix q(n_, n_);
  q.setFromTriplets(t.begin(), t.end());
  return q;
}

Eigen::MatrixXd AdjacencyMatrix::dense() const { return Eigen::MatrixXd(weights()); }

AdjacencyMatrix AdjacencyMatrix::induced(const std::vector<int>& keep) const {
  std::unordered_map<int, int> index;
  for (std::size_t k = 0; k < keep.size(); ++k) index.emplace(keep[k], static_cast<int>(k));
  std::vector<Edge> kept;
  for (const auto& e : edges_) {
    auto ia = index.find(e.a);
    auto ib = index.find(e.b);
    if (ia != index.end() && ib != index.end()) kept.push_back({ia->second, ib->second});
  }
  return AdjacencyMatrix(static_cast<int>(keep.size()), std::move(kept));
}

AdjacencyMatrix build_lattice_adjacency(int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("lattice dimensions must be positive");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(rows * (cols - 1) + cols * (rows - 1)));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int node = r * cols + c;
      if (c + 1 < cols) edges.push_back({node, node + 1});
      if (r + 1 < rows) edges.push_back({node, node + cols});
    }
  }
  return AdjacencyMatrix(rows * cols, std::move(edges));
}

CarPrecision::CarPrecision(const AdjacencyMatrix& adjacency, double c, double scale)
    : c_(c), scale_(scale) {
  if (!(std::abs(c) < 1.0)) throw DomainError("CAR correlation must lie in (-1, 1)");
  if (!(scale > 0.0)) throw DomainError("CAR scale must be positive");
  if (adjacency.has_isolated_nodes()) {
    throw NumericalError("CAR precision is singular: node " +
                         std::to_string(adjacency.isolated_nodes().front()) + " has no neighbours");
  }
  base_ = adjacency.car_structure(c);
  Eigen::SimplicialLLT<SparseMatrix> llt(base_);
  if (llt.info() != Eigen::Success) throw NumericalError("CAR precision is not positive definite");
  lower_ = llt.matrixL();
  perm_inv_ = llt.permutationPinv();
  base_log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

double CarPrecision::log_det() const noexcept {
  return base_log_det_ - n() * std::log(scale_);
}

double CarPrecision::quad_form(const Eigen::VectorXd& v) const {
  if (v.size() != n()) throw ValidationError("quadratic form: dimension mismatch");
  return v.dot(base_ * v) / scale_;
}

CarPrecision CarPrecision::rescaled(double scale) const {
  if (!(scale > 0.0)) throw DomainError("CAR scale must be positive");
  CarPrecision out = *this;
  out.scale_ = scale;
  return out;
}

Eigen::MatrixXd CarPrecision::dense() const { return Eigen::MatrixXd(base_) / scale_; }

Eigen::VectorXd CarPrecision::color(const Eigen::VectorXd& z) const {
  // L' y = z gives cov(y) = (P base P')^{-1}; undo the fill-reducing permutation.
  Eigen::VectorXd y = lower_.transpose().triangularView<Eigen::Upper>().solve(z);
  return std::sqrt(scale_) * (perm_inv_ * y);
}

double car_log_density(const Eigen::VectorXd& v, const CarPrecision& precision) {
  if (v.size() != precision.n()) throw ValidationError("CAR density: dimension mismatch");
  const double n = precision.n();
  return -0.5 * n * std::log(2.0 * std::numbers::pi) + 0.5 * precision.log_det() -
         0.5 * precision.quad_form(v);
}

Eigen::VectorXd sample_car(const CarPrecision& precision, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(precision.n());
  for (auto& zi : z) zi = normal(rng);
  return precision.color(z);
}

void validate(const BiopsyGraph& biopsy) {
  if (biopsy.y.size() != biopsy.adjacency.n()) {
    throw ValidationError("biopsy " + biopsy.id + ": " + std::to_string(biopsy.y.size()) +
                          " outcomes for " + std::to_string(biopsy.adjacency.n()) +
                          " sub-regions");
  }
  if (!biopsy.y.allFinite()) throw ValidationError("biopsy " + biopsy.id + ": non-finite outcome");
  if (!biopsy.x.allFinite()) throw ValidationError("biopsy " + biopsy.id + ": non-finite covariate");
}

}  // namespace dreamespase::spatial
