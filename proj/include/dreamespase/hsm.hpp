#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "dreamespase/random.hpp"
#include "dreamespase/spatial.hpp"

namespace dreamespase::hsm {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Window {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }
  /// Closed rectangle.
  bool contains(const Point& u) const noexcept;
};

/// Type 1 = tumour, type 2 = immune.
struct MarkedPattern {
  Window window;
  std::vector<Point> points_1;
  std::vector<Point> points_2;

  /// Throws ValidationError if the window is empty or a point lies outside it.
  void validate() const;
};

struct HsmParams {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double theta = 0.0;
  double R = 30.0;
};

struct Quadrature {
  std::vector<Point> nodes;
  std::vector<double> weights;
};

/// Uniform-grid bins of side R: every point within R of u lies in the 3x3
/// block of bins around u.
class NeighbourIndex {
 public:
  NeighbourIndex(const std::vector<Point>& points, const Window& window, double R);
  /// Number of indexed points at distance <= R from u.
  int count_within(const Point& u) const;

 private:
  int bin_x(double x) const;
  int bin_y(double y) const;

  std::vector<Point> points_;
  Window window_;
  double r_;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> bins_;
};

/// Number of (type-1, type-2) pairs at distance <= R.
std::size_t s_r_count(const MarkedPattern& pattern, double R);

/// f(x + u) / f(x) for the cross-type interaction density
/// exp(n1 beta1 + n2 beta2 + theta S_R). Adding a point of one mark only
/// changes counts against the other mark, so the same expression covers u
/// already in x. Throws DomainError if u is outside the window or mark is
/// not 1 or 2.
double papangelou(const Point& u, int mark, const MarkedPattern& pattern, const HsmParams& params);

/// Centre points of a resolution x resolution grid, equal weights.
Quadrature make_quadrature(const Window& window, int resolution);

/// Neighbour counts that stay fixed while (beta1, beta2, theta) vary.
struct PseudolikelihoodTerms {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double cross_sum = 0.0;  // sum over all points of other-mark neighbours
  // Quadrature weight pooled by neighbour count: (count, total weight).
  std::vector<std::pair<int, double>> nodes_by_count_1;  // type-1 neighbours of each node
  std::vector<std::pair<int, double>> nodes_by_count_2;
};

PseudolikelihoodTerms pseudolikelihood_terms(const MarkedPattern& pattern, double R,
                                             const Quadrature& quad);

/// sum_points log lambda - sum_nodes w (lambda_1(u) + lambda_2(u)).
double log_pseudolikelihood(const HsmParams& params, const PseudolikelihoodTerms& terms);
double log_pseudolikelihood(const HsmParams& params, const MarkedPattern& pattern, const Quadrature& quad);

struct NormalPrior {
  double mean = 0.0;
  double sd = 10.0;
};

struct MhConfig {
  int iterations = 4000;
  int burn_in = 2000;
  std::array<double, 3> step{0.1, 0.1, 0.1};
  std::uint64_t seed = 1;
  int quadrature_resolution = 32;
};

struct HsmPosterior {
  std::vector<std::array<double, 3>> draws;  // (beta1, beta2, theta), post burn-in
  std::array<double, 3> acceptance{};        // post burn-in
  std::array<double, 3> final_step{};
  double theta_mean = 0.0;
  double theta_sd = 0.0;
};

/// Component-wise Gaussian random-walk Metropolis on log-PL + log-prior, with
/// Robbins-Monro step adaptation during burn-in only. Starts at
/// beta_m = log(n_m / area), theta = 0.
/// Throws ValidationError if either type is absent.
HsmPosterior fit_hsm_mh(const MarkedPattern& pattern, double R, const std::array<NormalPrior, 3>& prior,
                        const MhConfig& mh);

/// Type 1 as a homogeneous Poisson process with intensity exp(beta1); type 2
/// given type 1 by birth-death-move Metropolis-Hastings targeting
/// exp(n2 beta2 + theta S_R), run for `steps` proposals from an empty start.
MarkedPattern simulate_hsm(const HsmParams& params, const Window& window, Rng& rng, int steps = 20000);

/// Sample skewness and excess kurtosis.
std::array<double, 2> skew_kurtosis(const std::vector<double>& x);

struct PartitionConfig {
  int rows = 3;
  int cols = 3;
  double R = 30.0;
  int min_points = 10;         // n1 + n2 below this drops the cell
  bool drop_isolated = true;   // drop cells left without a retained neighbour
  std::array<NormalPrior, 3> prior{};
  MhConfig mh;
};

struct SubregionFit {
  int subregion_id = 0;  // row-major cell index in the full grid
  double theta_mean = 0.0;
  double theta_sd = 0.0;
  int n1 = 0;
  int n2 = 0;
};

struct PartitionResult {
  std::vector<SubregionFit> cells;     // retained, in row-major order
  spatial::AdjacencyMatrix adjacency;  // rook adjacency over retained cells
  std::vector<int> dropped;
};

/// Splits the window into a regular grid, fits each retained cell, and
/// returns the retained cells with their adjacency. Each cell's sampler seed
/// is derived from mh.seed and the cell index. Throws ValidationError when
/// every cell is dropped.
PartitionResult partition_and_fit(const MarkedPattern& pattern, const PartitionConfig& config,
                                  int threads = 1);

}  // namespace dreamespase::hsm
