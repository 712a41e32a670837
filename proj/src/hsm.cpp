#include "dreamespase/hsm.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "dreamespase/errors.hpp"
#include "dreamespase/parallel.hpp"
#include "dreamespase/samplers.hpp"

namespace dreamespase::hsm {

bool Window::contains(const Point& u) const noexcept {
  return u.x >= x_min && u.x <= x_max && u.y >= y_min && u.y <= y_max;
}

void MarkedPattern::validate() const {
  if (!(window.width() > 0.0) || !(window.height() > 0.0)) throw ValidationError("pattern window is empty");
  for (const auto* pts : {&points_1, &points_2}) {
    for (const auto& u : *pts) {
      if (!std::isfinite(u.x) || !std::isfinite(u.y) || !window.contains(u)) {
        throw ValidationError("point (" + std::to_string(u.x) + ", " + std::to_string(u.y) +
                              ") lies outside the window");
      }
    }
  }
}

NeighbourIndex::NeighbourIndex(const std::vector<Point>& points, const Window& window, double R)
    : points_(points), window_(window), r_(R) {
  if (!(R > 0.0)) throw DomainError("interaction radius must be positive");
  nx_ = std::max(1, static_cast<int>(std::ceil(window.width() / R)));
  ny_ = std::max(1, static_cast<int>(std::ceil(window.height() / R)));
  bins_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (std::size_t k = 0; k < points_.size(); ++k) {
    bins_[static_cast<std::size_t>(bin_y(points_[k].y)) * nx_ + bin_x(points_[k].x)].push_back(
        static_cast<int>(k));
  }
}

int NeighbourIndex::bin_x(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - window_.x_min) / r_)), 0, nx_ - 1);
}

int NeighbourIndex::bin_y(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - window_.y_min) / r_)), 0, ny_ - 1);
}

int NeighbourIndex::count_within(const Point& u) const {
  const int bx = bin_x(u.x);
  const int by = bin_y(u.y);
  const double r2 = r_ * r_;
  int count = 0;
  for (int y = std::max(0, by - 1); y <= std::min(ny_ - 1, by + 1); ++y) {
    for (int x = std::max(0, bx - 1); x <= std::min(nx_ - 1, bx + 1); ++x) {
      for (int k : bins_[static_cast<std::size_t>(y) * nx_ + x]) {
        const double dx = points_[k].x - u.x;
        const double dy = points_[k].y - u.y;
        if (dx * dx + dy * dy <= r2) ++count;
      }
    }
  }
  return count;
}

std::size_t s_r_count(const MarkedPattern& pattern, double R) {
  const NeighbourIndex index(pattern.points_2, pattern.window, R);
  std::size_t total = 0;
  for (const auto& u : pattern.points_1) total += index.count_within(u);
  return total;
}

double papangelou(const Point& u, int mark, const MarkedPattern& pattern, const HsmParams& params) {
  if (!pattern.window.contains(u)) throw DomainError("Papangelou intensity queried outside the window");
  if (mark != 1 && mark != 2) throw DomainError("mark must be 1 or 2");
  const auto& other = mark == 1 ? pattern.points_2 : pattern.points_1;
  const double r2 = params.R * params.R;
  int count = 0;
  for (const auto& v : other) {
    const double dx = v.x - u.x;
    const double dy = v.y - u.y;
    if (dx * dx + dy * dy <= r2) ++count;
  }
  const double beta = mark == 1 ? params.beta1 : params.beta2;
  return std::exp(beta + params.theta * count);
}

Quadrature make_quadrature(const Window& window, int resolution) {
  if (resolution < 2) throw DomainError("quadrature resolution must be at least 2");
  Quadrature q;
  const double dx = window.width() / resolution;
  const double dy = window.height() / resolution;
  const double w = window.area() / (static_cast<double>(resolution) * resolution);
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      q.nodes.push_back({window.x_min + (c + 0.5) * dx, window.y_min + (r + 0.5) * dy});
      q.weights.push_back(w);
    }
  }
  return q;
}

PseudolikelihoodTerms pseudolikelihood_terms(const MarkedPattern& pattern, double R, const Quadrature& quad) {
  const NeighbourIndex index_1(pattern.points_1, pattern.window, R);
  const NeighbourIndex index_2(pattern.points_2, pattern.window, R);
  PseudolikelihoodTerms t;
  t.n1 = pattern.points_1.size();
  t.n2 = pattern.points_2.size();
  for (const auto& u : pattern.points_1) t.cross_sum += index_2.count_within(u);
  for (const auto& u : pattern.points_2) t.cross_sum += index_1.count_within(u);
  std::map<int, double> pooled_1;
  std::map<int, double> pooled_2;
  for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
    pooled_1[index_1.count_within(quad.nodes[k])] += quad.weights[k];
    pooled_2[index_2.count_within(quad.nodes[k])] += quad.weights[k];
  }
  t.nodes_by_count_1.assign(pooled_1.begin(), pooled_1.end());
  t.nodes_by_count_2.assign(pooled_2.begin(), pooled_2.end());
  return t;
}

double log_pseudolikelihood(const HsmParams& params, const PseudolikelihoodTerms& t) {
  double integral_1 = 0.0;  // type-1 intensity depends on type-2 neighbours
  for (const auto& [count, w] : t.nodes_by_count_2) integral_1 += w * std::exp(params.theta * count);
  double integral_2 = 0.0;
  for (const auto& [count, w] : t.nodes_by_count_1) integral_2 += w * std::exp(params.theta * count);
  return t.n1 * params.beta1 + t.n2 * params.beta2 + params.theta * t.cross_sum -
         std::exp(params.beta1) * integral_1 - std::exp(params.beta2) * integral_2;
}

double log_pseudolikelihood(const HsmParams& params, const MarkedPattern& pattern, const Quadrature& quad) {
  return log_pseudolikelihood(params, pseudolikelihood_terms(pattern, params.R, quad));
}

HsmPosterior fit_hsm_mh(const MarkedPattern& pattern, double R, const std::array<NormalPrior, 3>& prior,
                        const MhConfig& mh) {
  pattern.validate();
  if (pattern.points_1.empty() || pattern.points_2.empty()) {
    throw ValidationError("interaction is unidentified: the pattern needs points of both types");
  }
  if (mh.iterations <= mh.burn_in || mh.burn_in < 0) {
    throw ValidationError("MH iterations must exceed burn-in");
  }
  for (const auto& pr : prior) {
    if (!(pr.sd > 0.0)) throw ValidationError("MH prior standard deviations must be positive");
  }
  const auto terms = pseudolikelihood_terms(pattern, R, make_quadrature(pattern.window, mh.quadrature_resolution));
  const double area = pattern.window.area();

  std::array<double, 3> x{std::log(terms.n1 / area), std::log(terms.n2 / area), 0.0};
  auto target = [&](const std::array<double, 3>& v) {
    double lp = log_pseudolikelihood({v[0], v[1], v[2], R}, terms);
    for (int k = 0; k < 3; ++k) {
      const double z = (v[k] - prior[k].mean) / prior[k].sd;
      lp -= 0.5 * z * z;
    }
    return lp;
  };

  Rng rng(derive_seed(mh.seed, "hsm/mh"));
  std::normal_distribution<double> normal;
  std::array<double, 3> log_step{};
  for (int k = 0; k < 3; ++k) log_step[k] = std::log(mh.step[k]);
  std::array<int, 3> accepted{};
  double current = target(x);
  HsmPosterior out;
  out.draws.reserve(mh.iterations - mh.burn_in);

  for (int t = 0; t < mh.iterations; ++t) {
    for (int k = 0; k < 3; ++k) {
      auto proposal = x;
      proposal[k] += std::exp(log_step[k]) * normal(rng);
      const double value = target(proposal);
      const double log_ratio = value - current;
      const bool accept = std::log(samplers::open_uniform(rng)) < log_ratio;
      if (accept) {
        x = proposal;
        current = value;
      }
      if (t < mh.burn_in) {
        const double rate = std::min(1.0, std::exp(std::min(0.0, log_ratio)));
        log_step[k] += (rate - 0.44) / std::pow(t + 1.0, 0.6);
      } else if (accept) {
        ++accepted[k];
      }
    }
    if (t >= mh.burn_in) out.draws.push_back(x);
  }

  const double kept = static_cast<double>(out.draws.size());
  for (int k = 0; k < 3; ++k) {
    out.acceptance[k] = accepted[k] / kept;
    out.final_step[k] = std::exp(log_step[k]);
    if (out.acceptance[k] < 0.1 || out.acceptance[k] > 0.6) {
      spdlog::warn("MH acceptance rate {:.3f} for parameter {} is outside [0.1, 0.6]", out.acceptance[k], k);
    }
  }
  double sum = 0.0;
  double sum2 = 0.0;
  for (const auto& d : out.draws) {
    sum += d[2];
    sum2 += d[2] * d[2];
  }
  out.theta_mean = sum / kept;
  out.theta_sd = kept > 1 ? std::sqrt(std::max(0.0, (sum2 - kept * out.theta_mean * out.theta_mean) / (kept - 1)))
                          : 0.0;
  return out;
}

MarkedPattern simulate_hsm(const HsmParams& params, const Window& window, Rng& rng, int steps) {
  if (!(window.area() > 0.0)) throw ValidationError("simulation window is empty");
  MarkedPattern out;
  out.window = window;
  auto uniform_point = [&] {
    return Point{window.x_min + samplers::open_uniform(rng) * window.width(),
                 window.y_min + samplers::open_uniform(rng) * window.height()};
  };
  std::poisson_distribution<long> poisson(std::exp(params.beta1) * window.area());
  const long n1 = poisson(rng);
  for (long k = 0; k < n1; ++k) out.points_1.push_back(uniform_point());

  const NeighbourIndex index(out.points_1, window, params.R);
  auto log_intensity = [&](const Point& u) { return params.beta2 + params.theta * index.count_within(u); };
  const double log_area = std::log(window.area());
  std::vector<double> log_lambda;  // cached per type-2 point
  auto& pts = out.points_2;
  for (int s = 0; s < steps; ++s) {
    const double move = samplers::open_uniform(rng);
    if (move < 0.4) {  // birth
      const Point u = uniform_point();
      const double ll = log_intensity(u);
      const double log_r = ll + log_area - std::log(pts.size() + 1.0);
      if (std::log(samplers::open_uniform(rng)) < log_r) {
        pts.push_back(u);
        log_lambda.push_back(ll);
      }
    } else if (move < 0.8) {  // death
      if (pts.empty()) continue;
      const auto k = static_cast<std::size_t>(samplers::open_uniform(rng) * pts.size());
      const double log_r = std::log(static_cast<double>(pts.size())) - log_area - log_lambda[k];
      if (std::log(samplers::open_uniform(rng)) < log_r) {
        pts[k] = pts.back();
        pts.pop_back();
        log_lambda[k] = log_lambda.back();
        log_lambda.pop_back();
      }
    } else {  // move
      if (pts.empty()) continue;
      const auto k = static_cast<std::size_t>(samplers::open_uniform(rng) * pts.size());
      const Point u = uniform_point();
      const double ll = log_intensity(u);
      if (std::log(samplers::open_uniform(rng)) < ll - log_lambda[k]) {
        pts[k] = u;
        log_lambda[k] = ll;
      }
    }
  }
  return out;
}

std::array<double, 2> skew_kurtosis(const std::vector<double>& x) {
  if (x.size() < 4) throw DomainError("skewness and kurtosis need at least four values");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw DomainError("skewness and kurtosis of a constant sample");
  return {m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

PartitionResult partition_and_fit(const MarkedPattern& pattern, const PartitionConfig& config, int threads) {
  pattern.validate();
  if (config.rows < 1 || config.cols < 1) throw ValidationError("partition grid must be at least 1 x 1");
  if (!(config.R > 0.0)) throw ValidationError("interaction radius must be positive");
  const int cells = config.rows * config.cols;
  const auto& w = pattern.window;
  const double cw = w.width() / config.cols;
  const double ch = w.height() / config.rows;

  std::vector<MarkedPattern> parts(cells);
  for (int r = 0; r < config.rows; ++r) {
    for (int c = 0; c < config.cols; ++c) {
      auto& win = parts[r * config.cols + c].window;
      win.x_min = w.x_min + c * cw;
      win.x_max = c + 1 == config.cols ? w.x_max : w.x_min + (c + 1) * cw;
      win.y_min = w.y_min + r * ch;
      win.y_max = r + 1 == config.rows ? w.y_max : w.y_min + (r + 1) * ch;
    }
  }
  auto cell_of = [&](const Point& u) {
    const int c = std::clamp(static_cast<int>(std::floor((u.x - w.x_min) / cw)), 0, config.cols - 1);
    const int r = std::clamp(static_cast<int>(std::floor((u.y - w.y_min) / ch)), 0, config.rows - 1);
    return r * config.cols + c;
  };
  for (const auto& u : pattern.points_1) parts[cell_of(u)].points_1.push_back(u);
  for (const auto& u : pattern.points_2) parts[cell_of(u)].points_2.push_back(u);

  PartitionResult out;
  std::vector<int> keep;
  for (int k = 0; k < cells; ++k) {
    const auto n1 = parts[k].points_1.size();
    const auto n2 = parts[k].points_2.size();
    if (n1 == 0 || n2 == 0 || static_cast<int>(n1 + n2) < config.min_points) {
      out.dropped.push_back(k);
    } else {
      keep.push_back(k);
    }
  }
  const auto lattice = spatial::build_lattice_adjacency(config.rows, config.cols);
  if (config.drop_isolated && !keep.empty()) {
    const auto sub = lattice.induced(keep);
    std::vector<int> connected;
    for (int k = 0; k < sub.n(); ++k) {
      if (sub.degrees()[k] > 0) {
        connected.push_back(keep[k]);
      } else {
        out.dropped.push_back(keep[k]);
      }
    }
    keep = std::move(connected);
    std::sort(out.dropped.begin(), out.dropped.end());
  }
  if (keep.empty()) throw ValidationError("every sub-region was dropped; nothing to fit");
  out.adjacency = lattice.induced(keep);

  out.cells.resize(keep.size());
  parallel_for(keep.size(), threads, [&](std::size_t k) {
    const int cell = keep[k];
    MhConfig mh = config.mh;
    mh.seed = derive_seed(config.mh.seed, "cell/" + std::to_string(cell));
    const auto post = fit_hsm_mh(parts[cell], config.R, config.prior, mh);
    out.cells[k] = {cell, post.theta_mean, post.theta_sd, static_cast<int>(parts[cell].points_1.size()),
                    static_cast<int>(parts[cell].points_2.size())};
  });
  return out;
}

}  // namespace dreamespase::hsm
