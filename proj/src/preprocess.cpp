#include "dreamespase/preprocess.hpp"

#include <boost/pending/disjoint_sets.hpp>
#include <spdlog/spdlog.h>

#include <map>
#include <numeric>

#include "dreamespase/errors.hpp"

namespace dreamespase::sim {

PreprocessResult preprocess_genes(const std::vector<std::string>& genes, const std::vector<std::string>& groups,
                                  const Eigen::MatrixXd& expression, double threshold) {
  const auto g = static_cast<Eigen::Index>(genes.size());
  if (static_cast<Eigen::Index>(groups.size()) != g || expression.rows() != g) {
    throw ValidationError("preprocess: one group and one expression row per gene");
  }
  if (expression.cols() < 2) throw ValidationError("preprocess: at least two samples are required");
  if (!expression.allFinite()) throw ValidationError("preprocess: non-finite expression value");

  PreprocessResult out;
  // Centred, unit-norm rows so correlations are dot products.
  Eigen::MatrixXd z = expression.colwise() - expression.rowwise().mean();
  std::vector<bool> usable(g, true);
  for (Eigen::Index i = 0; i < g; ++i) {
    const double norm = z.row(i).norm();
    if (!(norm > 0.0)) {
      usable[i] = false;
      out.excluded.push_back(genes[i]);
      spdlog::warn("gene {} has zero variance and is excluded", genes[i]);
    } else {
      z.row(i) /= norm;
    }
  }

  std::vector<std::string> group_order;
  std::map<std::string, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < g; ++i) {
    if (!usable[i]) continue;
    if (!members.count(groups[i])) group_order.push_back(groups[i]);
    members[groups[i]].push_back(i);
  }

  std::vector<std::vector<Eigen::Index>> set_rows;
  for (const auto& name : group_order) {
    const auto& idx = members[name];
    const auto m = idx.size();
    std::vector<std::size_t> rank(m);
    std::vector<std::size_t> parent(m);
    boost::disjoint_sets<std::size_t*, std::size_t*> ds(rank.data(), parent.data());
    for (std::size_t a = 0; a < m; ++a) ds.make_set(a);
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = a + 1; b < m; ++b) {
        if (z.row(idx[a]).dot(z.row(idx[b])) > threshold) ds.union_set(a, b);
      }
    }
    std::map<std::size_t, std::vector<Eigen::Index>> components;  // keyed by first member
    std::map<std::size_t, std::size_t> first_of_root;
    for (std::size_t a = 0; a < m; ++a) {
      const auto root = ds.find_set(a);
      const auto first = first_of_root.emplace(root, a).first->second;
      components[first].push_back(idx[a]);
    }
    int merged = 0;
    for (const auto& [first, rows] : components) {
      GeneSet set;
      set.group = name;
      for (auto r : rows) set.genes.push_back(genes[r]);
      set.name = rows.size() == 1 ? genes[rows.front()] : name + "_" + std::to_string(++merged);
      out.sets.push_back(std::move(set));
      set_rows.push_back(rows);
    }
  }

  out.covariates.resize(expression.cols(), static_cast<Eigen::Index>(set_rows.size()));
  for (std::size_t s = 0; s < set_rows.size(); ++s) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(expression.cols());
    for (auto r : set_rows[s]) mean += expression.row(r).transpose();
    out.covariates.col(static_cast<Eigen::Index>(s)) = mean / static_cast<double>(set_rows[s].size());
  }
  return out;
}

}  // namespace dreamespase::sim
