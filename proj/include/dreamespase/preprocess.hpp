#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace dreamespase::sim {

struct GeneSet {
  std::string name;  // gene name for singletons, <group>_<k> for merged sets
  std::string group;
  std::vector<std::string> genes;
};

struct PreprocessResult {
  std::vector<GeneSet> sets;
  Eigen::MatrixXd covariates;  // samples x sets: mean expression of each set
  std::vector<std::string> excluded;  // zero-variance genes
};

/// Within each group, genes whose pairwise Pearson correlation exceeds the
/// threshold are linked; every connected component becomes one set. Sets
/// are ordered by group (first appearance), then by their first gene.
/// Zero-variance genes are excluded with a warning.
/// expression is genes x samples.
PreprocessResult preprocess_genes(const std::vector<std::string>& genes, const std::vector<std::string>& groups,
                                  const Eigen::MatrixXd& expression, double threshold = 0.8);

}  // namespace dreamespase::sim
