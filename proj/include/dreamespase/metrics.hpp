#pragma once

#include <array>
#include <vector>

#include "dreamespase/gibbs.hpp"
#include "dreamespase/simulate.hpp"

namespace dreamespase::sim {

/// Thresholded selections plus the ranking score each was derived from
/// (inclusion probability, or lasso entry penalty for the analyst model).
struct Selection {
  std::vector<bool> fixed_selected;
  std::vector<bool> random_selected;
  std::vector<double> fixed_score;
  std::vector<double> random_score;
};

Selection to_selection(const gibbs::SelectionReport& report);

struct RateCount {
  int hits = 0;
  int total = 0;

  /// hits / total, or NaN when nothing was counted.
  double rate() const noexcept;
};

enum class EffectKind { fixed = 0, random = 1 };

struct MetricsTable {
  std::array<std::array<RateCount, 3>, 2> tpr;  // [kind][small, medium, large]
  std::array<RateCount, 2> fpr;                 // [kind], over null covariates only

  /// Pools counts with another table (e.g. across replicates).
  void add(const MetricsTable& other);
};

MetricsTable selection_metrics(const GroundTruth& truth, const Selection& selection);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

/// ROC from sweeping a threshold down through the distinct scores: a
/// covariate counts as selected when its score is >= the threshold. Starts
/// at (0, 0) and ends at (1, 1).
std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<bool>& truth);

/// Area under a step-function ROC on [0, max_fpr]. Each step takes the TPR
/// at its right end (the largest TPR observed at that FPR); the TPR at
/// max_fpr is linearly interpolated between the bracketing points. Without a
/// point at or beyond max_fpr the last TPR is carried forward with a warning.
/// Throws DomainError unless the curve is sorted by FPR and starts at FPR 0.
double auc_p(const std::vector<RocPoint>& roc, double max_fpr);

/// auc_p / max_fpr.
double auc_p_normalized(const std::vector<RocPoint>& roc, double max_fpr);

/// TPR at fpr, linearly interpolated between bracketing points.
double interpolate_tpr(const std::vector<RocPoint>& roc, double fpr);

}  // namespace dreamespase::sim
