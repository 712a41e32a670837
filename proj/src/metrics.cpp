#include "dreamespase/metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dreamespase/errors.hpp"

namespace dreamespase::sim {

Selection to_selection(const gibbs::SelectionReport& report) {
  return {report.fixed_selected, report.random_selected, report.fixed_probability, report.random_probability};
}

double RateCount::rate() const noexcept {
  return total > 0 ? static_cast<double>(hits) / total : std::numeric_limits<double>::quiet_NaN();
}

void MetricsTable::add(const MetricsTable& other) {
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < 3; ++s) {
      tpr[k][s].hits += other.tpr[k][s].hits;
      tpr[k][s].total += other.tpr[k][s].total;
    }
    fpr[k].hits += other.fpr[k].hits;
    fpr[k].total += other.fpr[k].total;
  }
}

MetricsTable selection_metrics(const GroundTruth& truth, const Selection& selection) {
  const std::size_t p = truth.fixed_size.size();
  if (selection.fixed_selected.size() != p || selection.random_selected.size() != p ||
      truth.random_size.size() != p) {
    throw ValidationError("selection and truth cover different numbers of covariates");
  }
  MetricsTable t;
  const std::array<const std::vector<SizeClass>*, 2> sizes{&truth.fixed_size, &truth.random_size};
  const std::array<const std::vector<bool>*, 2> chosen{&selection.fixed_selected, &selection.random_selected};
  for (int k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < p; ++j) {
      const SizeClass s = (*sizes[k])[j];
      const bool sel = (*chosen[k])[j];
      RateCount& cell = s == SizeClass::null_effect ? t.fpr[k] : t.tpr[k][static_cast<int>(s) - 1];
      cell.total += 1;
      cell.hits += sel ? 1 : 0;
    }
  }
  return t;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& scores, const std::vector<bool>& truth) {
  if (scores.size() != truth.size()) throw ValidationError("ROC: scores and labels differ in length");
  const auto positives = std::count(truth.begin(), truth.end(), true);
  const auto negatives = static_cast<std::ptrdiff_t>(truth.size()) - positives;
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> roc{{0.0, 0.0}};
  std::ptrdiff_t tp = 0;
  std::ptrdiff_t fp = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (truth[order[k]] ? tp : fp) += 1;
    if (k + 1 < order.size() && scores[order[k + 1]] == scores[order[k]]) continue;
    roc.push_back({negatives > 0 ? static_cast<double>(fp) / negatives : 0.0,
                   positives > 0 ? static_cast<double>(tp) / positives : 0.0});
  }
  if (roc.back().fpr < 1.0 || roc.back().tpr < 1.0) roc.push_back({1.0, 1.0});
  return roc;
}

namespace {

void check_roc(const std::vector<RocPoint>& roc) {
  if (roc.empty() || roc.front().fpr != 0.0) throw DomainError("ROC must start at FPR 0");
  for (std::size_t k = 1; k < roc.size(); ++k) {
    if (roc[k].fpr < roc[k - 1].fpr) throw DomainError("ROC must be sorted by FPR");
  }
}

// Largest TPR at each distinct FPR.
std::vector<RocPoint> collapse(const std::vector<RocPoint>& roc) {
  std::vector<RocPoint> out;
  for (const auto& pt : roc) {
    if (!out.empty() && out.back().fpr == pt.fpr) {
      out.back().tpr = std::max(out.back().tpr, pt.tpr);
    } else {
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace

double interpolate_tpr(const std::vector<RocPoint>& roc, double fpr) {
  check_roc(roc);
  const auto pts = collapse(roc);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (pts[k].fpr == fpr) return pts[k].tpr;
    if (pts[k].fpr > fpr) {
      if (k == 0) return pts[0].tpr;
      const auto& a = pts[k - 1];
      const auto& b = pts[k];
      return a.tpr + (b.tpr - a.tpr) * (fpr - a.fpr) / (b.fpr - a.fpr);
    }
  }
  spdlog::warn("ROC has no point with FPR >= {}; carrying the last TPR forward", fpr);
  return pts.back().tpr;
}

double auc_p(const std::vector<RocPoint>& roc, double max_fpr) {
  if (!(max_fpr > 0.0 && max_fpr <= 1.0)) throw DomainError("AUC_p: max FPR must lie in (0, 1]");
  check_roc(roc);
  const auto pts = collapse(roc);
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    if (pts[k].fpr >= max_fpr) break;
    area += (pts[k].fpr - pts[k - 1].fpr) * pts[k].tpr;
  }
  // Final partial step up to max_fpr.
  double last = 0.0;
  for (const auto& pt : pts) {
    if (pt.fpr < max_fpr) last = pt.fpr;
  }
  area += (max_fpr - last) * interpolate_tpr(pts, max_fpr);
  return area;
}

double auc_p_normalized(const std::vector<RocPoint>& roc, double max_fpr) {
  return auc_p(roc, max_fpr) / max_fpr;
}

}  // namespace dreamespase::sim
