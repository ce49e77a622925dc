#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doseforge/doseselect.hpp"

namespace doseforge {

// Piecewise assignment of (efficacy change, severity) to ordered categories
// 1..K. Severity at or above severe_threshold always maps to the worst
// category; otherwise bands are checked in order and the first match wins.
struct CategoryBand {
  double eff_lo = 0.0;
  double eff_hi = 0.0;   // inclusive on both ends
  double sev_max = 0.0;  // exclusive upper severity bound
  int category = 0;
};

struct CategoryRule {
  int categories = 0;
  std::vector<std::string> labels;
  double severe_threshold = 1.0;
  std::vector<CategoryBand> bands;
  int fallback_category = 0;

  void validate() const;
  int assign(double eff, double severity) const;

  // severity >= 0.25 -> 4 "Worst"; eff in [5,10] and severity < 0.05 -> 1 "Best";
  // eff >= 5 and severity < 0.25 -> 2 "Good"; else 3 "Minimal"
  static CategoryRule example_default();
};

// ordinal dataset built by applying a rule to a paired (eff, severity) table
Dataset categorical_dataset(const PairedTable& table, const CategoryRule& rule);

enum class DistanceMetric { Hellinger, JensenShannon };
std::string to_string(DistanceMetric metric);
DistanceMetric parse_distance_metric(const std::string& name);

double category_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                         DistanceMetric metric);

// P(C in categorySet | dose) across realizations of an ordinal fit
CurveSummary category_prob_curve(const PooledDraws& pooled, const DoseGrid& grid,
                                 const std::vector<int>& category_set);

// distance between the category distribution at each dose and at control
CurveSummary distance_curve(const PooledDraws& pooled, const DoseGrid& grid,
                            DistanceMetric metric);

}  // namespace doseforge
