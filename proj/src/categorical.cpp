#include "doseforge/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace doseforge {

void CategoryRule::validate() const {
  if (categories < 2) throw config_error("category rule needs at least 2 categories");
  if (static_cast<int>(labels.size()) != categories)
    throw config_error("category rule needs one label per category");
  if (!(severe_threshold > 0.0 && severe_threshold <= 1.0))
    throw config_error("severe threshold must be in (0,1]");
  auto in_range = [&](int c) { return c >= 1 && c <= categories; };
  if (!in_range(fallback_category))
    throw config_error("fallback category out of range");
  for (const auto& b : bands) {
    if (!in_range(b.category)) throw config_error("band category out of range");
    if (!(b.eff_lo <= b.eff_hi)) throw config_error("band efficacy range inverted");
    if (!(b.sev_max > 0.0)) throw config_error("band severity bound must be positive");
  }
}

int CategoryRule::assign(double eff, double severity) const {
  if (!(severity >= 0.0 && severity <= 1.0))
    throw std::domain_error("severity must lie in [0,1]");
  if (severity >= severe_threshold) return categories;
  for (const auto& b : bands)
    if (eff >= b.eff_lo && eff <= b.eff_hi && severity < b.sev_max) return b.category;
  return fallback_category;
}

CategoryRule CategoryRule::example_default() {
  CategoryRule r;
  r.categories = 4;
  r.labels = {"Best", "Good", "Minimal", "Worst"};
  r.severe_threshold = 0.25;
  double inf = std::numeric_limits<double>::infinity();
  r.bands = {{5.0, 10.0, 0.05, 1}, {5.0, inf, 0.25, 2}};
  r.fallback_category = 3;
  r.validate();
  return r;
}

Dataset categorical_dataset(const PairedTable& table, const CategoryRule& rule) {
  rule.validate();
  if (!table.has_severity)
    throw config_error("categorical outcomes need a severity column");
  Dataset data;
  data.likelihood.family = Likelihood::Family::OrderedCategorical;
  data.likelihood.categories = rule.categories;
  data.rows.reserve(table.rows.size());
  for (const auto& r : table.rows)
    data.rows.push_back(
        {r.dose, static_cast<double>(rule.assign(r.y_eff, r.severity)), 0.0, 0});
  data.validate();
  return data;
}

std::string to_string(DistanceMetric metric) {
  return metric == DistanceMetric::Hellinger ? "hellinger" : "jensen_shannon";
}

DistanceMetric parse_distance_metric(const std::string& name) {
  if (name == "hellinger") return DistanceMetric::Hellinger;
  if (name == "jensen_shannon") return DistanceMetric::JensenShannon;
  throw config_error("unknown distance metric: " + name);
}

double category_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                         DistanceMetric metric) {
  if (p.size() != q.size() || p.size() == 0)
    throw config_error("distance needs distributions of equal length");
  if (metric == DistanceMetric::Hellinger) {
    double bc = (p.array().max(0.0) * q.array().max(0.0)).sqrt().sum();
    return std::sqrt(std::max(0.0, 1.0 - bc));
  }
  // Jensen-Shannon distance with base-2 logs; 0*log(0) treated as 0
  double div = 0.0;
  const double inv_log2 = 1.0 / std::log(2.0);
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    double m = 0.5 * (p[k] + q[k]);
    if (p[k] > 0.0) div += 0.5 * p[k] * std::log(p[k] / m) * inv_log2;
    if (q[k] > 0.0) div += 0.5 * q[k] * std::log(q[k] / m) * inv_log2;
  }
  return std::sqrt(std::max(0.0, std::min(div, 1.0)));
}

namespace {

void require_ordinal(const PooledDraws& pooled) {
  if (pooled.draws.empty()) throw config_error("pooled draw set is empty");
  for (const auto& s : pooled.specs)
    if (s.likelihood.family != Likelihood::Family::OrderedCategorical)
      throw config_error("category curves need ordinal fits");
}

}  // namespace

CurveSummary category_prob_curve(const PooledDraws& pooled, const DoseGrid& grid,
                                 const std::vector<int>& category_set) {
  require_ordinal(pooled);
  if (category_set.empty()) throw config_error("category set is empty");
  int K = pooled.specs[0].likelihood.categories;
  for (int c : category_set)
    if (c < 1 || c > K) throw config_error("category set index out of 1..K");

  Eigen::Index n = static_cast<Eigen::Index>(pooled.draws.size());
  Eigen::MatrixXd values(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& r = pooled.draws[static_cast<std::size_t>(i)];
    const ModelSpec& spec = pooled.specs[static_cast<std::size_t>(r.model)];
    Eigen::VectorXd cuts = spec.cutpoints_at(r.params);
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      Eigen::VectorXd probs =
          ordinal_probs(cuts, linear_predictor(spec, r.params, grid.doses[j]));
      double s = 0.0;
      for (int c : category_set) s += probs[c - 1];
      values(i, j) = s;
    }
  }

  std::string label;
  for (std::size_t i = 0; i < category_set.size(); ++i) {
    if (i) label += "+";
    label += std::to_string(category_set[i]);
  }
  return summarize_realizations(values, grid, CurveKind::CategoryProbability, label);
}

CurveSummary distance_curve(const PooledDraws& pooled, const DoseGrid& grid,
                            DistanceMetric metric) {
  require_ordinal(pooled);
  Eigen::Index ci = grid.control_index();
  Eigen::Index n = static_cast<Eigen::Index>(pooled.draws.size());
  Eigen::MatrixXd values(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& r = pooled.draws[static_cast<std::size_t>(i)];
    const ModelSpec& spec = pooled.specs[static_cast<std::size_t>(r.model)];
    Eigen::VectorXd cuts = spec.cutpoints_at(r.params);
    Eigen::VectorXd ref =
        ordinal_probs(cuts, linear_predictor(spec, r.params, grid.doses[ci]));
    for (Eigen::Index j = 0; j < grid.size(); ++j) {
      Eigen::VectorXd probs =
          ordinal_probs(cuts, linear_predictor(spec, r.params, grid.doses[j]));
      values(i, j) = category_distance(probs, ref, metric);
    }
  }
  return summarize_realizations(values, grid, CurveKind::Distance, to_string(metric));
}

}  // namespace doseforge
