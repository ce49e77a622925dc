#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "doseforge/averaging.hpp"
#include "doseforge/marginals.hpp"

namespace doseforge {

struct DoseGrid {
  Eigen::VectorXd doses;  // strictly increasing, contains control
  double control = 0.0;

  static DoseGrid linspace(double lo, double hi, int points, double control = 0.0);
  static DoseGrid with_step(double lo, double hi, double step, double control = 0.0);
  static DoseGrid from_doses(std::vector<double> doses, double control = 0.0);

  void validate() const;
  Eigen::Index control_index() const;
  Eigen::Index size() const { return doses.size(); }
};

enum class CurveKind {
  ExpectedResponse,
  IndividualPrediction,
  DiffFromControl,
  CategoryProbability,
  Distance
};
std::string to_string(CurveKind kind);

struct CurveSummary {
  CurveKind kind = CurveKind::ExpectedResponse;
  DoseGrid grid;
  Eigen::VectorXd mean, sd, q025, q25, q50, q75, q975;
  std::string label;  // category set or distance metric when applicable
};

// per-realization response-scale evaluations over the grid (rows: realizations)
Eigen::MatrixXd response_matrix(const PooledDraws& pooled, const DoseGrid& grid);
CurveSummary summarize_realizations(const Eigen::MatrixXd& values, const DoseGrid& grid,
                                    CurveKind kind, std::string label = "");

CurveSummary expected_curve(const PooledDraws& pooled, const DoseGrid& grid);
CurveSummary individual_prediction_curve(const PooledDraws& pooled, const DoseGrid& grid,
                                         std::uint64_t seed);
CurveSummary diff_from_control_curve(const PooledDraws& pooled, const DoseGrid& grid);

// simultaneous band via the sup-t adjustment over the grid
void supt_band(const Eigen::MatrixXd& values, double level, Eigen::VectorXd* lo,
               Eigen::VectorXd* hi);

struct DoseInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
  bool multimodal = false;
  std::string criterion;
};

struct RangeMode {
  enum class Kind { EfficacyMin, ToxicityMax };
  Kind kind = Kind::EfficacyMin;
  double threshold = 0.0;
  double quantile = -1.0;  // defaults to 0.025 (EfficacyMin) / 0.975 (ToxicityMax)
};

DoseInterval acceptable_range(const CurveSummary& curve, RangeMode mode);
DoseInterval intersect(const DoseInterval& a, const DoseInterval& b);

struct SuccessRow {
  double dose = 0.0;
  double p_eff = 0.0;
  double p_tox = 0.0;
  bool success = false;
};

struct SuccessTable {
  std::vector<SuccessRow> rows;
  DoseInterval region;
  double min_prob = 0.7;
};

SuccessTable success_probability(const PooledDraws& eff_pooled,
                                 const PooledDraws& tox_pooled, const DoseGrid& grid,
                                 double eff_threshold, double risk_threshold,
                                 double min_prob = 0.7);

struct Contour {
  Eigen::MatrixX2d points;
  bool degenerate = false;
  double dose = 0.0;
  double level = 0.95;
};

Contour joint_contour(const PooledDraws& eff_pooled, const PooledDraws& tox_pooled,
                      double dose, double level = 0.95);

// efficacy rows of subjects with an observed toxicity event
Dataset conditional_subset(const PairedTable& table);

}  // namespace doseforge
