#include "doseforge/doseselect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"

namespace doseforge {

DoseGrid DoseGrid::linspace(double lo, double hi, int points, double control) {
  if (points < 2 || !(hi > lo)) throw config_error("grid needs hi > lo and >= 2 points");
  std::vector<double> d(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    d[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return from_doses(std::move(d), control);
}

DoseGrid DoseGrid::with_step(double lo, double hi, double step, double control) {
  if (!(step > 0.0) || !(hi >= lo)) throw config_error("grid needs positive step and hi >= lo");
  std::vector<double> d;
  for (double x = lo; x <= hi + 1e-9 * step; x += step) d.push_back(x);
  return from_doses(std::move(d), control);
}

DoseGrid DoseGrid::from_doses(std::vector<double> doses, double control) {
  std::sort(doses.begin(), doses.end());
  doses.erase(std::unique(doses.begin(), doses.end()), doses.end());
  bool has_control = std::any_of(doses.begin(), doses.end(),
                                 [&](double d) { return d == control; });
  if (!has_control) doses.push_back(control);
  std::sort(doses.begin(), doses.end());
  DoseGrid g;
  g.control = control;
  g.doses = Eigen::Map<Eigen::VectorXd>(doses.data(), static_cast<Eigen::Index>(doses.size()));
  g.validate();
  return g;
}

void DoseGrid::validate() const {
  if (doses.size() == 0) throw config_error("empty dose grid");
  for (Eigen::Index i = 0; i < doses.size(); ++i) {
    if (!(doses[i] >= 0.0)) throw config_error("grid doses must be nonnegative");
    if (i > 0 && !(doses[i] > doses[i - 1]))
      throw config_error("grid doses must be strictly increasing");
  }
  control_index();
}

Eigen::Index DoseGrid::control_index() const {
  for (Eigen::Index i = 0; i < doses.size(); ++i)
    if (doses[i] == control) return i;
  throw config_error("control dose missing from grid");
}

std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::ExpectedResponse: return "expected_response";
    case CurveKind::IndividualPrediction: return "individual_prediction";
    case CurveKind::DiffFromControl: return "diff_from_control";
    case CurveKind::CategoryProbability: return "category_probability";
    case CurveKind::Distance: return "distance";
  }
  return "?";
}

Eigen::MatrixXd response_matrix(const PooledDraws& pooled, const DoseGrid& grid) {
  if (pooled.draws.empty()) throw config_error("pooled draw set is empty");
  Eigen::Index n = static_cast<Eigen::Index>(pooled.draws.size());
  Eigen::MatrixXd out(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& r = pooled.draws[static_cast<std::size_t>(i)];
    const ModelSpec& spec = pooled.specs[static_cast<std::size_t>(r.model)];
    for (Eigen::Index j = 0; j < grid.size(); ++j)
      out(i, j) = mean_response(spec, r.params, grid.doses[j]);
  }
  return out;
}

CurveSummary summarize_realizations(const Eigen::MatrixXd& values, const DoseGrid& grid,
                                    CurveKind kind, std::string label) {
  if (values.cols() != grid.size()) throw config_error("summary column/grid mismatch");
  Eigen::Index nd = grid.size(), n = values.rows();
  CurveSummary c;
  c.kind = kind;
  c.grid = grid;
  c.label = std::move(label);
  c.mean.resize(nd);
  c.sd.resize(nd);
  c.q025.resize(nd);
  c.q25.resize(nd);
  c.q50.resize(nd);
  c.q75.resize(nd);
  c.q975.resize(nd);
  for (Eigen::Index j = 0; j < nd; ++j) {
    Eigen::VectorXd col = values.col(j);
    double m = col.mean();
    c.mean[j] = m;
    c.sd[j] = n > 1 ? std::sqrt((col.array() - m).square().sum() / static_cast<double>(n - 1)) : 0.0;
    c.q025[j] = quantile(col, 0.025);
    c.q25[j] = quantile(col, 0.25);
    c.q50[j] = quantile(col, 0.50);
    c.q75[j] = quantile(col, 0.75);
    c.q975[j] = quantile(col, 0.975);
  }
  return c;
}

CurveSummary expected_curve(const PooledDraws& pooled, const DoseGrid& grid) {
  return summarize_realizations(response_matrix(pooled, grid), grid,
                                CurveKind::ExpectedResponse);
}

CurveSummary individual_prediction_curve(const PooledDraws& pooled, const DoseGrid& grid,
                                         std::uint64_t seed) {
  if (pooled.draws.empty()) throw config_error("pooled draw set is empty");
  Eigen::Index n = static_cast<Eigen::Index>(pooled.draws.size());
  Eigen::MatrixXd values(n, grid.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& r = pooled.draws[static_cast<std::size_t>(i)];
    const ModelSpec& spec = pooled.specs[static_cast<std::size_t>(r.model)];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    for (Eigen::Index j = 0; j < grid.size(); ++j)
      values(i, j) = simulate_response(spec, r.params, grid.doses[j], rng);
  }
  return summarize_realizations(values, grid, CurveKind::IndividualPrediction);
}

CurveSummary diff_from_control_curve(const PooledDraws& pooled, const DoseGrid& grid) {
  Eigen::MatrixXd values = response_matrix(pooled, grid);
  values.colwise() -= values.col(grid.control_index()).eval();
  return summarize_realizations(values, grid, CurveKind::DiffFromControl);
}

void supt_band(const Eigen::MatrixXd& values, double level, Eigen::VectorXd* lo,
               Eigen::VectorXd* hi) {
  Eigen::Index n = values.rows(), nd = values.cols();
  if (n < 2) throw config_error("sup-t band needs at least two realizations");
  Eigen::VectorXd mean(nd), sd(nd);
  for (Eigen::Index j = 0; j < nd; ++j) {
    double m = values.col(j).mean();
    mean[j] = m;
    sd[j] = std::sqrt((values.col(j).array() - m).square().sum() / static_cast<double>(n - 1));
  }
  Eigen::VectorXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double worst = 0.0;
    for (Eigen::Index j = 0; j < nd; ++j)
      if (sd[j] > 0.0) worst = std::max(worst, std::abs(values(i, j) - mean[j]) / sd[j]);
    t[i] = worst;
  }
  double c = quantile(t, level);
  *lo = mean - c * sd;
  *hi = mean + c * sd;
}

namespace {

const Eigen::VectorXd& quantile_track(const CurveSummary& curve, double q) {
  auto close = [&](double a) { return std::abs(q - a) < 1e-9; };
  if (close(0.025)) return curve.q025;
  if (close(0.25)) return curve.q25;
  if (close(0.5)) return curve.q50;
  if (close(0.75)) return curve.q75;
  if (close(0.975)) return curve.q975;
  throw config_error("range quantile must be one of 0.025/0.25/0.5/0.75/0.975");
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks(const std::vector<bool>& ok) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index n = static_cast<Eigen::Index>(ok.size());
  Eigen::Index i = 0;
  while (i < n) {
    if (!ok[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j + 1 < n && ok[static_cast<std::size_t>(j + 1)]) ++j;
    out.emplace_back(i, j);
    i = j + 1;
  }
  return out;
}

}  // namespace

DoseInterval acceptable_range(const CurveSummary& curve, RangeMode mode) {
  if (curve.grid.size() == 0) throw config_error("acceptable_range: empty grid");
  bool eff = mode.kind == RangeMode::Kind::EfficacyMin;
  double q = mode.quantile >= 0.0 ? mode.quantile : (eff ? 0.025 : 0.975);
  const Eigen::VectorXd& track = quantile_track(curve, q);

  DoseInterval out;
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "q%g(%s) %s %g", q, to_string(curve.kind).c_str(),
                  eff ? ">=" : "<=", mode.threshold);
    out.criterion = buf;
  }

  std::vector<bool> ok(static_cast<std::size_t>(curve.grid.size()));
  for (Eigen::Index i = 0; i < curve.grid.size(); ++i)
    ok[static_cast<std::size_t>(i)] = eff ? track[i] >= mode.threshold
                                          : track[i] <= mode.threshold;
  auto bl = blocks(ok);
  if (bl.empty()) return out;

  if (eff) {
    out.lo = curve.grid.doses[bl[0].first];
    out.hi = curve.grid.doses[bl[0].second];
    out.empty = false;
    out.multimodal = bl.size() > 1;
  } else {
    // contiguous block containing the control dose
    Eigen::Index ci = curve.grid.control_index();
    for (const auto& b : bl)
      if (b.first <= ci && ci <= b.second) {
        out.lo = curve.grid.doses[b.first];
        out.hi = curve.grid.doses[b.second];
        out.empty = false;
        break;
      }
    out.multimodal = bl.size() > 1;
  }
  return out;
}

DoseInterval intersect(const DoseInterval& a, const DoseInterval& b) {
  DoseInterval out;
  out.criterion = "(" + a.criterion + ") and (" + b.criterion + ")";
  if (a.empty || b.empty) return out;
  double lo = std::max(a.lo, b.lo), hi = std::min(a.hi, b.hi);
  if (lo > hi) return out;
  out.lo = lo;
  out.hi = hi;
  out.empty = false;
  out.multimodal = a.multimodal || b.multimodal;
  return out;
}

SuccessTable success_probability(const PooledDraws& eff_pooled,
                                 const PooledDraws& tox_pooled, const DoseGrid& grid,
                                 double eff_threshold, double risk_threshold,
                                 double min_prob) {
  Eigen::MatrixXd me = response_matrix(eff_pooled, grid);
  Eigen::MatrixXd mt = response_matrix(tox_pooled, grid);
  Eigen::Index ci = grid.control_index();
  me.colwise() -= me.col(ci).eval();
  mt.colwise() -= mt.col(ci).eval();

  SuccessTable table;
  table.min_prob = min_prob;
  std::vector<bool> ok(static_cast<std::size_t>(grid.size()));
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    SuccessRow row;
    row.dose = grid.doses[j];
    row.p_eff = (me.col(j).array() > eff_threshold).cast<double>().mean();
    row.p_tox = (mt.col(j).array() < risk_threshold).cast<double>().mean();
    row.success = row.p_eff >= min_prob && row.p_tox >= min_prob;
    ok[static_cast<std::size_t>(j)] = row.success;
    table.rows.push_back(row);
  }

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "P(diff > %g) >= %g and P(risk diff < %g) >= %g", eff_threshold,
                min_prob, risk_threshold, min_prob);
  table.region.criterion = buf;
  auto bl = blocks(ok);
  if (!bl.empty()) {
    table.region.lo = grid.doses[bl[0].first];
    table.region.hi = grid.doses[bl[0].second];
    table.region.empty = false;
    table.region.multimodal = bl.size() > 1;
  }
  return table;
}

Contour joint_contour(const PooledDraws& eff_pooled, const PooledDraws& tox_pooled,
                      double dose, double level) {
  if (eff_pooled.draws.empty() || tox_pooled.draws.empty())
    throw config_error("joint_contour: pooled draw set is empty");
  if (!(level > 0.0 && level < 1.0)) throw config_error("contour level must be in (0,1)");
  Eigen::Index n = std::min(static_cast<Eigen::Index>(eff_pooled.draws.size()),
                            static_cast<Eigen::Index>(tox_pooled.draws.size()));
  Eigen::MatrixX2d xy(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Realization& re = eff_pooled.draws[static_cast<std::size_t>(i)];
    const Realization& rt = tox_pooled.draws[static_cast<std::size_t>(i)];
    xy(i, 0) = mean_response(eff_pooled.specs[static_cast<std::size_t>(re.model)], re.params, dose);
    xy(i, 1) = mean_response(tox_pooled.specs[static_cast<std::size_t>(rt.model)], rt.params, dose);
  }
  Eigen::Vector2d m = xy.colwise().mean();
  Eigen::MatrixX2d centered = xy.rowwise() - m.transpose();
  Eigen::Matrix2d cov = centered.transpose() * centered / static_cast<double>(std::max<Eigen::Index>(n - 1, 1));

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Eigen::Vector2d evals = es.eigenvalues().cwiseMax(0.0);  // ascending
  Eigen::Matrix2d evecs = es.eigenvectors();
  double r = std::sqrt(chi2_quantile_2df(level));

  Contour c;
  c.dose = dose;
  c.level = level;
  c.degenerate = evals[0] <= 1e-12 * std::max(evals[1], 1e-30);
  const int npts = 128;
  c.points.resize(npts, 2);
  double a = r * std::sqrt(evals[1]);  // major axis
  double b = c.degenerate ? 0.0 : r * std::sqrt(evals[0]);
  for (int k = 0; k < npts; ++k) {
    double phi = 2.0 * pi * k / npts;
    Eigen::Vector2d p = m + a * std::cos(phi) * evecs.col(1) + b * std::sin(phi) * evecs.col(0);
    c.points(k, 0) = p[0];
    c.points(k, 1) = p[1];
  }
  return c;
}

Dataset conditional_subset(const PairedTable& table) {
  Dataset out;
  out.likelihood.family = Likelihood::Family::NormalIndividual;
  for (const auto& r : table.rows) {
    if (r.y_tox != 0.0 && r.y_tox != 1.0)
      throw config_error("conditional subset needs a binary toxicity outcome");
    if (r.y_tox == 1.0) out.rows.push_back({r.dose, r.y_eff, 0.0, 0});
  }
  if (out.rows.empty())
    throw config_error("conditional subset is empty: no rows with a toxicity event");
  out.validate();
  return out;
}

}  // namespace doseforge
