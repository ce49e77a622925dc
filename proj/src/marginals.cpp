#include "doseforge/marginals.hpp"

#include <algorithm>
#include <cmath>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"

namespace doseforge {

std::string to_string(MarginalKind kind) {
  switch (kind) {
    case MarginalKind::Normal: return "normal";
    case MarginalKind::Bernoulli: return "bernoulli";
    case MarginalKind::BetaSeverity: return "beta_severity";
  }
  return "?";
}

MarginalKind parse_marginal_kind(const std::string& name) {
  if (name == "normal") return MarginalKind::Normal;
  if (name == "bernoulli") return MarginalKind::Bernoulli;
  if (name == "beta_severity") return MarginalKind::BetaSeverity;
  throw config_error("unknown marginal kind: " + name);
}

void MarginalSpec::validate() const {
  shape.validate();
  if (kind == MarginalKind::Normal && !(sigma > 0.0))
    throw config_error("normal marginal needs sigma > 0");
}

void SimConfig::validate() const {
  if (doses.empty()) throw config_error("simulation needs at least one dose");
  for (std::size_t i = 0; i < doses.size(); ++i) {
    if (!(doses[i] >= 0.0)) throw config_error("doses must be nonnegative");
    if (i > 0 && !(doses[i] > doses[i - 1]))
      throw config_error("doses must be distinct and sorted ascending");
  }
  if (n_per_dose < 1) throw config_error("n_per_dose must be >= 1");
  copula.validate();
  eff.validate();
  tox.validate();
}

namespace {

// severity quantile for Beta(1, (1-p)/p); mean equals p
double beta_severity_quantile(double v, double p) {
  if (!(p > 0.0 && p < 1.0)) throw config_error("degenerate severity rate");
  double b = (1.0 - p) / p;
  return -std::expm1(std::log1p(-v) / b);
}

void apply_marginal(const MarginalSpec& m, double u, double dose, double* value,
                    double* severity) {
  switch (m.kind) {
    case MarginalKind::Normal:
      *value = m.sigma * normal_quantile(u) + m.location(dose);
      break;
    case MarginalKind::Bernoulli:
      *value = u > 1.0 - m.rate(dose) ? 1.0 : 0.0;
      break;
    case MarginalKind::BetaSeverity: {
      double p = m.rate(dose);
      *value = u > 1.0 - p ? 1.0 : 0.0;
      if (severity) *severity = beta_severity_quantile(u, p);
      break;
    }
  }
}

}  // namespace

std::vector<PairedRow> inverse_marginal_transform(const UVSample& uv, double dose,
                                                  const MarginalSpec& eff,
                                                  const MarginalSpec& tox) {
  if (!(dose >= 0.0)) throw config_error("dose must be nonnegative");
  std::vector<PairedRow> out(static_cast<std::size_t>(uv.size()));
  for (Eigen::Index i = 0; i < uv.size(); ++i) {
    PairedRow& r = out[static_cast<std::size_t>(i)];
    r.dose = dose;
    apply_marginal(eff, uv.uv(i, 0), dose, &r.y_eff, nullptr);
    apply_marginal(tox, uv.uv(i, 1), dose, &r.y_tox, &r.severity);
  }
  return out;
}

PairedTable generate_example_dataset(const SimConfig& cfg) {
  cfg.validate();
  PairedTable table;
  table.seed = cfg.seed;
  table.has_severity = cfg.tox.kind == MarginalKind::BetaSeverity;
  table.rows.reserve(cfg.doses.size() * static_cast<std::size_t>(cfg.n_per_dose));
  for (std::size_t di = 0; di < cfg.doses.size(); ++di) {
    UVSample uv = sample_copula(cfg.copula, cfg.n_per_dose, derive_seed(cfg.seed, di));
    auto rows = inverse_marginal_transform(uv, cfg.doses[di], cfg.eff, cfg.tox);
    table.rows.insert(table.rows.end(), rows.begin(), rows.end());
  }
  return table;
}

namespace {

Dataset column_dataset(const PairedTable& table, bool efficacy,
                       const Likelihood& likelihood) {
  Dataset data;
  data.likelihood = likelihood;
  data.rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    Observation o;
    o.dose = r.dose;
    o.response = efficacy ? r.y_eff : r.y_tox;
    data.rows.push_back(o);
  }
  data.validate();
  return data;
}

}  // namespace

Dataset efficacy_dataset(const PairedTable& table, const Likelihood& likelihood) {
  return column_dataset(table, true, likelihood);
}

Dataset toxicity_dataset(const PairedTable& table, const Likelihood& likelihood) {
  return column_dataset(table, false, likelihood);
}

}  // namespace doseforge
