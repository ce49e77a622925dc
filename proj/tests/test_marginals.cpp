#include "doctest.h"

#include <cmath>

#include "doseforge/marginals.hpp"
#include "doseforge/math.hpp"
#include "test_util.hpp"

using namespace doseforge;
using testutil::make_shape;

namespace {

MarginalSpec normal_marginal(double b1, double b2, double sigma) {
  MarginalSpec m;
  m.kind = MarginalKind::Normal;
  m.shape = make_shape(ShapeKind::Linear, {b1, b2});
  m.sigma = sigma;
  return m;
}

MarginalSpec severity_marginal(double b1, double b2) {
  MarginalSpec m;
  m.kind = MarginalKind::BetaSeverity;
  m.shape = make_shape(ShapeKind::Linear, {b1, b2});
  m.link = Link::Logit;
  return m;
}

SimConfig base_config() {
  SimConfig cfg;
  cfg.doses = {0.0, 0.5, 1.0};
  cfg.n_per_dose = 20000;
  cfg.copula = {CopulaFamily::Gaussian, 0.5};
  cfg.eff = normal_marginal(1.0, 2.0, 2.0);
  cfg.tox = severity_marginal(-1.0, 0.5);
  cfg.seed = 314;
  return cfg;
}

struct DoseStats {
  double eff_mean = 0, eff_sd = 0, tox_rate = 0, sev_mean = 0, sev_sd = 0;
  int n = 0;
};

DoseStats stats_at(const PairedTable& t, double dose) {
  DoseStats s;
  double se2 = 0, ss2 = 0;
  for (const auto& r : t.rows) {
    if (r.dose != dose) continue;
    ++s.n;
    s.eff_mean += r.y_eff;
    s.tox_rate += r.y_tox;
    s.sev_mean += r.severity;
  }
  s.eff_mean /= s.n;
  s.tox_rate /= s.n;
  s.sev_mean /= s.n;
  for (const auto& r : t.rows) {
    if (r.dose != dose) continue;
    se2 += (r.y_eff - s.eff_mean) * (r.y_eff - s.eff_mean);
    ss2 += (r.severity - s.sev_mean) * (r.severity - s.sev_mean);
  }
  s.eff_sd = std::sqrt(se2 / (s.n - 1));
  s.sev_sd = std::sqrt(ss2 / (s.n - 1));
  return s;
}

}  // namespace

TEST_CASE("normal marginal recovers location and scale per dose") {
  SimConfig cfg = base_config();
  PairedTable t = generate_example_dataset(cfg);
  CHECK(t.rows.size() == 3 * 20000);
  CHECK(t.has_severity);
  for (double d : cfg.doses) {
    DoseStats s = stats_at(t, d);
    double want = 1.0 + 2.0 * d;
    CHECK(std::abs(s.eff_mean - want) < 3.0 * 2.0 / std::sqrt(20000.0));
    CHECK(s.eff_sd == doctest::Approx(2.0).epsilon(0.03));
  }
}

TEST_CASE("binary toxicity rate matches the linked curve per dose") {
  SimConfig cfg = base_config();
  PairedTable t = generate_example_dataset(cfg);
  for (double d : cfg.doses) {
    DoseStats s = stats_at(t, d);
    double p = expit(-1.0 + 0.5 * d);
    double se = std::sqrt(p * (1.0 - p) / s.n);
    CHECK(std::abs(s.tox_rate - p) < 3.0 * se);
  }
}

TEST_CASE("severity lies in the unit interval with mean equal to the event rate") {
  SimConfig cfg = base_config();
  PairedTable t = generate_example_dataset(cfg);
  for (const auto& r : t.rows) {
    CHECK(r.severity >= 0.0);
    CHECK(r.severity <= 1.0);
  }
  for (double d : cfg.doses) {
    DoseStats s = stats_at(t, d);
    double p = expit(-1.0 + 0.5 * d);
    CHECK(std::abs(s.sev_mean - p) < 4.0 * s.sev_sd / std::sqrt(double(s.n)));
  }
}

TEST_CASE("severity and the event indicator are consistent") {
  // the indicator is 1 exactly when the severity falls in the top p quantile,
  // so every event severity must exceed every non-event severity at a dose
  SimConfig cfg = base_config();
  cfg.n_per_dose = 2000;
  PairedTable t = generate_example_dataset(cfg);
  double max_quiet = 0.0, min_event = 1.0;
  for (const auto& r : t.rows) {
    if (r.dose != 0.0) continue;
    if (r.y_tox == 1.0)
      min_event = std::min(min_event, r.severity);
    else
      max_quiet = std::max(max_quiet, r.severity);
  }
  CHECK(max_quiet <= min_event);
}

TEST_CASE("positive copula dependence shows up between efficacy and severity") {
  SimConfig cfg = base_config();
  cfg.copula = {CopulaFamily::Gaussian, 0.9};
  PairedTable hi = generate_example_dataset(cfg);
  cfg.copula = {CopulaFamily::Independence, 0.0};
  PairedTable ind = generate_example_dataset(cfg);
  auto corr_at_zero = [](const PairedTable& t) {
    double me = 0, ms = 0;
    int n = 0;
    for (const auto& r : t.rows)
      if (r.dose == 0.0) { me += r.y_eff; ms += r.severity; ++n; }
    me /= n;
    ms /= n;
    double cov = 0, ve = 0, vs = 0;
    for (const auto& r : t.rows)
      if (r.dose == 0.0) {
        cov += (r.y_eff - me) * (r.severity - ms);
        ve += (r.y_eff - me) * (r.y_eff - me);
        vs += (r.severity - ms) * (r.severity - ms);
      }
    return cov / std::sqrt(ve * vs);
  };
  CHECK(corr_at_zero(hi) > 0.5);
  CHECK(std::abs(corr_at_zero(ind)) < 0.05);
}

TEST_CASE("dataset generation is deterministic in the seed") {
  SimConfig cfg = base_config();
  cfg.n_per_dose = 200;
  PairedTable a = generate_example_dataset(cfg);
  PairedTable b = generate_example_dataset(cfg);
  cfg.seed += 1;
  PairedTable c = generate_example_dataset(cfg);
  REQUIRE(a.rows.size() == b.rows.size());
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    same = same && a.rows[i].y_eff == b.rows[i].y_eff &&
           a.rows[i].y_tox == b.rows[i].y_tox &&
           a.rows[i].severity == b.rows[i].severity;
    differs = differs || a.rows[i].y_eff != c.rows[i].y_eff;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("fitting-side views pick the right column") {
  SimConfig cfg = base_config();
  cfg.n_per_dose = 50;
  PairedTable t = generate_example_dataset(cfg);
  Likelihood norm;
  norm.family = Likelihood::Family::NormalIndividual;
  Likelihood bern;
  bern.family = Likelihood::Family::Bernoulli;
  Dataset eff = efficacy_dataset(t, norm);
  Dataset tox = toxicity_dataset(t, bern);
  REQUIRE(eff.rows.size() == t.rows.size());
  REQUIRE(tox.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(eff.rows[i].response == t.rows[i].y_eff);
    CHECK(tox.rows[i].response == t.rows[i].y_tox);
    CHECK(eff.rows[i].dose == t.rows[i].dose);
  }
}

TEST_CASE("simulation config validation rejects bad inputs") {
  SimConfig cfg = base_config();
  cfg.doses = {};
  CHECK_THROWS_AS(generate_example_dataset(cfg), config_error);
  cfg = base_config();
  cfg.doses = {0.5, 0.5};
  CHECK_THROWS_AS(generate_example_dataset(cfg), config_error);
  cfg = base_config();
  cfg.n_per_dose = 0;
  CHECK_THROWS_AS(generate_example_dataset(cfg), config_error);
  cfg = base_config();
  cfg.eff.sigma = 0.0;
  CHECK_THROWS_AS(generate_example_dataset(cfg), config_error);
}
