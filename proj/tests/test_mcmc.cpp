#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "../src/mcmc_internal.hpp"
#include "doseforge/math.hpp"
#include "doseforge/mcmc.hpp"
#include "doseforge/models.hpp"
#include "doseforge/rng.hpp"
#include "test_util.hpp"

using namespace doseforge;
using mcmc_detail::Transform;
using testutil::vec;

namespace {

Prior t_prior(double loc, double scale) {
  return Prior{Prior::Kind::StudentT, 3.0, loc, scale};
}

ModelSpec make_spec(ShapeKind kind, Likelihood::Family family, bool fix_intercept,
                    int categories = 0) {
  ModelSpec m;
  m.shape.kind = kind;
  if (kind == ShapeKind::LogLinear) m.shape.log_offset = 0.05;
  m.likelihood.family = family;
  m.likelihood.categories = categories;
  m.fix_intercept = fix_intercept;
  int np = shape_param_count(kind);
  for (int j = fix_intercept ? 1 : 0; j < np; ++j) {
    bool positive = (kind == ShapeKind::Emax || kind == ShapeKind::SigmoidEmax) && j == 2;
    positive = positive ||
               ((kind == ShapeKind::SigmoidEmax || kind == ShapeKind::Logistic) && j == 3);
    if (positive)
      m.priors.push_back(Prior{Prior::Kind::LogNormal, 0.0, std::log(0.4), 0.8});
    else
      m.priors.push_back(t_prior(0.0, 5.0));
  }
  if (m.likelihood.has_sigma())
    m.priors.push_back(Prior{Prior::Kind::HalfStudentT, 3.0, 0.0, 5.0});
  for (int k = 0; k < m.likelihood.cutpoint_count(); ++k)
    m.priors.push_back(t_prior(0.0, 5.0));
  m.validate();
  return m;
}

// numeric log |det d x / d z| by central differences
double fd_log_jacobian(const Transform& tr, const Eigen::VectorXd& z) {
  Eigen::Index n = z.size();
  Eigen::MatrixXd J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double h = 1e-6 * (1.0 + std::abs(z[j]));
    Eigen::VectorXd zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    J.col(j) = (tr.to_natural(zp) - tr.to_natural(zm)) / (2.0 * h);
  }
  return std::log(std::abs(J.fullPivLu().determinant()));
}

void check_transform(const ModelSpec& spec, double bot, double top,
                     std::uint64_t seed) {
  Transform tr = Transform::for_spec(spec, bot, top);
  Rng rng(seed);
  for (int rep = 0; rep < 4; ++rep) {
    Eigen::VectorXd z(spec.n_params());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = 0.8 * rng.normal();

    Eigen::VectorXd x = tr.to_natural(z);
    INFO("spec ", spec.id(), " rep ", rep);
    REQUIRE(spec.params_admissible(x));

    Eigen::VectorXd z2 = tr.to_unconstrained(x);
    for (Eigen::Index i = 0; i < z.size(); ++i)
      CHECK(z2[i] == doctest::Approx(z[i]).epsilon(1e-8));

    Eigen::VectorXd x2 = tr.to_natural(z2);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      CHECK(x2[i] == doctest::Approx(x[i]).epsilon(1e-8));

    CHECK(tr.log_jacobian(z) == doctest::Approx(fd_log_jacobian(tr, z)).epsilon(1e-5));
  }
}

}  // namespace

TEST_CASE("working-space transforms round trip and report exact jacobians") {
  // every chart x intercept-mode combination the sampler can build
  check_transform(make_spec(ShapeKind::Linear, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 21);
  check_transform(make_spec(ShapeKind::LogLinear, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 22);
  check_transform(make_spec(ShapeKind::Emax, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 23);
  check_transform(make_spec(ShapeKind::SigmoidEmax, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 24);
  check_transform(make_spec(ShapeKind::Exponential, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 25);
  check_transform(make_spec(ShapeKind::Logistic, Likelihood::Family::NormalIndividual, false),
                  0.0, 1.0, 26);
  check_transform(make_spec(ShapeKind::Emax, Likelihood::Family::OrderedCategorical, true, 4),
                  0.0, 1.0, 27);
  check_transform(make_spec(ShapeKind::Exponential, Likelihood::Family::OrderedCategorical, true, 4),
                  0.0, 1.0, 28);
  check_transform(make_spec(ShapeKind::Logistic, Likelihood::Family::OrderedCategorical, true, 4),
                  0.0, 1.0, 29);
  // unscaled dose axes fall back to the generic coordinates
  check_transform(make_spec(ShapeKind::Exponential, Likelihood::Family::NormalIndividual, false),
                  0.0, 0.0, 30);
  // wider dose spans exercise the chart scaling
  check_transform(make_spec(ShapeKind::Logistic, Likelihood::Family::Bernoulli, false),
                  0.0, 6.0, 31);
  check_transform(make_spec(ShapeKind::Emax, Likelihood::Family::Bernoulli, false),
                  0.3, 48.0, 32);
}

TEST_CASE("transforms invert realistic natural parameter values") {
  ModelSpec sig = make_spec(ShapeKind::SigmoidEmax, Likelihood::Family::NormalIndividual, false);
  Transform tr = Transform::for_spec(sig, 0.0, 1.0);
  Eigen::VectorXd x = vec({4.0, 15.0, 0.33, 2.8, 2.0});
  Eigen::VectorXd back = tr.to_natural(tr.to_unconstrained(x));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-9));

  ModelSpec logi = make_spec(ShapeKind::Logistic, Likelihood::Family::NormalIndividual, false);
  Transform tl = Transform::for_spec(logi, 0.0, 1.0);
  Eigen::VectorXd xl = vec({1.0, 9.0, 0.5, 0.15, 2.0});
  Eigen::VectorXd backl = tl.to_natural(tl.to_unconstrained(xl));
  for (Eigen::Index i = 0; i < xl.size(); ++i)
    CHECK(backl[i] == doctest::Approx(xl[i]).epsilon(1e-9));
}

TEST_CASE("warmup adaptation windows double and absorb the tail") {
  CHECK(mcmc_detail::adaptation_windows(4000) == std::vector<int>{266, 798, 1862, 4000});
  CHECK(mcmc_detail::adaptation_windows(500) == std::vector<int>{50, 150, 500});
  CHECK(mcmc_detail::adaptation_windows(50) == std::vector<int>{50});
}

TEST_CASE("posterior matches the weighted least squares conjugate answer") {
  // known per-row error scale, so the gaussian posterior is exact up to the
  // near-flat t prior
  Dataset d;
  d.likelihood.family = Likelihood::Family::NormalSummary;
  d.rows = {{0.0, 1.07, 0.30, 0}, {0.0, 1.31, 0.30, 0}, {1.0, 2.88, 0.25, 0},
            {1.0, 3.06, 0.25, 0}, {2.0, 5.13, 0.40, 0}, {2.0, 4.93, 0.40, 0}};
  ModelSpec m = make_spec(ShapeKind::Linear, Likelihood::Family::NormalSummary, false);
  m.priors = {t_prior(0.0, 50.0), t_prior(0.0, 50.0)};

  Eigen::MatrixXd X(6, 2);
  Eigen::VectorXd y(6), w(6);
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = d.rows[i].dose;
    y[i] = d.rows[i].response;
    w[i] = 1.0 / (d.rows[i].se * d.rows[i].se);
  }
  Eigen::Matrix2d precision = X.transpose() * w.asDiagonal() * X;
  Eigen::Vector2d exact_mean = precision.ldlt().solve(X.transpose() * (w.asDiagonal() * y));
  Eigen::Matrix2d exact_cov = precision.inverse();

  McmcConfig cfg;
  cfg.chains = 4;
  cfg.warmup = 1500;
  cfg.post_warmup = 4000;
  cfg.thin = 2;
  cfg.seed = 5;
  PosteriorDraws draws = run_mcmc(m, d, cfg);
  DiagSummary diag = diagnostics(draws);
  Eigen::MatrixXd flat = draws.flattened();

  for (int j = 0; j < 2; ++j) {
    double mcse = std::sqrt(exact_cov(j, j) / diag.ess[j]);
    CHECK(std::abs(flat.col(j).mean() - exact_mean[j]) < 3.0 * mcse);
    double sd = std::sqrt((flat.col(j).array() - flat.col(j).mean()).square().sum() /
                          double(flat.rows() - 1));
    // sd of a sample sd is roughly sd/sqrt(2 ess)
    CHECK(std::abs(sd - std::sqrt(exact_cov(j, j))) <
          4.0 * std::sqrt(exact_cov(j, j) / (2.0 * diag.ess[j])));
  }
  double cov01 = ((flat.col(0).array() - flat.col(0).mean()) *
                  (flat.col(1).array() - flat.col(1).mean()))
                     .sum() /
                 double(flat.rows() - 1);
  CHECK(cov01 == doctest::Approx(exact_cov(0, 1)).epsilon(0.15));
  CHECK(diag.rhat.maxCoeff() < 1.05);
}

TEST_CASE("posterior matches a dense 2d quadrature on a logistic regression") {
  Rng gen(99);
  Dataset d;
  d.likelihood.family = Likelihood::Family::Bernoulli;
  for (double dose : {0.0, 1.0, 2.0})
    for (int i = 0; i < 30; ++i) {
      double p = expit(-0.5 + 0.8 * dose);
      d.rows.push_back({dose, gen.uniform() < p ? 1.0 : 0.0, 0.0, 0});
    }
  ModelSpec m = make_spec(ShapeKind::Linear, Likelihood::Family::Bernoulli, false);

  // independent integrand: bernoulli log likelihood plus t3(0,5) priors,
  // assembled from the pinned density helpers rather than the model code
  auto log_post = [&](double b1, double b2) {
    double lp = student_t_logpdf(b1, 3.0, 0.0, 5.0) + student_t_logpdf(b2, 3.0, 0.0, 5.0);
    for (const auto& r : d.rows) {
      double eta = b1 + b2 * r.dose;
      lp += r.response == 1.0 ? log_expit(eta) : log_expit(-eta);
    }
    return lp;
  };
  const int n1 = 361, n2 = 361;
  double lo1 = -3.0, hi1 = 2.0, lo2 = -1.6, hi2 = 3.2;
  Eigen::MatrixXd lp(n1, n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      lp(i, j) = log_post(lo1 + (hi1 - lo1) * i / (n1 - 1.0),
                          lo2 + (hi2 - lo2) * j / (n2 - 1.0));
  double m0 = lp.maxCoeff();
  Eigen::MatrixXd wgt = (lp.array() - m0).exp();
  double total = wgt.sum();
  double mean1 = 0.0, mean2 = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      mean1 += wgt(i, j) * (lo1 + (hi1 - lo1) * i / (n1 - 1.0));
      mean2 += wgt(i, j) * (lo2 + (hi2 - lo2) * j / (n2 - 1.0));
    }
  mean1 /= total;
  mean2 /= total;
  double var1 = 0.0, var2 = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      double x1 = lo1 + (hi1 - lo1) * i / (n1 - 1.0) - mean1;
      double x2 = lo2 + (hi2 - lo2) * j / (n2 - 1.0) - mean2;
      var1 += wgt(i, j) * x1 * x1;
      var2 += wgt(i, j) * x2 * x2;
    }
  var1 /= total;
  var2 /= total;

  McmcConfig cfg;
  cfg.chains = 4;
  cfg.warmup = 1500;
  cfg.post_warmup = 4000;
  cfg.thin = 2;
  cfg.seed = 17;
  PosteriorDraws draws = run_mcmc(m, d, cfg);
  DiagSummary diag = diagnostics(draws);
  Eigen::MatrixXd flat = draws.flattened();
  CHECK(std::abs(flat.col(0).mean() - mean1) < 3.0 * std::sqrt(var1 / diag.ess[0]));
  CHECK(std::abs(flat.col(1).mean() - mean2) < 3.0 * std::sqrt(var2 / diag.ess[1]));
  CHECK(diag.rhat.maxCoeff() < 1.05);
}

TEST_CASE("prior-only sampling recovers t quantiles in probability units") {
  ModelSpec m = make_spec(ShapeKind::Linear, Likelihood::Family::Bernoulli, false);
  Dataset empty;
  empty.likelihood = m.likelihood;
  McmcConfig cfg;
  cfg.chains = 4;
  cfg.warmup = 2000;
  cfg.post_warmup = 5000;
  cfg.thin = 5;
  cfg.seed = 7;
  PosteriorDraws draws = run_mcmc(m, empty, cfg);
  Eigen::MatrixXd flat = draws.flattened();
  // exact t3 quantiles scaled by 5
  double q25 = -0.7648923284043452 * 5.0;
  double q75 = 0.7648923284043452 * 5.0;
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs((flat.col(c).array() <= q25).cast<double>().mean() - 0.25) < 0.05);
    CHECK(std::abs((flat.col(c).array() <= 0.0).cast<double>().mean() - 0.50) < 0.05);
    CHECK(std::abs((flat.col(c).array() <= q75).cast<double>().mean() - 0.75) < 0.05);
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  Dataset d;
  d.likelihood.family = Likelihood::Family::NormalIndividual;
  Rng gen(3);
  for (double dose : {0.0, 0.5, 1.0})
    for (int i = 0; i < 10; ++i) d.rows.push_back({dose, dose + gen.normal(), 0.0, 0});
  ModelSpec m = make_spec(ShapeKind::Linear, Likelihood::Family::NormalIndividual, false);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.warmup = 300;
  cfg.post_warmup = 400;
  cfg.thin = 4;
  cfg.seed = 123;
  PosteriorDraws a = run_mcmc(m, d, cfg);
  PosteriorDraws b = run_mcmc(m, d, cfg);
  cfg.seed = 124;
  PosteriorDraws c = run_mcmc(m, d, cfg);
  REQUIRE(a.chains.size() == b.chains.size());
  for (std::size_t k = 0; k < a.chains.size(); ++k)
    CHECK((a.chains[k].array() == b.chains[k].array()).all());
  CHECK_FALSE((a.chains[0].array() == c.chains[0].array()).all());
  CHECK(a.kept_per_chain() == 100);
  CHECK(a.param_names == std::vector<std::string>{"b1", "b2", "sigma"});
}

TEST_CASE("ordinal fits keep cutpoints strictly increasing in every draw") {
  Rng gen(8);
  Dataset d;
  d.likelihood.family = Likelihood::Family::OrderedCategorical;
  d.likelihood.categories = 3;
  for (double dose : {0.0, 0.5, 1.0})
    for (int i = 0; i < 20; ++i) {
      double u = gen.uniform();
      double y = u < 0.3 ? 1.0 : u < 0.3 + 0.4 * (1 - dose * 0.5) ? 2.0 : 3.0;
      d.rows.push_back({dose, y, 0.0, 0});
    }
  ModelSpec m = make_spec(ShapeKind::Linear, Likelihood::Family::OrderedCategorical, true, 3);
  McmcConfig cfg;
  cfg.chains = 2;
  cfg.warmup = 500;
  cfg.post_warmup = 500;
  cfg.thin = 5;
  cfg.seed = 31;
  PosteriorDraws draws = run_mcmc(m, d, cfg);
  REQUIRE(draws.param_names.size() == 3);  // b2 cut1 cut2
  for (const auto& chain : draws.chains)
    for (Eigen::Index i = 0; i < chain.rows(); ++i) CHECK(chain(i, 2) > chain(i, 1));
  CHECK(draws.diag.accept_rate > 0.1);
  CHECK(draws.diag.accept_rate < 0.6);
}

TEST_CASE("split rank rhat separates mixed chains from split ones") {
  Rng gen(55);
  auto iid_chain = [&](double shift) {
    Eigen::VectorXd v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = shift + gen.normal();
    return v;
  };
  std::vector<Eigen::VectorXd> mixed = {iid_chain(0), iid_chain(0), iid_chain(0),
                                        iid_chain(0)};
  CHECK(split_rank_rhat(mixed) < 1.01);
  std::vector<Eigen::VectorXd> apart = {iid_chain(0), iid_chain(0), iid_chain(5),
                                        iid_chain(5)};
  CHECK(split_rank_rhat(apart) > 1.5);
  bool zero = false;
  std::vector<Eigen::VectorXd> flatlines = {Eigen::VectorXd::Constant(100, 2.0),
                                            Eigen::VectorXd::Constant(100, 2.0)};
  split_rank_rhat(flatlines, &zero);
  CHECK(zero);
}

TEST_CASE("bulk ess tracks the information content of the chains") {
  Rng gen(66);
  auto iid_chain = [&] {
    Eigen::VectorXd v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = gen.normal();
    return v;
  };
  std::vector<Eigen::VectorXd> iid = {iid_chain(), iid_chain(), iid_chain(), iid_chain()};
  double e_iid = bulk_ess(iid);
  CHECK(e_iid > 2000.0);
  auto ar_chain = [&] {
    Eigen::VectorXd v(1000);
    double x = 0.0;
    for (int i = 0; i < 1000; ++i) {
      x = 0.9 * x + gen.normal();
      v[i] = x;
    }
    return v;
  };
  std::vector<Eigen::VectorXd> sticky = {ar_chain(), ar_chain(), ar_chain(), ar_chain()};
  CHECK(bulk_ess(sticky) < 0.25 * e_iid);
}

TEST_CASE("sampler configuration validation rejects bad settings") {
  McmcConfig cfg;
  cfg.chains = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = McmcConfig{};
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = McmcConfig{};
  cfg.thin = cfg.post_warmup + 1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = McmcConfig{};
  cfg.target_accept = 1.0;
  CHECK_THROWS_AS(cfg.validate(), config_error);
  cfg = McmcConfig{};
  cfg.warmup = -1;
  CHECK_THROWS_AS(cfg.validate(), config_error);
}
