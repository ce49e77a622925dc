#include "doctest.h"

#include <cmath>
#include <set>

#include "doseforge/math.hpp"
#include "doseforge/models.hpp"
#include "doseforge/rng.hpp"
#include "test_util.hpp"

using namespace doseforge;
using testutil::make_shape;
using testutil::vec;

namespace {

Dataset tiny_normal_dataset() {
  Dataset d;
  d.likelihood.family = Likelihood::Family::NormalIndividual;
  for (double dose : {0.0, 0.5, 1.0})
    for (double y : {1.0, 2.0, 3.0}) d.rows.push_back({dose, y + dose, 0.0, 0});
  return d;
}

ModelSpec spec_for(ShapeKind kind, Likelihood::Family family,
                   Link link = Link::Logit, int categories = 0) {
  ModelSpec m;
  m.shape.kind = kind;
  if (kind == ShapeKind::LogLinear) m.shape.log_offset = 0.05;
  m.likelihood.family = family;
  m.likelihood.link = link;
  m.likelihood.categories = categories;
  m.fix_intercept = family == Likelihood::Family::OrderedCategorical;
  Dataset d = tiny_normal_dataset();
  d.likelihood = m.likelihood;
  if (family == Likelihood::Family::Bernoulli ||
      family == Likelihood::Family::OrderedCategorical)
    for (auto& r : d.rows) r.response = 1.0;
  if (family == Likelihood::Family::BinomialAggregate)
    for (auto& r : d.rows) { r.response = 1.0; r.trials = 5; }
  m.priors = default_priors(m.shape, m.likelihood, d);
  return m;
}

}  // namespace

TEST_CASE("shape evaluation matches hand-computed references") {
  CHECK(make_shape(ShapeKind::SigmoidEmax, {4, 15, 0.33, 2.8}).eval(0.0) ==
        doctest::Approx(4.0));
  CHECK(make_shape(ShapeKind::SigmoidEmax, {4, 15, 0.33, 2.8}).eval(1.0) ==
        doctest::Approx(15.278195488721805).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::SigmoidEmax, {4, 15, 0.33, 2.8}).eval(0.5) ==
        doctest::Approx(8.547861484467273).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::Emax, {-150, 150, 0.5}).eval(4.0) ==
        doctest::Approx(-16.666666666666657).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::Exponential, {-10, 5, 0.7}).eval(0.6) ==
        doctest::Approx(-2.3901922219068314).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::Logistic, {1, 9, 0.5, 0.15}).eval(0.7) ==
        doctest::Approx(8.122523254065596).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::LogLinear, {2, 3}, 0.02).eval(0.4) ==
        doctest::Approx(-0.6025017031141688).epsilon(1e-12));
  CHECK(make_shape(ShapeKind::Linear, {2, 3}).eval(0.4) == doctest::Approx(3.2));
}

TEST_CASE("all shapes with positive slope are nondecreasing in dose") {
  std::vector<DoseResponseShape> shapes = {
      make_shape(ShapeKind::Linear, {1, 2}),
      make_shape(ShapeKind::LogLinear, {1, 2}, 0.05),
      make_shape(ShapeKind::Emax, {1, 8, 0.4}),
      make_shape(ShapeKind::SigmoidEmax, {1, 8, 0.4, 3.0}),
      make_shape(ShapeKind::Exponential, {1, 2, 1.3}),
      make_shape(ShapeKind::Exponential, {1, -2, -1.3}),  // decaying deficit also rises
      make_shape(ShapeKind::Logistic, {1, 8, 0.5, 0.2})};
  for (const auto& s : shapes) {
    double prev = s.eval(0.0);
    for (double d = 0.01; d <= 2.0; d += 0.01) {
      double cur = s.eval(d);
      INFO(to_string(s.kind), " at dose ", d);
      CHECK(cur >= prev - 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("intercept parameter is the dose-zero mean where that holds") {
  CHECK(make_shape(ShapeKind::Linear, {7, 3}).eval(0.0) == doctest::Approx(7.0));
  CHECK(make_shape(ShapeKind::Emax, {7, 3, 0.2}).eval(0.0) == doctest::Approx(7.0));
  CHECK(make_shape(ShapeKind::SigmoidEmax, {7, 3, 0.2, 2.0}).eval(0.0) ==
        doctest::Approx(7.0));
  // exponential: b1 + b2 at dose zero
  CHECK(make_shape(ShapeKind::Exponential, {7, 3, 0.5}).eval(0.0) ==
        doctest::Approx(10.0));
}

TEST_CASE("probit-linked mean matches the normal cdf") {
  ModelSpec m = spec_for(ShapeKind::Linear, Likelihood::Family::Bernoulli, Link::Probit);
  CHECK(mean_response(m, vec({-1.28, 0.26}), 0.0) ==
        doctest::Approx(0.10027256795444212).epsilon(1e-10));
  CHECK(mean_response(m, vec({-1.28, 0.26}), 1.0) ==
        doctest::Approx(normal_cdf(-1.02)).epsilon(1e-12));
}

TEST_CASE("ordinal probabilities sum to one and respect the cutpoints") {
  Eigen::VectorXd cuts = vec({-1.0, 0.5, 2.0});
  for (double eta : {-3.0, 0.0, 1.7}) {
    Eigen::VectorXd p = ordinal_probs(cuts, eta);
    REQUIRE(p.size() == 4);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((p.array() >= 0.0).all());
    // P(Y <= 1) = expit(c1 - eta)
    CHECK(p[0] == doctest::Approx(expit(cuts[0] - eta)).epsilon(1e-12));
    CHECK(p[0] + p[1] == doctest::Approx(expit(cuts[1] - eta)).epsilon(1e-12));
  }
}

TEST_CASE("two-category ordinal collapses to bernoulli with a shifted intercept") {
  // ordinal with cutpoint c and latent eta: P(cat 2) = expit(eta - c),
  // which is the logit bernoulli model with intercept -c added to eta
  Eigen::VectorXd cuts = vec({0.8});
  double eta = 0.3;
  Eigen::VectorXd p = ordinal_probs(cuts, eta);
  CHECK(p[1] == doctest::Approx(expit(eta - 0.8)).epsilon(1e-12));
}

TEST_CASE("log likelihood per-row values sum to the total") {
  ModelSpec m = spec_for(ShapeKind::Linear, Likelihood::Family::NormalIndividual);
  Dataset d = tiny_normal_dataset();
  Eigen::VectorXd params = vec({1.5, 0.8, 1.2});  // b1 b2 sigma
  LogLik ll = log_likelihood(m, params, d);
  CHECK(ll.per_row.size() == static_cast<Eigen::Index>(d.rows.size()));
  CHECK(ll.per_row.sum() == doctest::Approx(ll.total).epsilon(1e-12));
  double want0 = normal_logpdf(d.rows[0].response, 1.5, 1.2);
  CHECK(ll.per_row[0] == doctest::Approx(want0).epsilon(1e-12));
}

TEST_CASE("aggregate binomial rows use the exact binomial mass") {
  ModelSpec m = spec_for(ShapeKind::Linear, Likelihood::Family::BinomialAggregate);
  Dataset d;
  d.likelihood = m.likelihood;
  d.rows.push_back({0.5, 3.0, 0.0, 10});
  Eigen::VectorXd params = vec({-0.4, 0.6});
  double p = expit(-0.4 + 0.6 * 0.5);
  double want = lchoose(10, 3) + 3 * std::log(p) + 7 * std::log1p(-p);
  CHECK(log_likelihood(m, params, d).total == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("poisson rows use the exact log mass with a log link") {
  ModelSpec m = spec_for(ShapeKind::Linear, Likelihood::Family::Poisson);
  Dataset d;
  d.likelihood = m.likelihood;
  d.rows.push_back({1.0, 4.0, 0.0, 0});
  Eigen::VectorXd params = vec({0.2, 0.3});
  double lam = std::exp(0.5);
  double want = 4.0 * 0.5 - lam - std::lgamma(5.0);
  CHECK(log_likelihood(m, params, d).total == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("summary rows weight by their standard errors") {
  ModelSpec m = spec_for(ShapeKind::Linear, Likelihood::Family::NormalSummary);
  Dataset d;
  d.likelihood = m.likelihood;
  d.rows.push_back({0.0, 2.0, 0.5, 0});
  d.rows.push_back({1.0, 3.0, 0.1, 0});
  Eigen::VectorXd params = vec({2.0, 1.0});
  double want = normal_logpdf(2.0, 2.0, 0.5) + normal_logpdf(3.0, 3.0, 0.1);
  CHECK(log_likelihood(m, params, d).total == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("admissibility guards positivity and ordering constraints") {
  ModelSpec emax = spec_for(ShapeKind::Emax, Likelihood::Family::NormalIndividual);
  CHECK(emax.params_admissible(vec({1, 2, 0.5, 1.0})));
  CHECK_FALSE(emax.params_admissible(vec({1, 2, 0.0, 1.0})));    // b3 > 0 required
  CHECK_FALSE(emax.params_admissible(vec({1, 2, 0.5, 0.0})));    // sigma > 0 required
  ModelSpec sig = spec_for(ShapeKind::SigmoidEmax, Likelihood::Family::NormalIndividual);
  CHECK_FALSE(sig.params_admissible(vec({1, 2, 0.5, -1.0, 1.0})));  // b4 > 0 required
  ModelSpec ord = spec_for(ShapeKind::Linear, Likelihood::Family::OrderedCategorical,
                           Link::Logit, 4);
  // fixed intercept: free params are b2 then three rising cutpoints
  CHECK(ord.params_admissible(vec({1.0, -1.0, 0.0, 2.0})));
  CHECK_FALSE(ord.params_admissible(vec({1.0, 0.0, -1.0, 2.0})));
}

TEST_CASE("parameter layout and names match the declared convention") {
  ModelSpec sig = spec_for(ShapeKind::SigmoidEmax, Likelihood::Family::NormalIndividual);
  CHECK(sig.n_params() == 5);
  auto names = sig.param_names();
  REQUIRE(names.size() == 5);
  CHECK(names[0] == "b1");
  CHECK(names[4] == "sigma");
  ModelSpec ord = spec_for(ShapeKind::Linear, Likelihood::Family::OrderedCategorical,
                           Link::Logit, 3);
  CHECK(ord.n_params() == 3);  // b2 + two cutpoints
  auto onames = ord.param_names();
  CHECK(onames[0] == "b2");
  CHECK(onames[1] == "cut1");
  CHECK(onames[2] == "cut2");
}

TEST_CASE("prior log densities delegate to the reference density functions") {
  Prior t{Prior::Kind::StudentT, 3.0, 0.5, 2.0};
  CHECK(t.logpdf(1.2) == doctest::Approx(student_t_logpdf(1.2, 3.0, 0.5, 2.0)));
  Prior h{Prior::Kind::HalfStudentT, 3.0, 0.0, 5.0};
  CHECK(h.logpdf(0.7) == doctest::Approx(half_student_t_logpdf(0.7, 3.0, 5.0)));
  CHECK(h.logpdf(-0.1) == -std::numeric_limits<double>::infinity());
  Prior ln{Prior::Kind::LogNormal, 0.0, 0.3, 0.8};
  CHECK(ln.logpdf(2.0) == doctest::Approx(lognormal_logpdf(2.0, 0.3, 0.8)));
  CHECK(ln.logpdf(0.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("prior sampling respects the support and rough scale") {
  Rng rng(11);
  Prior h{Prior::Kind::HalfStudentT, 3.0, 0.0, 5.0};
  Prior ln{Prior::Kind::LogNormal, 0.0, 1.0, 0.5};
  double median_acc = 0.0;
  for (int i = 0; i < 2000; ++i) {
    double a = h.sample(rng), b = ln.sample(rng);
    CHECK(a > 0.0);
    CHECK(b > 0.0);
    median_acc += std::log(b);
  }
  // log of a lognormal draw is normal(1, 0.5)
  CHECK(median_acc / 2000.0 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("default priors scale with the response and the dose axis") {
  Dataset d = tiny_normal_dataset();
  double sy = 0.0, mean = 0.0;
  for (const auto& r : d.rows) mean += r.response;
  mean /= double(d.rows.size());
  for (const auto& r : d.rows) sy += (r.response - mean) * (r.response - mean);
  sy = std::sqrt(sy / double(d.rows.size() - 1));

  auto lin = default_priors(make_shape(ShapeKind::Linear, {}), d.likelihood, d);
  REQUIRE(lin.size() == 3);  // b1 b2 sigma
  CHECK(lin[0].scale == doctest::Approx(5.0 * sy));
  CHECK(lin[1].scale == doctest::Approx(5.0 * sy));
  CHECK(lin[2].kind == Prior::Kind::HalfStudentT);
  CHECK(lin[2].scale == doctest::Approx(5.0 * sy));

  // emax midpoint prior centers on the median distinct dose
  auto emax = default_priors(make_shape(ShapeKind::Emax, {}), d.likelihood, d);
  REQUIRE(emax.size() == 4);
  CHECK(emax[2].kind == Prior::Kind::LogNormal);
  CHECK(emax[2].loc == doctest::Approx(std::log(0.5)));

  // dose-axis parameters scale with the dose span (here 1.0)
  auto expo = default_priors(make_shape(ShapeKind::Exponential, {}), d.likelihood, d);
  CHECK(expo[2].scale == doctest::Approx(5.0));
  auto logi = default_priors(make_shape(ShapeKind::Logistic, {}), d.likelihood, d);
  CHECK(logi[2].loc == doctest::Approx(0.5));   // inflection at median dose
  CHECK(logi[3].kind == Prior::Kind::LogNormal);
  CHECK(logi[3].loc == doctest::Approx(std::log(0.25)));

  // binary outcomes pin the response scale to 1
  Dataset b = d;
  b.likelihood.family = Likelihood::Family::Bernoulli;
  for (auto& r : b.rows) r.response = 1.0;
  auto bin = default_priors(make_shape(ShapeKind::Linear, {}), b.likelihood, b);
  CHECK(bin[0].scale == doctest::Approx(5.0));
}

TEST_CASE("default candidate set covers the six shapes exactly once") {
  Dataset d = tiny_normal_dataset();
  auto set = default_candidate_set(d.likelihood, d);
  REQUIRE(set.size() == 6);
  std::set<std::string> ids;
  for (const auto& m : set) ids.insert(m.id());
  CHECK(ids.size() == 6);
  for (const auto& m : set)
    if (m.shape.kind == ShapeKind::LogLinear)
      CHECK(m.shape.log_offset == doctest::Approx(0.05));  // smallest positive dose / 10
}

TEST_CASE("candidate set needs at least three distinct doses") {
  Dataset d;
  d.likelihood.family = Likelihood::Family::NormalIndividual;
  d.rows = {{0.0, 1.0, 0.0, 0}, {1.0, 2.0, 0.0, 0}};
  CHECK_THROWS_AS(default_candidate_set(d.likelihood, d), config_error);
}

TEST_CASE("dataset validation enforces per-family requirements") {
  Dataset d;
  d.likelihood.family = Likelihood::Family::NormalSummary;
  d.rows = {{0.0, 1.0, 0.0, 0}};  // se must be positive
  CHECK_THROWS_AS(d.validate(), config_error);
  d.likelihood.family = Likelihood::Family::Bernoulli;
  d.rows = {{0.0, 0.5, 0.0, 0}};  // response must be 0/1
  CHECK_THROWS_AS(d.validate(), config_error);
  d.likelihood.family = Likelihood::Family::BinomialAggregate;
  d.rows = {{0.0, 3.0, 0.0, 2}};  // successes exceed trials
  CHECK_THROWS_AS(d.validate(), config_error);
  d.likelihood.family = Likelihood::Family::OrderedCategorical;
  d.likelihood.categories = 3;
  d.rows = {{0.0, 4.0, 0.0, 0}};  // category out of range
  CHECK_THROWS_AS(d.validate(), config_error);
}
