#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "doseforge/math.hpp"

using namespace doseforge;

TEST_CASE("expit and logit invert each other and stay finite in the tails") {
  for (double x : {-40.0, -3.0, -0.1, 0.0, 0.7, 25.0}) {
    double p = expit(x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(logit(p) == doctest::Approx(x).epsilon(1e-9));
  }
  CHECK(expit(-800.0) >= 0.0);
  CHECK(std::isfinite(log_expit(-800.0)));
  CHECK(log_expit(-800.0) == doctest::Approx(-800.0));
  CHECK(log_expit(50.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("log1pexp matches naive formula where the naive one is safe") {
  for (double x : {-10.0, -1.0, 0.0, 2.5, 30.0})
    CHECK(log1pexp(x) == doctest::Approx(std::log1p(std::exp(x))).epsilon(1e-12));
  CHECK(log1pexp(900.0) == doctest::Approx(900.0));
}

TEST_CASE("normal_cdf and normal_quantile hit reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.1) == doctest::Approx(-1.2815515655446004).epsilon(1e-12));
  CHECK(normal_quantile(1e-8) == doctest::Approx(-5.612001244174789).epsilon(1e-10));
  for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("normal_logpdf matches the closed form") {
  for (double x : {-2.0, 0.0, 1.3}) {
    double want = -0.5 * std::log(2.0 * pi) - 0.5 * x * x;
    CHECK(normal_logpdf(x) == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("density log values match independently computed references") {
  // constants below were computed with an independent implementation
  CHECK(student_t_logpdf(1.2, 3.0, 0.5, 2.0) ==
        doctest::Approx(-1.7740793788824267).epsilon(1e-12));
  CHECK(half_student_t_logpdf(0.7, 3.0, 5.0) ==
        doctest::Approx(-1.9302037487281103).epsilon(1e-12));
  CHECK(lognormal_logpdf(2.0, 0.3, 0.8) ==
        doctest::Approx(-1.509695838686529).epsilon(1e-12));
}

TEST_CASE("student t is symmetric about its location") {
  CHECK(student_t_logpdf(3.0, 4.0, 1.0, 1.5) ==
        doctest::Approx(student_t_logpdf(-1.0, 4.0, 1.0, 1.5)).epsilon(1e-14));
}

TEST_CASE("half student t integrates to one on the positive axis") {
  double h = 0.001, total = 0.0;
  for (double x = h / 2; x < 200.0; x += h)
    total += std::exp(half_student_t_logpdf(x, 3.0, 2.0)) * h;
  CHECK(total == doctest::Approx(1.0).epsilon(2e-3));
}

TEST_CASE("lchoose agrees with exact binomial coefficients") {
  CHECK(lchoose(10, 3) == doctest::Approx(std::log(120.0)).epsilon(1e-13));
  CHECK(lchoose(5, 0) == doctest::Approx(0.0));
  CHECK(lchoose(5, 5) == doctest::Approx(0.0));
  CHECK(lchoose(52, 5) == doctest::Approx(std::log(2598960.0)).epsilon(1e-12));
}

TEST_CASE("logsumexp matches the naive sum and survives large inputs") {
  Eigen::VectorXd v(3);
  v << std::log(1.0), std::log(2.0), std::log(3.0);
  CHECK(logsumexp(v) == doctest::Approx(std::log(6.0)).epsilon(1e-13));
  Eigen::VectorXd big(2);
  big << 1000.0, 1000.0 + std::log(2.0);
  CHECK(logsumexp(big) == doctest::Approx(1000.0 + std::log(3.0)).epsilon(1e-13));
}

TEST_CASE("quantile uses linear interpolation between order statistics") {
  Eigen::VectorXd v(10);
  for (int i = 0; i < 10; ++i) v[i] = i + 1;
  CHECK(quantile(v, 0.25) == doctest::Approx(3.25).epsilon(1e-14));
  CHECK(quantile(v, 0.5) == doctest::Approx(5.5).epsilon(1e-14));
  CHECK(quantile(v, 0.0) == doctest::Approx(1.0));
  CHECK(quantile(v, 1.0) == doctest::Approx(10.0));
  Eigen::VectorXd shuffled(4);
  shuffled << 4.0, 1.0, 3.0, 2.0;
  CHECK(quantile(shuffled, 0.5) == doctest::Approx(2.5));
}

TEST_CASE("kendall_tau handles perfect order, reversal, and a hand case") {
  Eigen::VectorXd x(5), y(5);
  x << 1, 2, 3, 4, 5;
  y << 2, 4, 6, 8, 10;
  CHECK(kendall_tau(x, y) == doctest::Approx(1.0));
  y = -y;
  CHECK(kendall_tau(x, y) == doctest::Approx(-1.0));
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 1, 3, 2, 4;
  // one discordant pair among six: (5 - 1)/6
  CHECK(kendall_tau(a, b) == doctest::Approx(4.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("ks statistics and critical values behave sensibly") {
  Eigen::VectorXd u(4);
  u << 0.1, 0.2, 0.3, 0.4;
  // sup |F_n - u|: at u=0.4 the empirical cdf has reached 1
  CHECK(ks_uniform_stat(u) == doctest::Approx(0.6).epsilon(1e-12));
  Eigen::VectorXd same = u;
  CHECK(ks_two_sample_stat(u, same) == doctest::Approx(0.0));
  Eigen::VectorXd shifted(4);
  shifted << 0.6, 0.7, 0.8, 0.9;
  CHECK(ks_two_sample_stat(u, shifted) == doctest::Approx(1.0));
  CHECK(ks_uniform_critical(100, 0.001) > ks_uniform_critical(100, 0.05));
  CHECK(ks_uniform_critical(10000, 0.001) < ks_uniform_critical(100, 0.001));
}

TEST_CASE("chi-square quantile with two degrees of freedom is closed form") {
  CHECK(chi2_quantile_2df(0.95) == doctest::Approx(5.991464547107982).epsilon(1e-13));
  CHECK(chi2_quantile_2df(0.5) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-13));
}
