#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace doseforge {

inline constexpr double pi = 3.14159265358979323846;

// ---- logistic helpers ----

inline double log1pexp(double x) {
  // stable log(1 + e^x)
  if (x > 33.3) return x;
  if (x > -37.0) return std::log1p(std::exp(x));
  return std::exp(x);
}

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double log_expit(double x) { return -log1pexp(-x); }

// ---- normal distribution ----

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
inline double normal_logpdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * pi); }

// Inverse normal CDF: Acklam's rational approximation plus one Halley step,
// good to ~1e-15 over (0,1).
double normal_quantile(double p);

// ---- log densities used for priors ----

double student_t_logpdf(double x, double df, double loc, double scale);
double half_student_t_logpdf(double x, double df, double scale);
double lognormal_logpdf(double x, double log_loc, double log_scale);

// chi-square(2) quantile, used for bivariate normal contour radii
inline double chi2_quantile_2df(double level) { return -2.0 * std::log1p(-level); }

double lchoose(double n, double k);

// ---- reductions ----

double logsumexp(const Eigen::VectorXd& x);

// sample quantile with linear interpolation (R type 7); v need not be sorted
double quantile(Eigen::VectorXd v, double p);

// ---- rank statistics ----

// Kendall rank correlation, O(n log n) inversion count (assumes continuous data)
double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// one-sample KS statistic against U(0,1)
double ks_uniform_stat(Eigen::VectorXd u);
// two-sample KS statistic
double ks_two_sample_stat(Eigen::VectorXd a, Eigen::VectorXd b);
// asymptotic critical values; reject if stat exceeds
double ks_uniform_critical(std::size_t n, double alpha);
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);

}  // namespace doseforge
