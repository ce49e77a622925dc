#include "doseforge/math.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace doseforge {

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p outside (0,1)");

  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};

  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * pi) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

double student_t_logpdf(double x, double df, double loc, double scale) {
  double z = (x - loc) / scale;
  return std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
         0.5 * std::log(df * pi) - std::log(scale) -
         0.5 * (df + 1.0) * std::log1p(z * z / df);
}

double half_student_t_logpdf(double x, double df, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(2.0) + student_t_logpdf(x, df, 0.0, scale);
}

double lognormal_logpdf(double x, double log_loc, double log_scale) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  double z = (std::log(x) - log_loc) / log_scale;
  return -std::log(x) - std::log(log_scale) - 0.5 * std::log(2.0 * pi) - 0.5 * z * z;
}

double lchoose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double logsumexp(const Eigen::VectorXd& x) {
  if (x.size() == 0) return -std::numeric_limits<double>::infinity();
  double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

double quantile(Eigen::VectorXd v, double p) {
  if (v.size() == 0) throw std::invalid_argument("quantile: empty vector");
  std::sort(v.data(), v.data() + v.size());
  double h = (static_cast<double>(v.size()) - 1.0) * p;
  auto lo = static_cast<Eigen::Index>(std::floor(h));
  auto hi = std::min<Eigen::Index>(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

namespace {

// counts inversions by merge sort
std::uint64_t count_inversions(std::vector<double>& a, std::vector<double>& buf,
                               std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t inv = count_inversions(a, buf, lo, mid) + count_inversions(a, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      inv += mid - i;
      buf[k++] = a[j++];
    } else {
      buf[k++] = a[i++];
    }
  }
  while (i < mid) buf[k++] = a[i++];
  while (j < hi) buf[k++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo),
            buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return inv;
}

}  // namespace

double kendall_tau(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("kendall_tau: need paired vectors of length >= 2");
  auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
    if (x[static_cast<Eigen::Index>(i)] != x[static_cast<Eigen::Index>(j)])
      return x[static_cast<Eigen::Index>(i)] < x[static_cast<Eigen::Index>(j)];
    return y[static_cast<Eigen::Index>(i)] < y[static_cast<Eigen::Index>(j)];
  });
  std::vector<double> ys(n);
  for (std::size_t r = 0; r < n; ++r) ys[r] = y[static_cast<Eigen::Index>(idx[r])];
  std::vector<double> buf(n);
  std::uint64_t inv = count_inversions(ys, buf, 0, n);
  double total = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return 1.0 - 2.0 * static_cast<double>(inv) / total;
}

double ks_uniform_stat(Eigen::VectorXd u) {
  auto n = u.size();
  if (n == 0) throw std::invalid_argument("ks_uniform_stat: empty sample");
  std::sort(u.data(), u.data() + n);
  double d = 0.0, dn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d = std::max(d, (static_cast<double>(i) + 1.0) / dn - u[i]);
    d = std::max(d, u[i] - static_cast<double>(i) / dn);
  }
  return d;
}

double ks_two_sample_stat(Eigen::VectorXd a, Eigen::VectorXd b) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("ks_two_sample_stat: empty sample");
  std::sort(a.data(), a.data() + a.size());
  std::sort(b.data(), b.data() + b.size());
  double d = 0.0;
  Eigen::Index i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    double fa = static_cast<double>(i) / static_cast<double>(a.size());
    double fb = static_cast<double>(j) / static_cast<double>(b.size());
    d = std::max(d, std::abs(fa - fb));
  }
  return d;
}

double ks_uniform_critical(std::size_t n, double alpha) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c / std::sqrt(static_cast<double>(n));
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha) {
  double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return c * std::sqrt((nn + mm) / (nn * mm));
}

}  // namespace doseforge
