#include "doseforge/copula.hpp"

#include <algorithm>
#include <cmath>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"

namespace doseforge {

CopulaFamily parse_copula_family(const std::string& name) {
  if (name == "independence") return CopulaFamily::Independence;
  if (name == "gaussian") return CopulaFamily::Gaussian;
  if (name == "clayton") return CopulaFamily::Clayton;
  if (name == "gumbel") return CopulaFamily::Gumbel;
  if (name == "frank") return CopulaFamily::Frank;
  if (name == "joe") return CopulaFamily::Joe;
  throw config_error("unknown copula family: " + name);
}

std::string to_string(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Clayton: return "clayton";
    case CopulaFamily::Gumbel: return "gumbel";
    case CopulaFamily::Frank: return "frank";
    case CopulaFamily::Joe: return "joe";
  }
  return "?";
}

void CopulaSpec::validate() const {
  if (family != CopulaFamily::Independence && !std::isfinite(param))
    throw config_error("copula parameter must be finite");
  switch (family) {
    case CopulaFamily::Independence:
      break;
    case CopulaFamily::Gaussian:
      if (!(param > -1.0 && param < 1.0))
        throw config_error("gaussian copula needs rho in (-1,1)");
      break;
    case CopulaFamily::Clayton:
      if (!(param > 0.0)) throw config_error("clayton copula needs theta > 0");
      break;
    case CopulaFamily::Gumbel:
      if (!(param >= 1.0)) throw config_error("gumbel copula needs theta >= 1");
      break;
    case CopulaFamily::Frank:
      if (param == 0.0) throw config_error("frank copula needs theta != 0");
      break;
    case CopulaFamily::Joe:
      if (!(param >= 1.0)) throw config_error("joe copula needs theta >= 1");
      break;
  }
}

namespace {

constexpr double uv_eps = 1e-15;

double clamp_unit(double x) { return std::clamp(x, uv_eps, 1.0 - uv_eps); }

// positive alpha-stable with Laplace transform exp(-t^alpha), Kanter's form
double stable_frailty(Rng& rng, double alpha) {
  double u = rng.uniform() * pi;
  double w = rng.exponential();
  double a = std::sin(alpha * u);
  double b = std::sin((1.0 - alpha) * u);
  return std::pow(b / w, (1.0 - alpha) / alpha) * a / std::pow(std::sin(u), 1.0 / alpha);
}

// Sibuya(alpha) on {1,2,...}; exact inverse transform (Hofert's scheme)
double sibuya_frailty(Rng& rng, double alpha) {
  double u = rng.uniform();
  if (u <= alpha) return 1.0;
  double ginv = std::pow((1.0 - u) * std::tgamma(1.0 - alpha), -1.0 / alpha);
  double fg = std::floor(ginv);
  if (ginv > 1e16) return fg;
  // compare 1-u against 1/(fg * B(fg, 1-alpha))
  double log_thresh =
      std::lgamma(fg + 1.0 - alpha) - std::lgamma(fg + 1.0) - std::lgamma(1.0 - alpha);
  if (std::log1p(-u) < log_thresh) return std::ceil(ginv);
  return fg;
}

// Debye function of order one, simple composite Simpson
double debye1(double theta) {
  const int steps = 4000;
  double h = theta / steps;
  auto f = [](double t) { return t != 0.0 ? t / std::expm1(t) : 1.0; };
  double s = f(0.0) + f(theta);
  for (int i = 1; i < steps; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0 / theta;
}

double joe_tau(double theta) {
  if (theta == 1.0) return 0.0;
  double s = 0.0;
  for (int k = 1; k <= 2000000; ++k) {
    double term = 1.0 / (k * (theta * k + 2.0) * (theta * (k - 1) + 2.0));
    s += term;
    if (term < 1e-16 * (s + 1e-300)) break;
  }
  return 1.0 - 4.0 * s;
}

}  // namespace

UVSample sample_copula(const CopulaSpec& spec, Eigen::Index n, std::uint64_t seed) {
  spec.validate();
  if (n <= 0) throw config_error("sample_copula: n must be positive");

  UVSample out;
  out.uv.resize(n, 2);
  out.seed = seed;
  Rng rng(seed);
  double th = spec.param;

  switch (spec.family) {
    case CopulaFamily::Independence:
      for (Eigen::Index i = 0; i < n; ++i) {
        out.uv(i, 0) = rng.uniform();
        out.uv(i, 1) = rng.uniform();
      }
      break;

    case CopulaFamily::Gaussian: {
      double r = std::sqrt(1.0 - th * th);
      for (Eigen::Index i = 0; i < n; ++i) {
        double z1 = rng.normal();
        double z2 = rng.normal();
        out.uv(i, 0) = clamp_unit(normal_cdf(z1));
        out.uv(i, 1) = clamp_unit(normal_cdf(th * z1 + r * z2));
      }
      break;
    }

    case CopulaFamily::Clayton:
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = rng.gamma(1.0 / th);
        double e1 = rng.exponential();
        double e2 = rng.exponential();
        out.uv(i, 0) = clamp_unit(std::pow(1.0 + e1 / s, -1.0 / th));
        out.uv(i, 1) = clamp_unit(std::pow(1.0 + e2 / s, -1.0 / th));
      }
      break;

    case CopulaFamily::Gumbel: {
      double alpha = 1.0 / th;
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = th == 1.0 ? 1.0 : stable_frailty(rng, alpha);
        double e1 = rng.exponential();
        double e2 = rng.exponential();
        out.uv(i, 0) = clamp_unit(std::exp(-std::pow(e1 / s, alpha)));
        out.uv(i, 1) = clamp_unit(std::exp(-std::pow(e2 / s, alpha)));
      }
      break;
    }

    case CopulaFamily::Frank: {
      // conditional inversion of C(v|u)
      double em = std::expm1(-th);
      for (Eigen::Index i = 0; i < n; ++i) {
        double u = rng.uniform();
        double w = rng.uniform();
        double v = -std::log1p(w * em / (w + std::exp(-th * u) * (1.0 - w))) / th;
        out.uv(i, 0) = clamp_unit(u);
        out.uv(i, 1) = clamp_unit(v);
      }
      break;
    }

    case CopulaFamily::Joe: {
      double alpha = 1.0 / th;
      for (Eigen::Index i = 0; i < n; ++i) {
        double s = th == 1.0 ? 1.0 : sibuya_frailty(rng, alpha);
        double e1 = rng.exponential();
        double e2 = rng.exponential();
        // psi(t) = 1 - (1 - exp(-t))^(1/theta), written to stay accurate near 0 and 1
        auto psi = [&](double t) {
          return -std::expm1(std::log1p(-std::exp(-t)) * alpha);
        };
        out.uv(i, 0) = clamp_unit(psi(e1 / s));
        out.uv(i, 1) = clamp_unit(psi(e2 / s));
      }
      break;
    }
  }
  return out;
}

double tau_analytic(const CopulaSpec& spec) {
  spec.validate();
  double th = spec.param;
  switch (spec.family) {
    case CopulaFamily::Independence: return 0.0;
    case CopulaFamily::Gaussian: return 2.0 / pi * std::asin(th);
    case CopulaFamily::Clayton: return th / (th + 2.0);
    case CopulaFamily::Gumbel: return 1.0 - 1.0 / th;
    case CopulaFamily::Frank: {
      double a = std::abs(th);
      double tau = 1.0 - 4.0 / a * (1.0 - debye1(a));
      return th > 0 ? tau : -tau;
    }
    case CopulaFamily::Joe: return joe_tau(th);
  }
  return 0.0;
}

}  // namespace doseforge
