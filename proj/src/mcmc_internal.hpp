#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doseforge/math.hpp"
#include "doseforge/models.hpp"

// Working-space machinery shared between the sampler and its tests.

namespace doseforge::mcmc_detail {

inline double softplus(double t) { return t > 30.0 ? t : std::log1p(std::exp(t)); }

inline constexpr double kLn2 = 0.6931471805599453;

// Working-space charts. Beyond log transforms for positivity, two shapes get
// coordinates that stay well-conditioned through their weakly identified
// limits, where the natural coefficients run off along curved ridges:
//
// - Exponential (free intercept): sample the fitted values at the bottom and
//   top observed doses, (b1+b2*e^(b3*a), b1+b2*e^(b3*D), b3). Both anchors are
//   pinned by data whichever way the curve bends, unlike (b1, b2), which run
//   off hyperbolically near the b3 -> 0 linear limit and decouple entirely
//   once the curve saturates inside the dose range.
// - Exponential (fixed intercept): the predictor b2*e^(b3*d) is log-linear in
//   d, so sample (asinh(b2*e^(b3*D)), b3): a log-scale top-dose anchor that
//   stays smooth through b2 = 0 and turns the multiplicative (b2, b3)
//   trade-off into a linear one.
// - Emax/SigmoidEmax: replace b2 by the linear predictor at the top dose,
//   v = b1 + b2*D^b4/(b3+D^b4), which the data pin down in both the step
//   (b3 -> 0) and linear (b3 -> inf) limits.
// - Logistic: sample the fitted values at the end doses together with the
//   soft-scaled location l = b3/(b4 + 0.1*span) and log b4. l tracks b3 when
//   the curve is steep and b3/b4 when it is shallow, so the step, linear and
//   off-range ridges are all roughly straight in these coordinates.
struct Transform {
  enum class Kind { Identity, Log };
  enum class Chart { None, ExpChord, ExpSinh, HillTop, LogisticChord };
  std::vector<Kind> kind;  // per free parameter, cutpoint block excluded
  int cut_start = -1;
  int cut_count = 0;
  Chart chart = Chart::None;
  double dbot = 0.0;       // bottom anchor dose
  double dtop = 0.0;       // top anchor dose
  double soft = 0.0;       // location softening for LogisticChord
  int amp = -1;            // free-parameter index of the slope b2
  bool hill_power = false; // SigmoidEmax: power parameter at amp+2
  bool free_intercept = true;

  static Transform for_spec(const ModelSpec& spec, double bot_dose, double top_dose) {
    Transform t;
    t.free_intercept = !spec.fix_intercept;
    int np = shape_param_count(spec.shape.kind);
    for (int j = spec.fix_intercept ? 1 : 0; j < np; ++j) {
      bool positive =
          ((spec.shape.kind == ShapeKind::Emax || spec.shape.kind == ShapeKind::SigmoidEmax) && j == 2) ||
          ((spec.shape.kind == ShapeKind::SigmoidEmax || spec.shape.kind == ShapeKind::Logistic) && j == 3);
      t.kind.push_back(positive ? Kind::Log : Kind::Identity);
    }
    if (spec.likelihood.has_sigma()) t.kind.push_back(Kind::Log);
    if (spec.likelihood.cutpoint_count() > 0) {
      t.cut_start = static_cast<int>(t.kind.size());
      t.cut_count = spec.likelihood.cutpoint_count();
    }
    if (top_dose > 0.0) {
      if (spec.shape.kind == ShapeKind::Exponential) {
        if (!spec.fix_intercept && top_dose > bot_dose) {
          t.chart = Chart::ExpChord;
          t.dbot = bot_dose;
          t.dtop = top_dose;
        } else if (spec.fix_intercept) {
          t.chart = Chart::ExpSinh;
          t.dtop = top_dose;
        }
      } else if (spec.shape.kind == ShapeKind::Emax ||
                 spec.shape.kind == ShapeKind::SigmoidEmax) {
        t.chart = Chart::HillTop;
        t.dtop = top_dose;
        t.amp = spec.fix_intercept ? 0 : 1;
        t.hill_power = spec.shape.kind == ShapeKind::SigmoidEmax;
      } else if (spec.shape.kind == ShapeKind::Logistic && top_dose > bot_dose) {
        t.chart = Chart::LogisticChord;
        t.dbot = bot_dose;
        t.dtop = top_dose;
        t.soft = 0.1 * (top_dose - bot_dose);
        t.amp = spec.fix_intercept ? 0 : 1;
      }
    }
    return t;
  }

  int dim() const { return static_cast<int>(kind.size()) + cut_count; }

  // 1 + b3/D^b4, the ratio between the Hill amplitude and the top-dose rise
  double hill_ratio(double b3, double b4) const {
    return 1.0 + b3 * std::exp(-b4 * std::log(dtop));
  }

  // log(expit(ta + u) - expit(ta)) for u > 0; the factored form stays
  // accurate when both ends saturate
  static double log_expit_diff(double ta, double u) {
    return log_expit(ta) + log_expit(-(ta + u)) +
           (u > 30.0 ? u : std::log(std::expm1(u)));
  }

  Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z(x.size());
    for (std::size_t i = 0; i < kind.size(); ++i) {
      auto ii = static_cast<Eigen::Index>(i);
      z[ii] = kind[i] == Kind::Log ? std::log(x[ii]) : x[ii];
    }
    if (cut_count > 0) {
      z[cut_start] = x[cut_start];
      for (int k = 1; k < cut_count; ++k)
        z[cut_start + k] = std::log(x[cut_start + k] - x[cut_start + k - 1]);
    }
    if (chart == Chart::ExpChord) {
      z[0] = x[0] + x[1] * std::exp(x[2] * dbot);
      z[1] = x[0] + x[1] * std::exp(x[2] * dtop);
      z[2] = x[2];
    } else if (chart == Chart::ExpSinh) {
      z[0] = std::asinh(x[0] * std::exp(x[1] * dtop));
    } else if (chart == Chart::HillTop) {
      double b1 = free_intercept ? x[0] : 0.0;
      double b4 = hill_power ? x[amp + 2] : 1.0;
      z[amp] = b1 + x[amp] / hill_ratio(x[amp + 1], b4);
    } else if (chart == Chart::LogisticChord) {
      double b3 = x[amp + 1], b4 = x[amp + 2];
      z[amp + 1] = b3 / (b4 + soft);
      if (free_intercept) {
        z[0] = x[0] + x[1] * expit((dbot - b3) / b4);
        z[1] = x[0] + x[1] * expit((dtop - b3) / b4);
      } else {
        z[0] = x[0] * expit((dtop - b3) / b4);
      }
    }
    return z;
  }

  Eigen::VectorXd to_natural(const Eigen::VectorXd& z) const {
    Eigen::VectorXd x(z.size());
    for (std::size_t i = 0; i < kind.size(); ++i) {
      auto ii = static_cast<Eigen::Index>(i);
      x[ii] = kind[i] == Kind::Log ? std::exp(z[ii]) : z[ii];
    }
    if (cut_count > 0) {
      x[cut_start] = z[cut_start];
      for (int k = 1; k < cut_count; ++k)
        x[cut_start + k] = x[cut_start + k - 1] + std::exp(z[cut_start + k]);
    }
    if (chart == Chart::ExpChord) {
      x[2] = z[2];
      double q = (z[1] - z[0]) / std::expm1(z[2] * (dtop - dbot));
      x[1] = q * std::exp(-z[2] * dbot);
      x[0] = z[0] - q;
    } else if (chart == Chart::ExpSinh) {
      double w = z[0];
      x[0] = std::abs(w) > 30.0
                 ? std::copysign(std::exp(std::abs(w) - kLn2 - z[1] * dtop), w)
                 : std::sinh(w) * std::exp(-z[1] * dtop);
    } else if (chart == Chart::HillTop) {
      double b1 = free_intercept ? x[0] : 0.0;
      double b4 = hill_power ? x[amp + 2] : 1.0;
      x[amp] = (z[amp] - b1) * hill_ratio(x[amp + 1], b4);
    } else if (chart == Chart::LogisticChord) {
      double b4 = x[amp + 2];
      double b3 = z[amp + 1] * (b4 + soft);
      x[amp + 1] = b3;
      double ta = (dbot - b3) / b4, u = (dtop - dbot) / b4;
      if (free_intercept) {
        double b2 = (z[1] - z[0]) * std::exp(-log_expit_diff(ta, u));
        x[1] = b2;
        x[0] = z[0] - b2 * expit(ta);
      } else {
        x[0] = z[0] * std::exp(-log_expit(ta + u));
      }
    }
    return x;
  }

  double log_jacobian(const Eigen::VectorXd& z) const {
    double lj = 0.0;
    for (std::size_t i = 0; i < kind.size(); ++i)
      if (kind[i] == Kind::Log) lj += z[static_cast<Eigen::Index>(i)];
    for (int k = 1; k < cut_count; ++k) lj += z[cut_start + k];
    if (chart == Chart::ExpChord) {
      lj -= z[2] * dbot + std::log(std::abs(std::expm1(z[2] * (dtop - dbot))));
    } else if (chart == Chart::ExpSinh) {
      double w = std::abs(z[0]);
      lj += (w > 30.0 ? w - kLn2 : std::log(std::cosh(w))) - z[1] * dtop;
    } else if (chart == Chart::HillTop) {
      double b4 = hill_power ? std::exp(z[amp + 2]) : 1.0;
      lj += softplus(z[amp + 1] - b4 * std::log(dtop));
    } else if (chart == Chart::LogisticChord) {
      double b4 = std::exp(z[amp + 2]);
      double b3 = z[amp + 1] * (b4 + soft);
      double ta = (dbot - b3) / b4, u = (dtop - dbot) / b4;
      lj += std::log(b4 + soft);
      lj -= free_intercept ? log_expit_diff(ta, u) : log_expit(ta + u);
    }
    return lj;
  }
};

// rough per-coordinate scale of the working space, taken from the priors
Eigen::VectorXd working_scales(const ModelSpec& spec, const Transform& transform);

// warmup split into doubling adaptation windows
std::vector<int> adaptation_windows(int warmup);

}  // namespace doseforge::mcmc_detail
