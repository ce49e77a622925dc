#include "doseforge/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"

namespace doseforge {

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
// floor for ordinal log-probabilities that underflow to zero
const double ordinal_log_floor = std::log(1e-300);
}  // namespace

int shape_param_count(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Linear: return 2;
    case ShapeKind::LogLinear: return 2;
    case ShapeKind::Emax: return 3;
    case ShapeKind::SigmoidEmax: return 4;
    case ShapeKind::Exponential: return 3;
    case ShapeKind::Logistic: return 4;
  }
  return 0;
}

std::string to_string(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Linear: return "linear";
    case ShapeKind::LogLinear: return "loglinear";
    case ShapeKind::Emax: return "emax";
    case ShapeKind::SigmoidEmax: return "sigemax";
    case ShapeKind::Exponential: return "exponential";
    case ShapeKind::Logistic: return "logistic";
  }
  return "?";
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "linear") return ShapeKind::Linear;
  if (name == "loglinear") return ShapeKind::LogLinear;
  if (name == "emax") return ShapeKind::Emax;
  if (name == "sigemax") return ShapeKind::SigmoidEmax;
  if (name == "exponential") return ShapeKind::Exponential;
  if (name == "logistic") return ShapeKind::Logistic;
  throw config_error("unknown shape kind: " + name);
}

void DoseResponseShape::validate() const {
  if (params.size() != shape_param_count(kind))
    throw config_error("shape " + to_string(kind) + " needs " +
                       std::to_string(shape_param_count(kind)) + " parameters");
  for (Eigen::Index i = 0; i < params.size(); ++i)
    if (!std::isfinite(params[i])) throw config_error("shape parameter not finite");
  if (kind == ShapeKind::Emax || kind == ShapeKind::SigmoidEmax) {
    if (!(params[2] > 0.0)) throw config_error("b3 must be positive");
  }
  if (kind == ShapeKind::SigmoidEmax || kind == ShapeKind::Logistic) {
    if (!(params[3] > 0.0)) throw config_error("b4 must be positive");
  }
  if (kind == ShapeKind::LogLinear && !(log_offset >= 0.0))
    throw config_error("loglinear offset must be nonnegative");
}

double DoseResponseShape::eval(double dose) const {
  const auto& b = params;
  switch (kind) {
    case ShapeKind::Linear:
      return b[0] + b[1] * dose;
    case ShapeKind::LogLinear: {
      double s = dose + log_offset;
      if (s <= 0.0) return neg_inf;
      return b[0] + b[1] * std::log(s);
    }
    case ShapeKind::Emax:
      return b[0] + b[1] * dose / (b[2] + dose);
    case ShapeKind::SigmoidEmax: {
      double dh = std::pow(dose, b[3]);
      return b[0] + b[1] * dh / (b[2] + dh);
    }
    case ShapeKind::Exponential:
      return b[0] + b[1] * std::exp(b[2] * dose);
    case ShapeKind::Logistic:
      return b[0] + b[1] / (1.0 + std::exp((b[2] - dose) / b[3]));
  }
  return 0.0;
}

std::string to_string(Link link) { return link == Link::Logit ? "logit" : "probit"; }

Link parse_link(const std::string& name) {
  if (name == "logit") return Link::Logit;
  if (name == "probit") return Link::Probit;
  throw config_error("unknown link: " + name);
}

double apply_inverse_link(Link link, double eta) {
  double p = link == Link::Logit ? expit(eta) : normal_cdf(eta);
  return std::clamp(p, link_eps, 1.0 - link_eps);
}

double apply_link(Link link, double p) {
  p = std::clamp(p, link_eps, 1.0 - link_eps);
  return link == Link::Logit ? logit(p) : normal_quantile(p);
}

std::string to_string(Likelihood::Family family) {
  using F = Likelihood::Family;
  switch (family) {
    case F::NormalIndividual: return "normal";
    case F::NormalSummary: return "normal_summary";
    case F::Bernoulli: return "bernoulli";
    case F::BinomialAggregate: return "binomial";
    case F::Poisson: return "poisson";
    case F::OrderedCategorical: return "ordinal";
  }
  return "?";
}

Likelihood::Family parse_likelihood_family(const std::string& name) {
  using F = Likelihood::Family;
  if (name == "normal") return F::NormalIndividual;
  if (name == "normal_summary") return F::NormalSummary;
  if (name == "bernoulli") return F::Bernoulli;
  if (name == "binomial") return F::BinomialAggregate;
  if (name == "poisson") return F::Poisson;
  if (name == "ordinal") return F::OrderedCategorical;
  throw config_error("unknown likelihood family: " + name);
}

void Likelihood::validate() const {
  if (family == Family::OrderedCategorical && categories < 2)
    throw config_error("ordinal likelihood needs at least 2 categories");
}

void Dataset::validate() const {
  likelihood.validate();
  using F = Likelihood::Family;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string at = "dataset row " + std::to_string(i + 1) + ": ";
    if (!(r.dose >= 0.0) || !std::isfinite(r.dose))
      throw config_error(at + "dose must be finite and nonnegative");
    if (!std::isfinite(r.response)) throw config_error(at + "response not finite");
    switch (likelihood.family) {
      case F::NormalIndividual:
        break;
      case F::NormalSummary:
        if (!(r.se > 0.0)) throw config_error(at + "standard error must be positive");
        break;
      case F::Bernoulli:
        if (r.response != 0.0 && r.response != 1.0)
          throw config_error(at + "binary response must be 0 or 1");
        break;
      case F::BinomialAggregate:
        if (r.trials < 1) throw config_error(at + "trial count must be >= 1");
        if (r.response != std::floor(r.response) || r.response < 0.0 ||
            r.response > r.trials)
          throw config_error(at + "count must be an integer in [0, trials]");
        break;
      case F::Poisson:
        if (r.response != std::floor(r.response) || r.response < 0.0)
          throw config_error(at + "count must be a nonnegative integer");
        break;
      case F::OrderedCategorical:
        if (r.response != std::floor(r.response) || r.response < 1.0 ||
            r.response > likelihood.categories)
          throw config_error(at + "category index must be in 1.." +
                             std::to_string(likelihood.categories));
        break;
    }
  }
}

std::vector<double> Dataset::distinct_doses() const {
  std::set<double> s;
  for (const auto& r : rows) s.insert(r.dose);
  return {s.begin(), s.end()};
}

void Prior::validate() const {
  if (!(scale > 0.0)) throw config_error("prior scale must be positive");
  if (kind != Kind::LogNormal && !(df > 0.0))
    throw config_error("prior df must be positive");
}

double Prior::logpdf(double x) const {
  switch (kind) {
    case Kind::StudentT: return student_t_logpdf(x, df, loc, scale);
    case Kind::HalfStudentT: return half_student_t_logpdf(x, df, scale);
    case Kind::LogNormal: return lognormal_logpdf(x, loc, scale);
  }
  return neg_inf;
}

double Prior::sample(Rng& rng) const {
  switch (kind) {
    case Kind::StudentT: {
      double z = rng.normal();
      double g = 2.0 * rng.gamma(0.5 * df);
      return loc + scale * z / std::sqrt(g / df);
    }
    case Kind::HalfStudentT: {
      double z = rng.normal();
      double g = 2.0 * rng.gamma(0.5 * df);
      return scale * std::abs(z / std::sqrt(g / df));
    }
    case Kind::LogNormal:
      return std::exp(loc + scale * rng.normal());
  }
  return 0.0;
}

int ModelSpec::shape_free_count() const {
  return shape_param_count(shape.kind) - (fix_intercept ? 1 : 0);
}

int ModelSpec::n_params() const {
  return shape_free_count() + (likelihood.has_sigma() ? 1 : 0) +
         likelihood.cutpoint_count();
}

std::vector<std::string> ModelSpec::param_names() const {
  std::vector<std::string> names;
  int np = shape_param_count(shape.kind);
  for (int j = fix_intercept ? 1 : 0; j < np; ++j)
    names.push_back("b" + std::to_string(j + 1));
  if (likelihood.has_sigma()) names.push_back("sigma");
  for (int k = 1; k <= likelihood.cutpoint_count(); ++k)
    names.push_back("cut" + std::to_string(k));
  return names;
}

DoseResponseShape ModelSpec::shape_at(const Eigen::VectorXd& params) const {
  DoseResponseShape s;
  s.kind = shape.kind;
  s.log_offset = shape.log_offset;
  int np = shape_param_count(shape.kind);
  s.params.resize(np);
  int src = 0;
  for (int j = 0; j < np; ++j) {
    if (j == 0 && fix_intercept)
      s.params[j] = 0.0;
    else
      s.params[j] = params[src++];
  }
  return s;
}

double ModelSpec::sigma_at(const Eigen::VectorXd& params) const {
  if (!likelihood.has_sigma()) throw config_error("model has no sigma parameter");
  return params[shape_free_count()];
}

Eigen::VectorXd ModelSpec::cutpoints_at(const Eigen::VectorXd& params) const {
  int nc = likelihood.cutpoint_count();
  return params.segment(shape_free_count() + (likelihood.has_sigma() ? 1 : 0), nc);
}

void ModelSpec::validate() const {
  likelihood.validate();
  if (fix_intercept && likelihood.family != Likelihood::Family::OrderedCategorical)
    throw config_error("fixed intercept is only used with ordinal likelihoods");
  if (static_cast<int>(priors.size()) != n_params())
    throw config_error("prior count " + std::to_string(priors.size()) +
                       " does not match parameter count " + std::to_string(n_params()));
  for (const auto& p : priors) p.validate();
}

bool ModelSpec::params_admissible(const Eigen::VectorXd& params) const {
  if (params.size() != n_params()) return false;
  for (Eigen::Index i = 0; i < params.size(); ++i)
    if (!std::isfinite(params[i])) return false;
  DoseResponseShape s = shape_at(params);
  if (s.kind == ShapeKind::Emax || s.kind == ShapeKind::SigmoidEmax)
    if (!(s.params[2] > 0.0)) return false;
  if (s.kind == ShapeKind::SigmoidEmax || s.kind == ShapeKind::Logistic)
    if (!(s.params[3] > 0.0)) return false;
  if (likelihood.has_sigma() && !(sigma_at(params) > 0.0)) return false;
  if (likelihood.cutpoint_count() > 0) {
    Eigen::VectorXd c = cutpoints_at(params);
    for (Eigen::Index k = 1; k < c.size(); ++k)
      if (!(c[k] > c[k - 1])) return false;
  }
  return true;
}

Eigen::VectorXd ordinal_probs(const Eigen::VectorXd& cutpoints, double eta) {
  int K = static_cast<int>(cutpoints.size()) + 1;
  Eigen::VectorXd p(K);
  double prev = 0.0;
  for (int k = 0; k < K - 1; ++k) {
    double cum = expit(cutpoints[k] - eta);
    p[k] = std::max(0.0, cum - prev);
    prev = cum;
  }
  p[K - 1] = std::max(0.0, 1.0 - prev);
  return p;
}

double linear_predictor(const ModelSpec& spec, const Eigen::VectorXd& params,
                        double dose) {
  return spec.shape_at(params).eval(dose);
}

double mean_response(const ModelSpec& spec, const Eigen::VectorXd& params, double dose) {
  double eta = linear_predictor(spec, params, dose);
  using F = Likelihood::Family;
  switch (spec.likelihood.family) {
    case F::Bernoulli:
    case F::BinomialAggregate:
      return apply_inverse_link(spec.likelihood.link, eta);
    case F::Poisson:
      return std::exp(eta);
    default:
      return eta;
  }
}

LogLik log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& params,
                      const Dataset& data) {
  using F = Likelihood::Family;
  LogLik out;
  out.per_row.resize(static_cast<Eigen::Index>(data.rows.size()));

  double sigma = spec.likelihood.has_sigma() ? spec.sigma_at(params) : 0.0;
  Eigen::VectorXd cuts;
  if (spec.likelihood.cutpoint_count() > 0) cuts = spec.cutpoints_at(params);
  const double log_2pi = std::log(2.0 * pi);

  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    double eta = linear_predictor(spec, params, r.dose);
    double ll;
    switch (spec.likelihood.family) {
      case F::NormalIndividual: {
        double z = (r.response - eta) / sigma;
        ll = -0.5 * z * z - std::log(sigma) - 0.5 * log_2pi;
        break;
      }
      case F::NormalSummary: {
        double z = (r.response - eta) / r.se;
        ll = -0.5 * z * z - std::log(r.se) - 0.5 * log_2pi;
        break;
      }
      case F::Bernoulli: {
        double p = apply_inverse_link(spec.likelihood.link, eta);
        ll = r.response > 0.5 ? std::log(p) : std::log1p(-p);
        break;
      }
      case F::BinomialAggregate: {
        double p = apply_inverse_link(spec.likelihood.link, eta);
        double n = r.trials, k = r.response;
        ll = lchoose(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
        break;
      }
      case F::Poisson: {
        ll = r.response * eta - std::exp(eta) - std::lgamma(r.response + 1.0);
        break;
      }
      case F::OrderedCategorical: {
        Eigen::VectorXd p = ordinal_probs(cuts, eta);
        double pk = p[static_cast<Eigen::Index>(r.response) - 1];
        ll = std::log(pk);
        if (ll < ordinal_log_floor || !std::isfinite(ll)) {
          ll = ordinal_log_floor;
          ++out.underflows;
        }
        break;
      }
      default:
        ll = neg_inf;
    }
    if (!std::isfinite(ll)) ll = neg_inf;
    out.per_row[static_cast<Eigen::Index>(i)] = ll;
  }
  out.total = out.per_row.sum();
  return out;
}

double log_prior(const ModelSpec& spec, const Eigen::VectorXd& params) {
  double lp = 0.0;
  for (Eigen::Index i = 0; i < params.size(); ++i)
    lp += spec.priors[static_cast<std::size_t>(i)].logpdf(params[i]);
  return lp;
}

double simulate_response(const ModelSpec& spec, const Eigen::VectorXd& params,
                         double dose, Rng& rng) {
  using F = Likelihood::Family;
  double eta = linear_predictor(spec, params, dose);
  switch (spec.likelihood.family) {
    case F::NormalIndividual:
      return eta + spec.sigma_at(params) * rng.normal();
    case F::NormalSummary:
      throw config_error("individual prediction undefined for summary-level data");
    case F::Bernoulli:
    case F::BinomialAggregate: {
      double p = apply_inverse_link(spec.likelihood.link, eta);
      return rng.uniform() < p ? 1.0 : 0.0;
    }
    case F::Poisson: {
      double lambda = std::exp(eta);
      if (!(lambda < 700.0)) {
        double draw = std::round(lambda + std::sqrt(lambda) * rng.normal());
        return std::max(0.0, draw);
      }
      double limit = std::exp(-lambda), prod = 1.0;
      double k = -1.0;
      do {
        prod *= rng.uniform();
        k += 1.0;
      } while (prod > limit);
      return k;
    }
    case F::OrderedCategorical: {
      Eigen::VectorXd p = ordinal_probs(spec.cutpoints_at(params), eta);
      double u = rng.uniform(), cum = 0.0;
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        cum += p[k];
        if (u <= cum) return static_cast<double>(k + 1);
      }
      return static_cast<double>(p.size());
    }
  }
  return 0.0;
}

namespace {

double response_sd(const Dataset& data) {
  using F = Likelihood::Family;
  switch (data.likelihood.family) {
    case F::Bernoulli:
    case F::BinomialAggregate:
    case F::OrderedCategorical:
      return 1.0;
    default:
      break;
  }
  if (data.rows.size() < 2) return 1.0;
  double n = static_cast<double>(data.rows.size());
  double mean = 0.0;
  for (const auto& r : data.rows) mean += r.response;
  mean /= n;
  double ss = 0.0;
  for (const auto& r : data.rows) ss += (r.response - mean) * (r.response - mean);
  double sd = std::sqrt(ss / (n - 1.0));
  return sd > 0.0 ? sd : 1.0;
}

double median_dose(const std::vector<double>& doses) {
  std::size_t n = doses.size();
  if (n % 2 == 1) return doses[n / 2];
  return 0.5 * (doses[n / 2 - 1] + doses[n / 2]);
}

}  // namespace

PriorSet default_priors(const DoseResponseShape& shape, const Likelihood& likelihood,
                        const Dataset& data) {
  if (data.rows.empty()) throw config_error("default_priors: empty dataset");
  bool fix_intercept = likelihood.family == Likelihood::Family::OrderedCategorical;
  double sy = response_sd(data);
  auto doses = data.distinct_doses();
  double med = median_dose(doses);

  // dose span, for priors on parameters that live on the dose axis
  double d_range = doses.back() - doses.front();
  if (!(d_range > 0.0)) d_range = std::max(std::abs(doses.back()), 1.0);

  PriorSet priors;
  int np = shape_param_count(shape.kind);
  for (int j = fix_intercept ? 1 : 0; j < np; ++j) {
    Prior p;
    bool emax_like =
        shape.kind == ShapeKind::Emax || shape.kind == ShapeKind::SigmoidEmax;
    if (emax_like && j == 2) {
      p.kind = Prior::Kind::LogNormal;
      p.loc = std::log(std::max(med, 1e-6));
      p.scale = 1.0;
    } else if (shape.kind == ShapeKind::SigmoidEmax && j == 3) {
      p.kind = Prior::Kind::LogNormal;
      p.loc = 0.0;
      p.scale = 0.5;
    } else if (shape.kind == ShapeKind::Exponential && j == 2) {
      // rate: inverse dose units, so scale by the span, not the response sd
      p.kind = Prior::Kind::StudentT;
      p.df = 3.0;
      p.loc = 0.0;
      p.scale = 5.0 / d_range;
    } else if (shape.kind == ShapeKind::Logistic && j == 2) {
      // inflection dose
      p.kind = Prior::Kind::StudentT;
      p.df = 3.0;
      p.loc = med;
      p.scale = 2.0 * d_range;
    } else if (shape.kind == ShapeKind::Logistic && j == 3) {
      // dose-axis steepness; wider than ~2 spans is indistinguishable from linear
      p.kind = Prior::Kind::LogNormal;
      p.loc = std::log(0.25 * d_range);
      p.scale = 1.0;
    } else {
      p.kind = Prior::Kind::StudentT;
      p.df = 3.0;
      p.loc = 0.0;
      p.scale = 5.0 * sy;
    }
    priors.push_back(p);
  }
  if (likelihood.has_sigma()) {
    Prior p;
    p.kind = Prior::Kind::HalfStudentT;
    p.df = 3.0;
    p.scale = 5.0 * sy;
    priors.push_back(p);
  }
  for (int k = 0; k < likelihood.cutpoint_count(); ++k) {
    Prior p;
    p.kind = Prior::Kind::StudentT;
    p.df = 3.0;
    p.loc = 0.0;
    p.scale = 5.0;
    priors.push_back(p);
  }
  return priors;
}

std::vector<ModelSpec> default_candidate_set(const Likelihood& likelihood,
                                             const Dataset& data) {
  likelihood.validate();
  if (data.rows.empty()) throw config_error("default_candidate_set: empty dataset");
  auto doses = data.distinct_doses();
  if (doses.size() < 3)
    throw config_error("model family not identifiable: fewer than 3 distinct doses");

  double smallest_positive = 0.0;
  for (double d : doses)
    if (d > 0.0) {
      smallest_positive = d;
      break;
    }
  double c0 = smallest_positive / 10.0;

  std::vector<ModelSpec> out;
  for (ShapeKind kind : {ShapeKind::Linear, ShapeKind::LogLinear, ShapeKind::Emax,
                         ShapeKind::SigmoidEmax, ShapeKind::Exponential,
                         ShapeKind::Logistic}) {
    ModelSpec m;
    m.shape.kind = kind;
    m.shape.log_offset = kind == ShapeKind::LogLinear ? c0 : 0.0;
    m.likelihood = likelihood;
    m.fix_intercept = likelihood.family == Likelihood::Family::OrderedCategorical;
    m.priors = default_priors(m.shape, likelihood, data);
    m.validate();
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace doseforge
