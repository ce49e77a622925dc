#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "doseforge/errors.hpp"

namespace doseforge {

class Rng;

// ---- dose-response mean functions ----

enum class ShapeKind { Linear, LogLinear, Emax, SigmoidEmax, Exponential, Logistic };

int shape_param_count(ShapeKind kind);
std::string to_string(ShapeKind kind);
ShapeKind parse_shape_kind(const std::string& name);

struct DoseResponseShape {
  ShapeKind kind = ShapeKind::Linear;
  Eigen::VectorXd params;
  double log_offset = 0.0;  // LogLinear only: mean is b1 + b2*log(dose + log_offset)

  void validate() const;
  double eval(double dose) const;
};

inline double eval_mean(const DoseResponseShape& shape, double dose) { return shape.eval(dose); }

// ---- links and likelihoods ----

enum class Link { Logit, Probit };
std::string to_string(Link link);
Link parse_link(const std::string& name);

// inverse link clamped to (eps, 1-eps)
inline constexpr double link_eps = 1e-12;
double apply_inverse_link(Link link, double eta);
double apply_link(Link link, double p);

struct Likelihood {
  enum class Family {
    NormalIndividual,    // free sigma
    NormalSummary,       // per-row standard error supplied
    Bernoulli,           // logit or probit link
    BinomialAggregate,   // per-row trial count, logit or probit link
    Poisson,             // log link
    OrderedCategorical   // K categories, cumulative logit
  };
  Family family = Family::NormalIndividual;
  Link link = Link::Logit;
  int categories = 0;

  bool has_sigma() const { return family == Family::NormalIndividual; }
  int cutpoint_count() const {
    return family == Family::OrderedCategorical ? categories - 1 : 0;
  }
  void validate() const;
};
std::string to_string(Likelihood::Family family);
Likelihood::Family parse_likelihood_family(const std::string& name);

// ---- data ----

struct Observation {
  double dose = 0.0;
  double response = 0.0;
  double se = 0.0;  // NormalSummary only
  int trials = 0;   // BinomialAggregate only
};

struct Dataset {
  std::vector<Observation> rows;
  Likelihood likelihood;

  void validate() const;
  std::vector<double> distinct_doses() const;  // sorted ascending
};

// ---- priors ----

struct Prior {
  enum class Kind { StudentT, HalfStudentT, LogNormal };
  Kind kind = Kind::StudentT;
  double df = 3.0;
  double loc = 0.0;  // LogNormal: location of log(x)
  double scale = 5.0;

  void validate() const;
  double logpdf(double x) const;
  double sample(Rng& rng) const;
};
using PriorSet = std::vector<Prior>;

// ---- model specification ----

// Free parameter layout: shape parameters (b1 dropped when fix_intercept),
// then sigma for NormalIndividual, then ordered cutpoints for OrderedCategorical.
struct ModelSpec {
  DoseResponseShape shape;  // carries kind and log_offset; params unused here
  Likelihood likelihood;
  PriorSet priors;
  bool fix_intercept = false;

  std::string id() const { return to_string(shape.kind); }
  int shape_free_count() const;
  int n_params() const;
  std::vector<std::string> param_names() const;

  DoseResponseShape shape_at(const Eigen::VectorXd& params) const;
  double sigma_at(const Eigen::VectorXd& params) const;
  Eigen::VectorXd cutpoints_at(const Eigen::VectorXd& params) const;

  void validate() const;
  bool params_admissible(const Eigen::VectorXd& params) const;
};

// ---- evaluation ----

struct LogLik {
  double total = 0.0;
  Eigen::VectorXd per_row;
  long underflows = 0;
};

LogLik log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& params,
                      const Dataset& data);
double log_prior(const ModelSpec& spec, const Eigen::VectorXd& params);

double linear_predictor(const ModelSpec& spec, const Eigen::VectorXd& params, double dose);
// response-scale mean: identity for normal, inverse link for rates, exp for Poisson,
// the latent predictor for ordinal
double mean_response(const ModelSpec& spec, const Eigen::VectorXd& params, double dose);

// ordinal category probabilities from cutpoints and linear predictor
Eigen::VectorXd ordinal_probs(const Eigen::VectorXd& cutpoints, double eta);

// one simulated response at the given parameters (individual-level)
double simulate_response(const ModelSpec& spec, const Eigen::VectorXd& params,
                         double dose, Rng& rng);

// ---- defaults ----

PriorSet default_priors(const DoseResponseShape& shape, const Likelihood& likelihood,
                        const Dataset& data);
std::vector<ModelSpec> default_candidate_set(const Likelihood& likelihood,
                                             const Dataset& data);

}  // namespace doseforge
