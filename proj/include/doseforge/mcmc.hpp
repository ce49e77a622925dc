#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "doseforge/models.hpp"

namespace doseforge {

struct McmcConfig {
  int chains = 4;
  int warmup = 4000;
  int post_warmup = 5000;
  int thin = 5;
  std::uint64_t seed = 0;
  double target_accept = 0.3;

  void validate() const;
  int kept_per_chain() const { return post_warmup / thin; }
};

struct Diagnostics {
  Eigen::VectorXd rhat;
  Eigen::VectorXd ess;
  double accept_rate = 0.0;
  long underflows = 0;
  bool zero_variance = false;
};

struct PosteriorDraws {
  std::vector<std::string> param_names;
  std::vector<Eigen::MatrixXd> chains;  // kept iterations x parameters, natural scale
  ModelSpec spec;
  Diagnostics diag;

  Eigen::Index kept_per_chain() const { return chains.empty() ? 0 : chains[0].rows(); }
  Eigen::Index total_draws() const {
    return static_cast<Eigen::Index>(chains.size()) * kept_per_chain();
  }
  // all chains stacked row-wise
  Eigen::MatrixXd flattened() const;
};

// Random-walk Metropolis with a multivariate normal proposal adapted during
// warmup (covariance from warmup history, scaled 2.38^2/dim) and frozen after.
// Positivity-constrained parameters move on log scale, cutpoints as
// (first, log successive differences); draws are reported on the natural scale.
PosteriorDraws run_mcmc(const ModelSpec& spec, const Dataset& data,
                        const McmcConfig& cfg);

struct DiagSummary {
  Eigen::VectorXd rhat;
  Eigen::VectorXd ess;
  bool zero_variance = false;
};
DiagSummary diagnostics(const PosteriorDraws& draws);

// split rank-normalized potential scale reduction for one parameter
double split_rank_rhat(const std::vector<Eigen::VectorXd>& chains,
                       bool* zero_variance = nullptr);
// bulk effective sample size (rank-normalized, split chains, paired
// autocorrelation truncation)
double bulk_ess(const std::vector<Eigen::VectorXd>& chains);

}  // namespace doseforge
