#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "doseforge/mcmc.hpp"

namespace doseforge {

struct WaicResult {
  double elpd = 0.0;  // expected log pointwise predictive density estimate
  double p = 0.0;     // effective parameter count
  double se = 0.0;
};

WaicResult waic(const PosteriorDraws& draws, const Dataset& data);

struct ModelWeightEntry {
  std::string spec_id;
  double elpd = 0.0;
  double p = 0.0;
  double se = 0.0;
  double weight = 0.0;
};

struct ModelWeightSet {
  std::vector<ModelWeightEntry> entries;
};

// softmax of elpd values (pseudo-BMA)
ModelWeightSet compute_weights(const std::vector<WaicResult>& waics,
                               const std::vector<std::string>& ids);

// deterministic apportionment of N into integer counts proportional to weights
std::vector<long> largest_remainder(const Eigen::VectorXd& weights, long n);

struct Realization {
  int model = 0;
  Eigen::VectorXd params;  // natural scale
};

struct PooledDraws {
  std::vector<ModelSpec> specs;
  std::vector<Realization> draws;
  std::uint64_t seed = 0;
};

PooledDraws pool_draws(const std::vector<PosteriorDraws>& per_model,
                       const ModelWeightSet& weights, long n, std::uint64_t seed);

}  // namespace doseforge
