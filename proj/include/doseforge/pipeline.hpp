#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "doseforge/averaging.hpp"
#include "doseforge/categorical.hpp"
#include "doseforge/doseselect.hpp"
#include "doseforge/io.hpp"
#include "doseforge/marginals.hpp"
#include "doseforge/mcmc.hpp"

namespace doseforge {

struct SelectionConfig {
  // efficacy tested on the diff-from-control lower quantile, toxicity on the
  // expected-curve upper quantile unless tox_diff_from_control is set
  double eff_threshold = 0.0;
  double tox_threshold = 0.0;
  double eff_quantile = 0.025;
  double tox_quantile = 0.975;
  bool tox_diff_from_control = false;
  bool have_thresholds = false;

  // success-region analysis on diff-from-control draws for both outcomes
  bool success = false;
  double success_eff_threshold = 0.0;
  double success_risk_threshold = 0.0;
  double success_min_prob = 0.7;
};

struct PipelineConfig {
  enum class Strategy { Marginal, Categorical };

  // exactly one input source
  std::optional<SimConfig> simulate;
  std::filesystem::path input_csv;
  CsvSchema input_schema = CsvSchema::Individual;

  Likelihood eff_likelihood;
  Likelihood tox_likelihood;
  McmcConfig mcmc;
  DoseGrid grid;
  SelectionConfig selection;
  Strategy strategy = Strategy::Marginal;
  CategoryRule rule;
  std::vector<std::vector<int>> category_sets;  // default depends on rule
  DistanceMetric metric = DistanceMetric::Hellinger;
  std::vector<double> contour_doses;
  double contour_level = 0.95;
  std::vector<double> excluded_doses;  // ingested but not fitted
  double rhat_limit = 1.1;
  long pool_size = 4000;
  bool emit_svg = true;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  void validate() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig from_file(const std::filesystem::path& path);

 private:
  static PipelineConfig from_json_checked(const nlohmann::json& j);
};

// all candidate shapes fitted on one dataset, weighted and pooled
struct FitOutcome {
  std::vector<PosteriorDraws> fits;
  ModelWeightSet weights;
  PooledDraws pooled;

  double max_rhat() const;
};

// Fits the default candidate family, computes predictive weights, pools.
// Throws convergence_error naming every model whose split rhat exceeds
// rhat_limit.
FitOutcome fit_candidates(const Dataset& data, McmcConfig mcmc, std::uint64_t stream,
                          double rhat_limit, long pool_size,
                          const std::string& label = "");

struct FitResult {
  std::optional<FitOutcome> eff, tox;
  Provenance provenance;
  std::filesystem::path output_dir;
};

FitResult run_pipeline(const PipelineConfig& cfg);

// rows whose dose matches none of the excluded values
Dataset filter_doses(const Dataset& data, const std::vector<double>& excluded);
PairedTable filter_doses(const PairedTable& table, const std::vector<double>& excluded);

// ---- built-in example configurations ----

SimConfig example1_sim(const CopulaSpec& copula, std::uint64_t seed);
SimConfig example2_sim(double rho, std::uint64_t seed);
SimConfig example3_sim(double rho, std::uint64_t seed);

struct Example4Data {
  Dataset sbm;     // per-dose mean change with standard errors
  Dataset relief;  // responder counts
  Dataset ae;      // adverse-event counts
};
// includes the zero-dose rows; fitting excludes them
Example4Data example4_data();

std::filesystem::path reproduce_example(int n, std::uint64_t seed,
                                        const std::filesystem::path& out_root);

}  // namespace doseforge
