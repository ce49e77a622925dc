#pragma once

#include <cstdint>
#include <vector>

#include "doseforge/copula.hpp"
#include "doseforge/models.hpp"

namespace doseforge {

enum class MarginalKind { Normal, Bernoulli, BetaSeverity };
std::string to_string(MarginalKind kind);
MarginalKind parse_marginal_kind(const std::string& name);

// One outcome's generating law: a dose-response curve for the location (Normal)
// or the linked rate (Bernoulli / BetaSeverity).
struct MarginalSpec {
  MarginalKind kind = MarginalKind::Normal;
  DoseResponseShape shape;  // truth parameters filled in
  double sigma = 1.0;       // Normal only
  Link link = Link::Logit;

  void validate() const;
  double location(double dose) const { return shape.eval(dose); }
  double rate(double dose) const { return apply_inverse_link(link, shape.eval(dose)); }
};

struct SimConfig {
  std::vector<double> doses;
  int n_per_dose = 0;
  CopulaSpec copula;
  MarginalSpec eff, tox;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PairedRow {
  double dose = 0.0;
  double y_eff = 0.0;
  double y_tox = 0.0;
  double severity = 0.0;  // BetaSeverity toxicity only
};

struct PairedTable {
  std::vector<PairedRow> rows;
  bool has_severity = false;
  std::uint64_t seed = 0;
};

// push one dose's dependent uniforms through the two inverse marginal CDFs;
// BetaSeverity yields both the event indicator and a severity in [0,1]
std::vector<PairedRow> inverse_marginal_transform(const UVSample& uv, double dose,
                                                  const MarginalSpec& eff,
                                                  const MarginalSpec& tox);

PairedTable generate_example_dataset(const SimConfig& cfg);

// fitting-side views of a paired table
Dataset efficacy_dataset(const PairedTable& table, const Likelihood& likelihood);
Dataset toxicity_dataset(const PairedTable& table, const Likelihood& likelihood);

}  // namespace doseforge
