#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "doseforge/averaging.hpp"
#include "doseforge/doseselect.hpp"
#include "doseforge/marginals.hpp"
#include "doseforge/mcmc.hpp"
#include "doseforge/version.hpp"

namespace doseforge {

// Stamped on every artifact: a '#' comment line in CSVs, a "provenance"
// object in JSON files.
struct Provenance {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;

  std::string comment_line() const;
  nlohmann::json to_json() const;
};

std::string format_number(double x);

void write_text_file(const std::filesystem::path& path, const std::string& content);

// `dose,mean,sd,q025,q25,q50,q75,q975`; category-probability curves get a
// leading `category_set` column carrying the curve label
void write_curve_csv(const std::filesystem::path& path, const CurveSummary& curve,
                     const Provenance& prov);
void write_category_curves_csv(const std::filesystem::path& path,
                               const std::vector<CurveSummary>& curves,
                               const Provenance& prov);
// `dose,y_eff,y_tox[,severity]`
void write_paired_csv(const std::filesystem::path& path, const PairedTable& table,
                      const Provenance& prov);
// `chain,iter,<paramName>...`
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws,
                     const Provenance& prov);
// `dose,level,eff,tox` point lists, one block per contour
void write_contours_csv(const std::filesystem::path& path,
                        const std::vector<Contour>& contours, const Provenance& prov);
// `dose,p_eff,p_tox,success`
void write_success_csv(const std::filesystem::path& path, const SuccessTable& table,
                       const Provenance& prov);

nlohmann::json model_spec_to_json(const ModelSpec& spec);
nlohmann::json diagnostics_to_json(const PosteriorDraws& draws);
nlohmann::json weights_to_json(const ModelWeightSet& weights);
nlohmann::json interval_to_json(const DoseInterval& interval);
std::string weights_table(const ModelWeightSet& weights);

// writes `j` with an injected "provenance" object
void write_json(const std::filesystem::path& path, nlohmann::json j,
                const Provenance& prov);

// ---- ingestion ----
// '#' comment lines and blank lines are skipped everywhere; errors carry the
// offending 1-based physical line number.

enum class CsvSchema { Individual, Summary, Categorical };

// `dose,y_eff,y_tox[,severity]`
PairedTable ingest_individual_csv(const std::filesystem::path& path);
// `dose,mean,se,n` -> per-row standard-error normal dataset (n kept as trials)
Dataset ingest_summary_csv(const std::filesystem::path& path);
// `dose,category`; K inferred from the largest index, cross-checked against
// expected_categories when positive
Dataset ingest_categorical_csv(const std::filesystem::path& path,
                               int expected_categories = 0);

}  // namespace doseforge
