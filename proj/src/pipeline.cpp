#include "doseforge/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "doseforge/rng.hpp"
#include "doseforge/svg.hpp"

namespace doseforge {

namespace fs = std::filesystem;

// ---- fitting ----

double FitOutcome::max_rhat() const {
  double worst = 0.0;
  for (const auto& f : fits)
    for (Eigen::Index i = 0; i < f.diag.rhat.size(); ++i)
      worst = std::max(worst, f.diag.rhat[i]);
  return worst;
}

FitOutcome fit_candidates(const Dataset& data, McmcConfig mcmc, std::uint64_t stream,
                          double rhat_limit, long pool_size, const std::string& label) {
  if (!(rhat_limit > 1.0)) throw config_error("rhat limit must exceed 1");
  if (pool_size < 1) throw config_error("pool size must be positive");
  data.validate();

  FitOutcome out;
  auto specs = default_candidate_set(data.likelihood, data);
  std::vector<WaicResult> waics;
  std::vector<std::string> ids;
  std::string offenders;
  for (std::size_t m = 0; m < specs.size(); ++m) {
    McmcConfig per = mcmc;
    per.seed = derive_seed(stream, static_cast<std::uint64_t>(m));
    PosteriorDraws draws = run_mcmc(specs[m], data, per);
    for (Eigen::Index i = 0; i < draws.diag.rhat.size(); ++i)
      if (draws.diag.rhat[i] > rhat_limit) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%s%s (%s rhat=%.3f)",
                      offenders.empty() ? "" : ", ", specs[m].id().c_str(),
                      draws.param_names[static_cast<std::size_t>(i)].c_str(),
                      draws.diag.rhat[i]);
        offenders += buf;
        break;
      }
    waics.push_back(waic(draws, data));
    ids.push_back(specs[m].id());
    out.fits.push_back(std::move(draws));
  }
  if (!offenders.empty())
    throw convergence_error((label.empty() ? "" : label + ": ") + "split rhat above " +
                            format_number(rhat_limit) + " for: " + offenders);
  out.weights = compute_weights(waics, ids);
  out.pooled =
      pool_draws(out.fits, out.weights, pool_size, derive_seed(stream, 0xB00F5));
  return out;
}

Dataset filter_doses(const Dataset& data, const std::vector<double>& excluded) {
  auto hit = [&](double d) {
    for (double e : excluded)
      if (std::abs(d - e) <= 1e-9 * std::max(1.0, std::abs(e))) return true;
    return false;
  };
  Dataset out;
  out.likelihood = data.likelihood;
  for (const auto& r : data.rows)
    if (!hit(r.dose)) out.rows.push_back(r);
  if (out.rows.empty()) throw config_error("dose exclusion removed every row");
  return out;
}

PairedTable filter_doses(const PairedTable& table, const std::vector<double>& excluded) {
  auto hit = [&](double d) {
    for (double e : excluded)
      if (std::abs(d - e) <= 1e-9 * std::max(1.0, std::abs(e))) return true;
    return false;
  };
  PairedTable out;
  out.has_severity = table.has_severity;
  out.seed = table.seed;
  for (const auto& r : table.rows)
    if (!hit(r.dose)) out.rows.push_back(r);
  if (out.rows.empty()) throw config_error("dose exclusion removed every row");
  return out;
}

// ---- config parsing ----

namespace {

MarginalSpec parse_marginal(const nlohmann::json& j) {
  MarginalSpec m;
  m.kind = parse_marginal_kind(j.at("marginal").get<std::string>());
  m.shape.kind = parse_shape_kind(j.at("shape").get<std::string>());
  auto p = j.at("params").get<std::vector<double>>();
  m.shape.params =
      Eigen::Map<Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  m.shape.log_offset = j.value("log_offset", 0.0);
  m.sigma = j.value("sigma", 1.0);
  if (j.contains("link")) m.link = parse_link(j.at("link").get<std::string>());
  return m;
}

SimConfig parse_sim(const nlohmann::json& j, std::uint64_t fallback_seed) {
  SimConfig s;
  s.doses = j.at("doses").get<std::vector<double>>();
  s.n_per_dose = j.at("n_per_dose").get<int>();
  const auto& c = j.at("copula");
  s.copula.family = parse_copula_family(c.at("family").get<std::string>());
  s.copula.param = c.value("param", 0.0);
  s.eff = parse_marginal(j.at("efficacy"));
  s.tox = parse_marginal(j.at("toxicity"));
  s.seed = j.value("seed", fallback_seed);
  return s;
}

Likelihood parse_likelihood(const nlohmann::json& j) {
  Likelihood l;
  l.family = parse_likelihood_family(j.at("likelihood").get<std::string>());
  if (j.contains("link")) l.link = parse_link(j.at("link").get<std::string>());
  l.categories = j.value("categories", 0);
  return l;
}

CategoryRule parse_rule(const nlohmann::json& j) {
  CategoryRule r;
  r.categories = j.at("categories").get<int>();
  r.labels = j.at("labels").get<std::vector<std::string>>();
  r.severe_threshold = j.at("severe_threshold").get<double>();
  r.fallback_category = j.at("fallback").get<int>();
  double inf = std::numeric_limits<double>::infinity();
  for (const auto& b : j.at("bands")) {
    CategoryBand band;
    band.eff_lo = b.value("eff_lo", -inf);
    band.eff_hi = b.value("eff_hi", inf);
    band.sev_max = b.at("sev_max").get<double>();
    band.category = b.at("category").get<int>();
    r.bands.push_back(band);
  }
  return r;
}

DoseGrid parse_grid(const nlohmann::json& j) {
  double control = j.value("control", 0.0);
  if (j.contains("doses"))
    return DoseGrid::from_doses(j.at("doses").get<std::vector<double>>(), control);
  return DoseGrid::with_step(j.at("lo").get<double>(), j.at("hi").get<double>(),
                             j.at("step").get<double>(), control);
}

}  // namespace

void PipelineConfig::validate() const {
  bool sim = simulate.has_value(), csv = !input_csv.empty();
  if (sim == csv)
    throw config_error("config needs exactly one input source (simulate or csv)");
  if (sim) simulate->validate();
  mcmc.validate();
  grid.validate();
  if (!(rhat_limit > 1.0)) throw config_error("rhat limit must exceed 1");
  if (pool_size < 1) throw config_error("pool size must be positive");
  if (!(contour_level > 0.0 && contour_level < 1.0))
    throw config_error("contour level must be in (0,1)");
  if (selection.have_thresholds &&
      (!std::isfinite(selection.eff_threshold) ||
       !std::isfinite(selection.tox_threshold)))
    throw config_error("selection thresholds must be finite");
  if (selection.success) {
    if (!std::isfinite(selection.success_eff_threshold) ||
        !std::isfinite(selection.success_risk_threshold))
      throw config_error("success thresholds must be finite");
    if (!(selection.success_min_prob > 0.0 && selection.success_min_prob <= 1.0))
      throw config_error("success probability bound must be in (0,1]");
  }
  if (strategy == Strategy::Categorical) {
    rule.validate();
    for (const auto& set : category_sets) {
      if (set.empty()) throw config_error("empty category set");
      for (int c : set)
        if (c < 1 || c > rule.categories)
          throw config_error("category set index out of 1..K");
    }
  }
  for (double d : excluded_doses)
    if (!std::isfinite(d)) throw config_error("excluded doses must be finite");
  if (output_dir.empty()) throw config_error("output directory not set");
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  try {
    return from_json_checked(j);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("config error: ") + e.what());
  }
}

PipelineConfig PipelineConfig::from_json_checked(const nlohmann::json& j) {
  if (!j.is_object()) throw config_error("config must be a JSON object");
  if (!j.contains("schema") || j.at("schema") != 1)
    throw config_error("config needs \"schema\": 1");

  PipelineConfig cfg;
  cfg.config_hash = fnv1a(j.dump());
  cfg.seed = j.value("seed", std::uint64_t{0});

  const auto& input = j.at("input");
  if (input.contains("simulate")) {
    cfg.simulate = parse_sim(input.at("simulate"), cfg.seed);
  } else {
    cfg.input_csv = input.at("csv").get<std::string>();
    std::string format = input.value("format", "individual");
    if (format == "individual") cfg.input_schema = CsvSchema::Individual;
    else if (format == "summary") cfg.input_schema = CsvSchema::Summary;
    else if (format == "categorical") cfg.input_schema = CsvSchema::Categorical;
    else throw config_error("unknown input format: " + format);
  }

  if (j.contains("efficacy")) cfg.eff_likelihood = parse_likelihood(j.at("efficacy"));
  if (j.contains("toxicity")) cfg.tox_likelihood = parse_likelihood(j.at("toxicity"));

  if (j.contains("mcmc")) {
    const auto& m = j.at("mcmc");
    cfg.mcmc.chains = m.value("chains", cfg.mcmc.chains);
    cfg.mcmc.warmup = m.value("warmup", cfg.mcmc.warmup);
    cfg.mcmc.post_warmup = m.value("post_warmup", cfg.mcmc.post_warmup);
    cfg.mcmc.thin = m.value("thin", cfg.mcmc.thin);
    cfg.mcmc.target_accept = m.value("target_accept", cfg.mcmc.target_accept);
  }

  cfg.grid = parse_grid(j.at("grid"));

  if (j.contains("selection")) {
    const auto& s = j.at("selection");
    if (s.contains("eff_threshold") && s.contains("tox_threshold")) {
      cfg.selection.have_thresholds = true;
      cfg.selection.eff_threshold = s.at("eff_threshold").get<double>();
      cfg.selection.tox_threshold = s.at("tox_threshold").get<double>();
      cfg.selection.eff_quantile = s.value("eff_quantile", 0.025);
      cfg.selection.tox_quantile = s.value("tox_quantile", 0.975);
      cfg.selection.tox_diff_from_control = s.value("tox_diff", false);
    }
    if (s.contains("success")) {
      const auto& sc = s.at("success");
      cfg.selection.success = true;
      cfg.selection.success_eff_threshold = sc.at("eff_threshold").get<double>();
      cfg.selection.success_risk_threshold = sc.at("risk_threshold").get<double>();
      cfg.selection.success_min_prob = sc.value("min_prob", 0.7);
    }
  }

  std::string strategy = j.value("strategy", "marginal");
  if (strategy == "marginal") cfg.strategy = Strategy::Marginal;
  else if (strategy == "categorical") cfg.strategy = Strategy::Categorical;
  else throw config_error("unknown strategy: " + strategy);

  if (j.contains("rule")) cfg.rule = parse_rule(j.at("rule"));
  else if (cfg.strategy == Strategy::Categorical)
    cfg.rule = CategoryRule::example_default();

  if (j.contains("category_sets"))
    cfg.category_sets = j.at("category_sets").get<std::vector<std::vector<int>>>();
  cfg.metric = parse_distance_metric(j.value("metric", "hellinger"));

  if (j.contains("contours")) {
    const auto& c = j.at("contours");
    cfg.contour_doses = c.at("doses").get<std::vector<double>>();
    cfg.contour_level = c.value("level", 0.95);
  }

  cfg.excluded_doses = j.value("exclude_doses", std::vector<double>{});
  cfg.rhat_limit = j.value("rhat_limit", 1.1);
  cfg.pool_size = j.value("pool_size", 4000L);
  cfg.emit_svg = j.value("svg", true);
  if (j.contains("output")) cfg.output_dir = j.at("output").get<std::string>();
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error("config parse error in " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

// ---- pipeline run ----

namespace {

bool supports_individual(const Likelihood& lik) {
  return lik.family != Likelihood::Family::NormalSummary;
}

struct OutcomeArtifacts {
  CurveSummary expected, diff;
};

OutcomeArtifacts emit_outcome(const fs::path& dir, const std::string& prefix,
                              const FitOutcome& fit, const DoseGrid& grid,
                              const Provenance& prov, std::uint64_t seed,
                              bool svg) {
  for (const auto& f : fit.fits) {
    write_draws_csv(dir / (prefix + "_" + f.spec.id() + "_draws.csv"), f, prov);
    write_json(dir / (prefix + "_" + f.spec.id() + "_diag.json"),
               diagnostics_to_json(f), prov);
  }
  write_json(dir / (prefix + "_weights.json"), weights_to_json(fit.weights), prov);

  OutcomeArtifacts a;
  a.expected = expected_curve(fit.pooled, grid);
  a.diff = diff_from_control_curve(fit.pooled, grid);
  write_curve_csv(dir / (prefix + "_expected.csv"), a.expected, prov);
  write_curve_csv(dir / (prefix + "_diff.csv"), a.diff, prov);
  if (supports_individual(fit.pooled.specs[0].likelihood)) {
    CurveSummary ind = individual_prediction_curve(
        fit.pooled, grid, derive_seed(seed, fnv1a(prefix), 0x1D));
    write_curve_csv(dir / (prefix + "_individual.csv"), ind, prov);
  }
  if (svg) {
    write_text_file(dir / (prefix + "_expected.svg"),
                    curve_svg({a.expected}, prefix + " expected response"));
    write_text_file(dir / (prefix + "_diff.svg"),
                    curve_svg({a.diff}, prefix + " difference from control"));
  }
  return a;
}

// first grid dose whose mean meets an at-least threshold
double mean_first_crossing(const CurveSummary& curve, double threshold) {
  for (Eigen::Index i = 0; i < curve.grid.size(); ++i)
    if (curve.mean[i] >= threshold) return curve.grid.doses[i];
  return std::numeric_limits<double>::quiet_NaN();
}

// last dose of the control-containing run whose mean stays at or below threshold
double mean_last_below(const CurveSummary& curve, double threshold) {
  Eigen::Index ci = curve.grid.control_index();
  if (curve.mean[ci] > threshold) return std::numeric_limits<double>::quiet_NaN();
  Eigen::Index j = ci;
  while (j + 1 < curve.grid.size() && curve.mean[j + 1] <= threshold) ++j;
  return curve.grid.doses[j];
}

nlohmann::json outcome_summary(const FitOutcome& fit, const CurveSummary& expected,
                               Eigen::Index control_index) {
  return {{"weights", weights_to_json(fit.weights)},
          {"max_rhat", fit.max_rhat()},
          {"expected_at_control", expected.mean[control_index]}};
}

std::vector<std::vector<int>> default_category_sets(int categories) {
  if (categories == 4) return {{1}, {1, 2}, {3, 4}, {4}};
  std::vector<std::vector<int>> sets;
  for (int c = 1; c <= categories; ++c) sets.push_back({c});
  return sets;
}

}  // namespace

FitResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  fs::create_directories(cfg.output_dir);
  Provenance prov{cfg.config_hash, cfg.seed, kVersion};

  FitResult result;
  result.provenance = prov;
  result.output_dir = cfg.output_dir;

  // gather input
  PairedTable table;
  bool have_pairs = false;
  Dataset single;  // Summary or Categorical csv input
  if (cfg.simulate) {
    table = generate_example_dataset(*cfg.simulate);
    have_pairs = true;
  } else if (cfg.input_schema == CsvSchema::Individual) {
    table = ingest_individual_csv(cfg.input_csv);
    have_pairs = true;
  } else if (cfg.input_schema == CsvSchema::Summary) {
    single = ingest_summary_csv(cfg.input_csv);
  } else {
    single = ingest_categorical_csv(cfg.input_csv, cfg.strategy ==
                                                           PipelineConfig::Strategy::Categorical
                                                       ? cfg.rule.categories
                                                       : 0);
  }

  nlohmann::json summary;
  std::string report = prov.comment_line();

  if (cfg.strategy == PipelineConfig::Strategy::Marginal) {
    summary["strategy"] = "marginal";
    Dataset eff_data, tox_data;
    bool have_tox = false;
    if (have_pairs) {
      PairedTable fit_table = filter_doses(table, cfg.excluded_doses);
      eff_data = efficacy_dataset(fit_table, cfg.eff_likelihood);
      tox_data = toxicity_dataset(fit_table, cfg.tox_likelihood);
      have_tox = true;
    } else if (cfg.input_schema == CsvSchema::Summary) {
      eff_data = filter_doses(single, cfg.excluded_doses);
    } else {
      throw config_error("marginal strategy cannot run on categorical input");
    }

    FitOutcome eff = fit_candidates(eff_data, cfg.mcmc, derive_seed(cfg.seed, 1),
                                    cfg.rhat_limit, cfg.pool_size, "efficacy");
    std::optional<FitOutcome> tox;
    if (have_tox)
      tox = fit_candidates(tox_data, cfg.mcmc, derive_seed(cfg.seed, 2),
                           cfg.rhat_limit, cfg.pool_size, "toxicity");

    // all computation done; now emit
    if (cfg.simulate) write_paired_csv(cfg.output_dir / "data.csv", table, prov);
    OutcomeArtifacts eff_art =
        emit_outcome(cfg.output_dir, "eff", eff, cfg.grid, prov, cfg.seed, cfg.emit_svg);
    summary["efficacy"] = outcome_summary(eff, eff_art.expected, cfg.grid.control_index());
    report += "\nefficacy model weights\n" + weights_table(eff.weights);

    std::optional<OutcomeArtifacts> tox_art;
    if (tox) {
      tox_art = emit_outcome(cfg.output_dir, "tox", *tox, cfg.grid, prov, cfg.seed,
                             cfg.emit_svg);
      summary["toxicity"] =
          outcome_summary(*tox, tox_art->expected, cfg.grid.control_index());
      report += "\ntoxicity model weights\n" + weights_table(tox->weights);
    }

    if (cfg.selection.have_thresholds) {
      DoseInterval ar_e = acceptable_range(
          eff_art.diff, {RangeMode::Kind::EfficacyMin, cfg.selection.eff_threshold,
                         cfg.selection.eff_quantile});
      write_json(cfg.output_dir / "ar_e.json", interval_to_json(ar_e), prov);
      summary["intervals"]["ar_e"] = interval_to_json(ar_e);
      double med = ar_e.empty ? std::numeric_limits<double>::quiet_NaN() : ar_e.lo;
      summary["med"] = med;
      summary["med_mean_only"] = mean_first_crossing(
          eff_art.diff, cfg.selection.eff_threshold);
      report += "\nAR_E: " + (ar_e.empty ? std::string("empty")
                                         : format_number(ar_e.lo) + " to " +
                                               format_number(ar_e.hi)) +
                "  [" + ar_e.criterion + "]\n";
      if (tox_art) {
        const CurveSummary& tox_curve = cfg.selection.tox_diff_from_control
                                            ? tox_art->diff
                                            : tox_art->expected;
        DoseInterval ar_s = acceptable_range(
            tox_curve, {RangeMode::Kind::ToxicityMax, cfg.selection.tox_threshold,
                        cfg.selection.tox_quantile});
        DoseInterval ar_es = intersect(ar_e, ar_s);
        write_json(cfg.output_dir / "ar_s.json", interval_to_json(ar_s), prov);
        write_json(cfg.output_dir / "ar_es.json", interval_to_json(ar_es), prov);
        summary["intervals"]["ar_s"] = interval_to_json(ar_s);
        summary["intervals"]["ar_es"] = interval_to_json(ar_es);
        summary["msd"] =
            ar_s.empty ? std::numeric_limits<double>::quiet_NaN() : ar_s.hi;
        summary["msd_mean_only"] =
            mean_last_below(tox_curve, cfg.selection.tox_threshold);
        report += "AR_S: " + (ar_s.empty ? std::string("empty")
                                         : format_number(ar_s.lo) + " to " +
                                               format_number(ar_s.hi)) +
                  "  [" + ar_s.criterion + "]\n";
        report += "AR_ES: " + (ar_es.empty ? std::string("empty")
                                           : format_number(ar_es.lo) + " to " +
                                                 format_number(ar_es.hi)) +
                  "\n";
      }
    }

    if (cfg.selection.success && tox) {
      SuccessTable st = success_probability(
          eff.pooled, tox->pooled, cfg.grid, cfg.selection.success_eff_threshold,
          cfg.selection.success_risk_threshold, cfg.selection.success_min_prob);
      write_success_csv(cfg.output_dir / "success.csv", st, prov);
      write_json(cfg.output_dir / "success.json",
                 {{"region", interval_to_json(st.region)},
                  {"min_prob", st.min_prob},
                  {"criterion", st.region.criterion}},
                 prov);
      summary["success"]["region"] = interval_to_json(st.region);
      summary["success"]["min_prob"] = st.min_prob;
      report += "\nsuccess region: " +
                (st.region.empty ? std::string("empty")
                                 : format_number(st.region.lo) + " to " +
                                       format_number(st.region.hi)) +
                "  [" + st.region.criterion + "]\n";
    }

    if (!cfg.contour_doses.empty() && tox) {
      std::vector<Contour> contours;
      for (double d : cfg.contour_doses)
        contours.push_back(
            joint_contour(eff.pooled, tox->pooled, d, cfg.contour_level));
      write_contours_csv(cfg.output_dir / "contours.csv", contours, prov);
      if (cfg.emit_svg)
        write_text_file(cfg.output_dir / "contours.svg",
                        contour_svg(contours, "joint efficacy and toxicity"));
    }

    result.eff = std::move(eff);
    result.tox = std::move(tox);
  } else {
    summary["strategy"] = "categorical";
    Dataset cat_data;
    if (have_pairs) {
      PairedTable fit_table = filter_doses(table, cfg.excluded_doses);
      cat_data = categorical_dataset(fit_table, cfg.rule);
    } else if (cfg.input_schema == CsvSchema::Categorical) {
      cat_data = filter_doses(single, cfg.excluded_doses);
    } else {
      throw config_error("categorical strategy needs paired or categorical input");
    }

    FitOutcome fit = fit_candidates(cat_data, cfg.mcmc, derive_seed(cfg.seed, 3),
                                    cfg.rhat_limit, cfg.pool_size, "categories");

    std::vector<std::vector<int>> sets = cfg.category_sets.empty()
                                             ? default_category_sets(cfg.rule.categories)
                                             : cfg.category_sets;
    std::vector<CurveSummary> cat_curves;
    for (const auto& set : sets)
      cat_curves.push_back(category_prob_curve(fit.pooled, cfg.grid, set));
    CurveSummary dist = distance_curve(fit.pooled, cfg.grid, cfg.metric);

    if (cfg.simulate) write_paired_csv(cfg.output_dir / "data.csv", table, prov);
    for (const auto& f : fit.fits) {
      write_draws_csv(cfg.output_dir / ("cat_" + f.spec.id() + "_draws.csv"), f, prov);
      write_json(cfg.output_dir / ("cat_" + f.spec.id() + "_diag.json"),
                 diagnostics_to_json(f), prov);
    }
    write_json(cfg.output_dir / "cat_weights.json", weights_to_json(fit.weights), prov);
    write_category_curves_csv(cfg.output_dir / "category_curves.csv", cat_curves, prov);
    write_curve_csv(cfg.output_dir / "distance.csv", dist, prov);
    if (cfg.emit_svg) {
      write_text_file(cfg.output_dir / "category_curves.svg",
                      curve_svg(cat_curves, "category probabilities"));
      write_text_file(cfg.output_dir / "distance.svg",
                      curve_svg({dist}, "distance from control distribution"));
    }

    Eigen::Index arg = 0;
    dist.mean.maxCoeff(&arg);
    summary["weights"] = weights_to_json(fit.weights);
    summary["max_rhat"] = fit.max_rhat();
    summary["distance"] = {{"metric", to_string(cfg.metric)},
                           {"argmax_dose", dist.grid.doses[arg]},
                           {"max_mean", dist.mean[arg]}};
    nlohmann::json sets_json = nlohmann::json::array();
    for (const auto& s : sets) sets_json.push_back(s);
    summary["category_sets"] = sets_json;

    report += "\ncategory model weights\n" + weights_table(fit.weights);
    report += "\ndistance argmax: dose " + format_number(dist.grid.doses[arg]) +
              " (mean " + format_number(dist.mean[arg]) + ", " +
              to_string(cfg.metric) + ")\n";

    result.eff = std::move(fit);
  }

  write_json(cfg.output_dir / "summary.json", summary, prov);
  write_text_file(cfg.output_dir / "report.txt", report);
  return result;
}

// ---- built-in examples ----

namespace {

DoseResponseShape make_shape(ShapeKind kind, std::initializer_list<double> params) {
  DoseResponseShape s;
  s.kind = kind;
  s.params.resize(static_cast<Eigen::Index>(params.size()));
  Eigen::Index i = 0;
  for (double v : params) s.params[i++] = v;
  return s;
}

nlohmann::json marginal_json(const MarginalSpec& m) {
  std::vector<double> params(m.shape.params.data(),
                             m.shape.params.data() + m.shape.params.size());
  nlohmann::json j = {{"marginal", to_string(m.kind)},
                      {"shape", to_string(m.shape.kind)},
                      {"params", params}};
  if (m.kind == MarginalKind::Normal) j["sigma"] = m.sigma;
  else j["link"] = to_string(m.link);
  if (m.shape.kind == ShapeKind::LogLinear) j["log_offset"] = m.shape.log_offset;
  return j;
}

nlohmann::json sim_json(const SimConfig& s) {
  return {{"doses", s.doses},
          {"n_per_dose", s.n_per_dose},
          {"copula",
           {{"family", to_string(s.copula.family)}, {"param", s.copula.param}}},
          {"efficacy", marginal_json(s.eff)},
          {"toxicity", marginal_json(s.tox)},
          {"seed", s.seed}};
}

}  // namespace

SimConfig example1_sim(const CopulaSpec& copula, std::uint64_t seed) {
  SimConfig s;
  s.doses = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  s.n_per_dose = 50;
  s.copula = copula;
  s.eff.kind = MarginalKind::Normal;
  s.eff.shape = make_shape(ShapeKind::SigmoidEmax, {4.0, 15.0, 0.33, 2.8});
  s.eff.sigma = 2.0;
  s.tox.kind = MarginalKind::BetaSeverity;
  s.tox.shape = make_shape(ShapeKind::Exponential, {-10.0, 5.0, 0.7});
  s.tox.link = Link::Logit;
  s.seed = seed;
  return s;
}

SimConfig example2_sim(double rho, std::uint64_t seed) {
  SimConfig s;
  s.doses = {0.0, 0.3, 0.7, 1.0, 4.0, 6.0};
  s.n_per_dose = 50;
  s.copula = {CopulaFamily::Gaussian, rho};
  s.eff.kind = MarginalKind::Normal;
  s.eff.shape = make_shape(ShapeKind::Emax, {-150.0, 150.0, 0.5});
  s.eff.sigma = 100.0;
  s.tox.kind = MarginalKind::Bernoulli;
  s.tox.shape = make_shape(ShapeKind::Linear, {-1.28, 0.26});
  s.tox.link = Link::Probit;
  s.seed = seed;
  return s;
}

SimConfig example3_sim(double rho, std::uint64_t seed) {
  SimConfig s;
  s.doses = {0.05, 0.2, 0.4, 0.6, 0.8, 1.0};
  s.n_per_dose = 50;
  s.copula = {CopulaFamily::Gaussian, rho};
  s.eff.kind = MarginalKind::Normal;
  s.eff.shape = make_shape(ShapeKind::Emax, {1.4, 14.5, 0.2});
  s.eff.sigma = 7.0;
  s.tox.kind = MarginalKind::Normal;
  s.tox.shape = make_shape(ShapeKind::Exponential, {0.163, 0.037, 5.912});
  s.tox.sigma = 8.0;
  s.seed = seed;
  return s;
}

Example4Data example4_data() {
  Example4Data d;
  d.sbm.likelihood.family = Likelihood::Family::NormalSummary;
  d.sbm.rows = {{0.0, 1.5, 0.4, 42},
                {16.0, 2.3, 0.4, 41},
                {32.0, 3.5, 0.5, 43},
                {48.0, 6.8, 1.1, 44}};
  d.relief.likelihood.family = Likelihood::Family::BinomialAggregate;
  d.relief.likelihood.link = Link::Logit;
  d.relief.rows = {{0.0, 13.0, 0.0, 42},
                   {16.0, 13.0, 0.0, 41},
                   {32.0, 20.0, 0.0, 43},
                   {48.0, 31.0, 0.0, 44}};
  d.ae.likelihood.family = Likelihood::Family::BinomialAggregate;
  d.ae.likelihood.link = Link::Logit;
  d.ae.rows = {{0.0, 2.0, 0.0, 42},
               {16.0, 1.0, 0.0, 41},
               {32.0, 13.0, 0.0, 43},
               {48.0, 17.0, 0.0, 44}};
  return d;
}

// ---- example reproduction ----

namespace {

struct CopulaVariant {
  const char* name;
  CopulaSpec spec;
};

nlohmann::json example1_config(const SimConfig& sim, const std::string& strategy,
                               std::uint64_t seed, const fs::path& out) {
  nlohmann::json j = {
      {"schema", 1},
      {"seed", seed},
      {"input", {{"simulate", sim_json(sim)}}},
      {"efficacy", {{"likelihood", "normal"}}},
      {"toxicity", {{"likelihood", "bernoulli"}, {"link", "logit"}}},
      {"grid", {{"lo", 0.0}, {"hi", 0.8}, {"step", 0.02}, {"control", 0.0}}},
      {"strategy", strategy},
      {"output", out.string()}};
  if (strategy == "marginal") {
    j["selection"] = {{"eff_threshold", 5.0}, {"tox_threshold", 0.2}};
    j["contours"] = {{"doses", {0.3, 0.4, 0.5, 0.6, 0.7, 0.8}}, {"level", 0.95}};
  } else {
    j["rule"] = {{"categories", 4},
                 {"labels", {"Best", "Good", "Minimal", "Worst"}},
                 {"severe_threshold", 0.25},
                 {"bands",
                  {{{"eff_lo", 5.0}, {"eff_hi", 10.0}, {"sev_max", 0.05}, {"category", 1}},
                   {{"eff_lo", 5.0}, {"sev_max", 0.25}, {"category", 2}}}},
                 {"fallback", 3}};
    j["category_sets"] = {{1}, {1, 2}, {3, 4}, {4}};
    j["metric"] = "hellinger";
  }
  return j;
}

// run one reproduction variant, prefixing convergence failures with its name
void run_variant(const PipelineConfig& cfg, const std::string& label) {
  try {
    run_pipeline(cfg);
  } catch (const convergence_error& e) {
    throw convergence_error(label + ": " + e.what());
  }
}

fs::path reproduce_example1(std::uint64_t seed, const fs::path& root) {
  const CopulaVariant variants[] = {
      {"gauss0", {CopulaFamily::Gaussian, 0.0}},
      {"gauss08", {CopulaFamily::Gaussian, 0.8}},
      {"clayton6", {CopulaFamily::Clayton, 6.0}},
      {"joe6", {CopulaFamily::Joe, 6.0}},
  };
  nlohmann::json overview;
  for (std::size_t i = 0; i < 4; ++i) {
    std::uint64_t vseed = derive_seed(seed, 100 + i);
    SimConfig sim = example1_sim(variants[i].spec, vseed);
    for (const char* strategy : {"marginal", "categorical"}) {
      fs::path out = root / variants[i].name / strategy;
      PipelineConfig cfg = PipelineConfig::from_json(
          example1_config(sim, strategy, vseed, out));
      run_variant(cfg, std::string(variants[i].name) + "/" + strategy);
      std::ifstream in(out / "summary.json");
      nlohmann::json s;
      in >> s;
      if (std::string(strategy) == "marginal")
        overview[variants[i].name]["ar_es"] = s["intervals"]["ar_es"];
      else
        overview[variants[i].name]["distance"] = s["distance"];
    }
  }
  write_json(root / "summary.json", overview, {fnv1a("example1"), seed, kVersion});
  return root;
}

fs::path reproduce_example2(std::uint64_t seed, const fs::path& root) {
  nlohmann::json overview;
  const std::pair<const char*, double> variants[] = {{"rho0", 0.0}, {"rho08", 0.8}};
  for (std::size_t i = 0; i < 2; ++i) {
    std::uint64_t vseed = derive_seed(seed, 200 + i);
    fs::path out = root / variants[i].first;
    nlohmann::json j = {
        {"schema", 1},
        {"seed", vseed},
        {"input", {{"simulate", sim_json(example2_sim(variants[i].second, vseed))}}},
        {"efficacy", {{"likelihood", "normal"}}},
        {"toxicity", {{"likelihood", "bernoulli"}, {"link", "probit"}}},
        {"grid", {{"lo", 0.0}, {"hi", 6.0}, {"step", 0.1}, {"control", 0.0}}},
        {"selection",
         {{"success",
           {{"eff_threshold", 80.0}, {"risk_threshold", 0.3}, {"min_prob", 0.7}}}}},
        {"output", out.string()}};
    run_variant(PipelineConfig::from_json(j), variants[i].first);
    std::ifstream in(out / "summary.json");
    nlohmann::json s;
    in >> s;
    overview[variants[i].first]["success"] = s["success"];
    overview[variants[i].first]["toxicity_at_control"] =
        s["toxicity"]["expected_at_control"];
  }
  write_json(root / "summary.json", overview, {fnv1a("example2"), seed, kVersion});
  return root;
}

fs::path reproduce_example3(std::uint64_t seed, const fs::path& root) {
  nlohmann::json overview;
  const std::pair<const char*, double> variants[] = {{"rho0", 0.0}, {"rho08", 0.8}};
  for (std::size_t i = 0; i < 2; ++i) {
    std::uint64_t vseed = derive_seed(seed, 300 + i);
    fs::path out = root / variants[i].first;
    nlohmann::json j = {
        {"schema", 1},
        {"seed", vseed},
        {"input", {{"simulate", sim_json(example3_sim(variants[i].second, vseed))}}},
        {"efficacy", {{"likelihood", "normal"}}},
        {"toxicity", {{"likelihood", "normal"}}},
        {"grid", {{"lo", 0.0}, {"hi", 1.0}, {"step", 0.005}, {"control", 0.0}}},
        {"selection",
         {{"eff_threshold", 3.35}, {"tox_threshold", 3.0}, {"tox_diff", true}}},
        {"output", out.string()}};
    run_variant(PipelineConfig::from_json(j), variants[i].first);
    std::ifstream in(out / "summary.json");
    nlohmann::json s;
    in >> s;
    overview[variants[i].first] = {{"med", s["med"]},
                                   {"msd", s["msd"]},
                                   {"med_mean_only", s["med_mean_only"]},
                                   {"msd_mean_only", s["msd_mean_only"]}};
  }
  write_json(root / "summary.json", overview, {fnv1a("example3"), seed, kVersion});
  return root;
}

fs::path reproduce_example4(std::uint64_t seed, const fs::path& root) {
  fs::create_directories(root);
  Example4Data data = example4_data();
  nlohmann::json cfg_echo = {{"example", 4}, {"seed", seed}, {"exclude_doses", {0.0}}};
  Provenance prov{fnv1a(cfg_echo.dump()), seed, kVersion};

  // write the summary table and ingest it back so the CSV path is exercised
  std::string sbm_csv = prov.comment_line();
  sbm_csv += "dose,mean,se,n\n";
  for (const auto& r : data.sbm.rows)
    sbm_csv += format_number(r.dose) + "," + format_number(r.response) + "," +
               format_number(r.se) + "," + std::to_string(r.trials) + "\n";
  write_text_file(root / "sbm.csv", sbm_csv);
  Dataset sbm = ingest_summary_csv(root / "sbm.csv");

  std::string counts_csv = prov.comment_line();
  counts_csv += "dose,relief,ae,n\n";
  for (std::size_t i = 0; i < data.ae.rows.size(); ++i)
    counts_csv += format_number(data.ae.rows[i].dose) + "," +
                  format_number(data.relief.rows[i].response) + "," +
                  format_number(data.ae.rows[i].response) + "," +
                  std::to_string(data.ae.rows[i].trials) + "\n";
  write_text_file(root / "counts.csv", counts_csv);

  std::vector<double> excluded = {0.0};
  DoseGrid grid = DoseGrid::with_step(16.0, 48.0, 1.0, 16.0);
  McmcConfig mcmc;

  struct OutcomeRun {
    const char* name;
    const Dataset* data;
    std::uint64_t tag;
  };
  const OutcomeRun runs[] = {{"sbm", &sbm, 1}, {"relief", &data.relief, 2},
                             {"ae", &data.ae, 3}};
  nlohmann::json overview;
  std::vector<FitOutcome> outcomes;
  for (const auto& r : runs) {
    Dataset fit_data = filter_doses(*r.data, excluded);
    FitOutcome fit = fit_candidates(fit_data, mcmc, derive_seed(seed, r.tag), 1.1,
                                    4000, r.name);
    OutcomeArtifacts art =
        emit_outcome(root, r.name, fit, grid, prov, derive_seed(seed, r.tag), true);
    overview[r.name] = outcome_summary(fit, art.expected, grid.control_index());
    outcomes.push_back(std::move(fit));
  }

  std::vector<Contour> contours;
  for (double d : {16.0, 24.0, 32.0, 40.0, 48.0})
    contours.push_back(joint_contour(outcomes[0].pooled, outcomes[2].pooled, d, 0.95));
  write_contours_csv(root / "contours.csv", contours, prov);
  write_text_file(root / "contours.svg",
                  contour_svg(contours, "SBM change vs adverse-event risk"));

  overview["excluded_doses"] = excluded;
  write_json(root / "summary.json", overview, prov);
  return root;
}

}  // namespace

std::filesystem::path reproduce_example(int n, std::uint64_t seed,
                                        const std::filesystem::path& out_root) {
  if (n < 1 || n > 4) throw config_error("example number must be 1..4");
  fs::path root = out_root / ("example" + std::to_string(n));
  fs::create_directories(root);
  switch (n) {
    case 1: return reproduce_example1(seed, root);
    case 2: return reproduce_example2(seed, root);
    case 3: return reproduce_example3(seed, root);
    default: return reproduce_example4(seed, root);
  }
}

}  // namespace doseforge
