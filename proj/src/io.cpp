#include "doseforge/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace doseforge {

namespace {

std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

std::string prior_kind_name(Prior::Kind kind) {
  switch (kind) {
    case Prior::Kind::StudentT: return "student_t";
    case Prior::Kind::HalfStudentT: return "half_student_t";
    case Prior::Kind::LogNormal: return "lognormal";
  }
  return "?";
}

}  // namespace

std::string Provenance::comment_line() const {
  return "# doseforge " + version + " seed=" + std::to_string(seed) +
         " config=" + hex64(config_hash) + "\n";
}

nlohmann::json Provenance::to_json() const {
  return {{"config_hash", hex64(config_hash)}, {"seed", seed}, {"version", version}};
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw config_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw config_error("write failed: " + path.string());
}

namespace {

void append_curve_rows(std::string& body, const CurveSummary& curve, bool with_label) {
  for (Eigen::Index i = 0; i < curve.grid.size(); ++i) {
    if (with_label) body += curve.label + ",";
    body += format_number(curve.grid.doses[i]) + "," + format_number(curve.mean[i]) +
            "," + format_number(curve.sd[i]) + "," + format_number(curve.q025[i]) +
            "," + format_number(curve.q25[i]) + "," + format_number(curve.q50[i]) +
            "," + format_number(curve.q75[i]) + "," + format_number(curve.q975[i]) +
            "\n";
  }
}

constexpr const char* curve_columns = "dose,mean,sd,q025,q25,q50,q75,q975\n";

}  // namespace

void write_curve_csv(const std::filesystem::path& path, const CurveSummary& curve,
                     const Provenance& prov) {
  bool with_label = curve.kind == CurveKind::CategoryProbability;
  std::string body = prov.comment_line();
  if (with_label) body += "category_set,";
  body += curve_columns;
  append_curve_rows(body, curve, with_label);
  write_text_file(path, body);
}

void write_category_curves_csv(const std::filesystem::path& path,
                               const std::vector<CurveSummary>& curves,
                               const Provenance& prov) {
  std::string body = prov.comment_line();
  body += "category_set,";
  body += curve_columns;
  for (const auto& c : curves) append_curve_rows(body, c, true);
  write_text_file(path, body);
}

void write_paired_csv(const std::filesystem::path& path, const PairedTable& table,
                      const Provenance& prov) {
  std::string body = prov.comment_line();
  body += table.has_severity ? "dose,y_eff,y_tox,severity\n" : "dose,y_eff,y_tox\n";
  for (const auto& r : table.rows) {
    body += format_number(r.dose) + "," + format_number(r.y_eff) + "," +
            format_number(r.y_tox);
    if (table.has_severity) body += "," + format_number(r.severity);
    body += "\n";
  }
  write_text_file(path, body);
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws,
                     const Provenance& prov) {
  std::string body = prov.comment_line();
  body += "chain,iter";
  for (const auto& name : draws.param_names) body += "," + name;
  body += "\n";
  for (std::size_t c = 0; c < draws.chains.size(); ++c) {
    const Eigen::MatrixXd& m = draws.chains[c];
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      body += std::to_string(c + 1) + "," + std::to_string(i + 1);
      for (Eigen::Index j = 0; j < m.cols(); ++j) body += "," + format_number(m(i, j));
      body += "\n";
    }
  }
  write_text_file(path, body);
}

void write_contours_csv(const std::filesystem::path& path,
                        const std::vector<Contour>& contours, const Provenance& prov) {
  std::string body = prov.comment_line();
  body += "dose,level,eff,tox\n";
  for (const auto& c : contours)
    for (Eigen::Index i = 0; i < c.points.rows(); ++i)
      body += format_number(c.dose) + "," + format_number(c.level) + "," +
              format_number(c.points(i, 0)) + "," + format_number(c.points(i, 1)) +
              "\n";
  write_text_file(path, body);
}

void write_success_csv(const std::filesystem::path& path, const SuccessTable& table,
                       const Provenance& prov) {
  std::string body = prov.comment_line();
  body += "dose,p_eff,p_tox,success\n";
  for (const auto& r : table.rows)
    body += format_number(r.dose) + "," + format_number(r.p_eff) + "," +
            format_number(r.p_tox) + "," + (r.success ? "1" : "0") + "\n";
  write_text_file(path, body);
}

nlohmann::json model_spec_to_json(const ModelSpec& spec) {
  nlohmann::json priors = nlohmann::json::array();
  for (const auto& p : spec.priors)
    priors.push_back({{"kind", prior_kind_name(p.kind)},
                      {"df", p.df},
                      {"loc", p.loc},
                      {"scale", p.scale}});
  nlohmann::json j = {{"shape", to_string(spec.shape.kind)},
                      {"likelihood", to_string(spec.likelihood.family)},
                      {"fix_intercept", spec.fix_intercept},
                      {"parameters", spec.param_names()},
                      {"priors", priors}};
  if (spec.shape.kind == ShapeKind::LogLinear) j["log_offset"] = spec.shape.log_offset;
  if (spec.likelihood.family == Likelihood::Family::Bernoulli ||
      spec.likelihood.family == Likelihood::Family::BinomialAggregate)
    j["link"] = to_string(spec.likelihood.link);
  if (spec.likelihood.family == Likelihood::Family::OrderedCategorical)
    j["categories"] = spec.likelihood.categories;
  return j;
}

nlohmann::json diagnostics_to_json(const PosteriorDraws& draws) {
  nlohmann::json rhat = nlohmann::json::object();
  nlohmann::json ess = nlohmann::json::object();
  for (std::size_t i = 0; i < draws.param_names.size(); ++i) {
    if (draws.diag.rhat.size() > static_cast<Eigen::Index>(i))
      rhat[draws.param_names[i]] = draws.diag.rhat[static_cast<Eigen::Index>(i)];
    if (draws.diag.ess.size() > static_cast<Eigen::Index>(i))
      ess[draws.param_names[i]] = draws.diag.ess[static_cast<Eigen::Index>(i)];
  }
  return {{"model", draws.spec.id()},
          {"spec", model_spec_to_json(draws.spec)},
          {"chains", draws.chains.size()},
          {"kept_per_chain", draws.kept_per_chain()},
          {"accept_rate", draws.diag.accept_rate},
          {"underflows", draws.diag.underflows},
          {"zero_variance", draws.diag.zero_variance},
          {"rhat", rhat},
          {"ess", ess}};
}

nlohmann::json weights_to_json(const ModelWeightSet& weights) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : weights.entries)
    arr.push_back({{"model", e.spec_id},
                   {"elpd", e.elpd},
                   {"p", e.p},
                   {"se", e.se},
                   {"weight", e.weight}});
  return {{"models", arr}};
}

nlohmann::json interval_to_json(const DoseInterval& interval) {
  return {{"lo", interval.lo},
          {"hi", interval.hi},
          {"empty", interval.empty},
          {"multimodal", interval.multimodal},
          {"criterion", interval.criterion}};
}

std::string weights_table(const ModelWeightSet& weights) {
  std::string out = "model            elpd       p      se  weight\n";
  char buf[96];
  for (const auto& e : weights.entries) {
    std::snprintf(buf, sizeof buf, "%-12s %9.2f %7.2f %7.2f %7.3f\n",
                  e.spec_id.c_str(), e.elpd, e.p, e.se, e.weight);
    out += buf;
  }
  return out;
}

void write_json(const std::filesystem::path& path, nlohmann::json j,
                const Provenance& prov) {
  j["provenance"] = prov.to_json();
  write_text_file(path, j.dump(2) + "\n");
}

// ---- ingestion ----

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    std::size_t a = f.find_first_not_of(" \t");
    std::size_t b = f.find_last_not_of(" \t");
    f = a == std::string::npos ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

struct CsvFile {
  std::ifstream in;
  std::string name;
  long line_no = 0;

  explicit CsvFile(const std::filesystem::path& path)
      : in(path), name(path.string()) {
    if (!in) throw config_error("cannot open: " + name);
  }

  // next non-comment, non-blank line
  bool next(std::string* line) {
    while (std::getline(in, *line)) {
      ++line_no;
      std::size_t a = line->find_first_not_of(" \t\r");
      if (a == std::string::npos || (*line)[a] == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(long at, const std::string& what) const {
    throw config_error(name + " line " + std::to_string(at) + ": " + what);
  }
};

double parse_field_double(CsvFile& file, long at, const std::string& field,
                          const char* what) {
  if (field.empty()) file.fail(at, std::string("missing ") + what);
  char* end = nullptr;
  double x = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size() || !std::isfinite(x))
    file.fail(at, std::string("malformed ") + what + " value '" + field + "'");
  return x;
}

long parse_field_long(CsvFile& file, long at, const std::string& field,
                      const char* what) {
  double x = parse_field_double(file, at, field, what);
  long n = std::lround(x);
  if (x != static_cast<double>(n))
    file.fail(at, std::string(what) + " must be an integer, got '" + field + "'");
  return n;
}

std::vector<std::string> read_header(CsvFile& file,
                                     const std::vector<std::string>& expected,
                                     std::size_t optional_tail) {
  std::string line;
  if (!file.next(&line)) file.fail(file.line_no, "missing header");
  auto fields = split_fields(line);
  std::string want;
  for (std::size_t i = 0; i < expected.size(); ++i)
    want += (i ? "," : "") + expected[i];
  bool ok = fields.size() == expected.size() ||
            fields.size() == expected.size() - optional_tail;
  if (ok)
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i] != expected[i]) ok = false;
  if (!ok) file.fail(file.line_no, "header must be '" + want + "'");
  return fields;
}

}  // namespace

PairedTable ingest_individual_csv(const std::filesystem::path& path) {
  CsvFile file(path);
  auto header = read_header(file, {"dose", "y_eff", "y_tox", "severity"}, 1);
  PairedTable table;
  table.has_severity = header.size() == 4;
  std::string line;
  while (file.next(&line)) {
    auto f = split_fields(line);
    if (f.size() != header.size())
      file.fail(file.line_no, "expected " + std::to_string(header.size()) +
                                  " fields, got " + std::to_string(f.size()));
    PairedRow row;
    row.dose = parse_field_double(file, file.line_no, f[0], "dose");
    row.y_eff = parse_field_double(file, file.line_no, f[1], "y_eff");
    row.y_tox = parse_field_double(file, file.line_no, f[2], "y_tox");
    if (table.has_severity) {
      row.severity = parse_field_double(file, file.line_no, f[3], "severity");
      if (row.severity < 0.0 || row.severity > 1.0)
        file.fail(file.line_no, "severity must lie in [0,1]");
    }
    table.rows.push_back(row);
  }
  if (table.rows.empty()) file.fail(file.line_no, "no data rows");
  return table;
}

Dataset ingest_summary_csv(const std::filesystem::path& path) {
  CsvFile file(path);
  read_header(file, {"dose", "mean", "se", "n"}, 0);
  Dataset data;
  data.likelihood.family = Likelihood::Family::NormalSummary;
  std::string line;
  while (file.next(&line)) {
    auto f = split_fields(line);
    if (f.size() != 4)
      file.fail(file.line_no, "expected 4 fields, got " + std::to_string(f.size()));
    Observation obs;
    obs.dose = parse_field_double(file, file.line_no, f[0], "dose");
    obs.response = parse_field_double(file, file.line_no, f[1], "mean");
    obs.se = parse_field_double(file, file.line_no, f[2], "se");
    if (obs.se <= 0.0) file.fail(file.line_no, "standard error must be positive");
    long n = parse_field_long(file, file.line_no, f[3], "n");
    if (n < 1) file.fail(file.line_no, "n must be at least 1");
    obs.trials = static_cast<int>(n);
    data.rows.push_back(obs);
  }
  if (data.rows.empty()) file.fail(file.line_no, "no data rows");
  data.validate();
  return data;
}

Dataset ingest_categorical_csv(const std::filesystem::path& path,
                               int expected_categories) {
  CsvFile file(path);
  read_header(file, {"dose", "category"}, 0);
  Dataset data;
  data.likelihood.family = Likelihood::Family::OrderedCategorical;
  long max_cat = 0;
  std::string line;
  while (file.next(&line)) {
    auto f = split_fields(line);
    if (f.size() != 2)
      file.fail(file.line_no, "expected 2 fields, got " + std::to_string(f.size()));
    Observation obs;
    obs.dose = parse_field_double(file, file.line_no, f[0], "dose");
    long cat = parse_field_long(file, file.line_no, f[1], "category");
    if (cat < 1 || (expected_categories > 0 && cat > expected_categories))
      file.fail(file.line_no,
                "category " + std::to_string(cat) + " out of 1.." +
                    (expected_categories > 0 ? std::to_string(expected_categories)
                                             : std::string("K")));
    max_cat = std::max(max_cat, cat);
    obs.response = static_cast<double>(cat);
    data.rows.push_back(obs);
  }
  if (data.rows.empty()) file.fail(file.line_no, "no data rows");
  data.likelihood.categories =
      expected_categories > 0 ? expected_categories
                              : static_cast<int>(std::max(max_cat, 2L));
  data.validate();
  return data;
}

}  // namespace doseforge
