#include "doseforge/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numeric>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"
#include "mcmc_internal.hpp"

namespace doseforge {

namespace mcmc_detail {

// rough per-coordinate scale of the working space, taken from the priors
Eigen::VectorXd working_scales(const ModelSpec& spec, const Transform& transform) {
  Eigen::VectorXd s = Eigen::VectorXd::Ones(transform.dim());
  for (std::size_t i = 0; i < transform.kind.size(); ++i) {
    const Prior& p = spec.priors[i];
    double g = transform.kind[i] == Transform::Kind::Log
                   ? (p.kind == Prior::Kind::LogNormal ? p.scale : 0.75)
                   : p.scale;
    s[static_cast<Eigen::Index>(i)] = std::clamp(g, 1e-3, 50.0);
  }
  if (transform.chart == Transform::Chart::ExpChord) {
    double s1 = spec.priors[0].scale, s2 = spec.priors[1].scale, s3 = spec.priors[2].scale;
    s[0] = std::clamp(std::hypot(s1, s2), 1e-3, 50.0);
    s[1] = std::clamp(std::hypot(s1, s2), 1e-3, 50.0);
    s[2] = std::clamp(s3, 1e-3, 50.0);
  } else if (transform.chart == Transform::Chart::ExpSinh) {
    s[0] = 2.0;
  } else if (transform.chart == Transform::Chart::HillTop) {
    double s1 = transform.free_intercept ? spec.priors[0].scale : 0.0;
    double s2 = spec.priors[static_cast<std::size_t>(transform.amp)].scale;
    s[transform.amp] = std::clamp(std::hypot(s1, 0.7 * s2), 1e-3, 50.0);
  } else if (transform.chart == Transform::Chart::LogisticChord) {
    double s1 = transform.free_intercept ? spec.priors[0].scale : 0.0;
    double s2 = spec.priors[static_cast<std::size_t>(transform.amp)].scale;
    double g = std::clamp(std::hypot(s1, 0.7 * s2), 1e-3, 50.0);
    for (int i = 0; i <= transform.amp; ++i) s[i] = g;
    s[transform.amp + 1] = 3.0;
  }
  if (transform.cut_count > 0) {
    s[transform.cut_start] =
        std::clamp(spec.priors[static_cast<std::size_t>(transform.cut_start)].scale, 1e-3, 50.0);
    for (int k = 1; k < transform.cut_count; ++k) s[transform.cut_start + k] = 1.0;
  }
  return s;
}

// warmup split into doubling adaptation windows; the proposal covariance is
// re-estimated at each boundary from that window alone, so the frozen proposal
// reflects late, settled history rather than the initial transient
std::vector<int> adaptation_windows(int warmup) {
  std::vector<int> ends;
  long size = std::max(50, warmup / 15);
  long pos = 0;
  while (true) {
    long next = pos + size;
    if (next + 2 * size > warmup) {
      ends.push_back(warmup);
      break;
    }
    ends.push_back(static_cast<int>(next));
    pos = next;
    size *= 2;
  }
  return ends;
}

}  // namespace mcmc_detail

namespace {
constexpr double neg_inf = -std::numeric_limits<double>::infinity();
}

void McmcConfig::validate() const {
  if (chains < 1) throw config_error("mcmc needs at least one chain");
  if (warmup < 1 || post_warmup < 1) throw config_error("mcmc iteration counts must be positive");
  if (thin < 1 || thin > post_warmup) throw config_error("mcmc thin must be in 1..post_warmup");
  if (!(target_accept > 0.0 && target_accept < 1.0))
    throw config_error("target acceptance must be in (0,1)");
}

Eigen::MatrixXd PosteriorDraws::flattened() const {
  Eigen::Index kept = kept_per_chain();
  Eigen::Index p = chains.empty() ? 0 : chains[0].cols();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(chains.size()) * kept, p);
  for (std::size_t c = 0; c < chains.size(); ++c)
    out.middleRows(static_cast<Eigen::Index>(c) * kept, kept) = chains[c];
  return out;
}

namespace {

using mcmc_detail::Transform;
using mcmc_detail::working_scales;
using mcmc_detail::adaptation_windows;

struct Posterior {
  const ModelSpec& spec;
  const Dataset& data;
  const Transform& transform;
  mutable long underflows = 0;

  double operator()(const Eigen::VectorXd& z) const {
    for (Eigen::Index i = 0; i < z.size(); ++i)
      if (!std::isfinite(z[i])) return neg_inf;
    Eigen::VectorXd x = transform.to_natural(z);
    if (!spec.params_admissible(x)) return neg_inf;
    LogLik ll = log_likelihood(spec, x, data);
    underflows += ll.underflows;
    double lp = ll.total + log_prior(spec, x);
    if (!std::isfinite(lp)) return neg_inf;
    return lp + transform.log_jacobian(z);
  }
};

// ---- initialization ----

struct DoseMean {
  double dose;
  double value;  // on the linear-predictor scale
};

std::vector<DoseMean> dose_profile(const ModelSpec& spec, const Dataset& data) {
  using F = Likelihood::Family;
  auto doses = data.distinct_doses();
  std::vector<DoseMean> out;
  for (double d : doses) {
    double sum = 0.0, trials = 0.0;
    long n = 0;
    for (const auto& r : data.rows)
      if (r.dose == d) {
        sum += r.response;
        trials += r.trials;
        ++n;
      }
    double v = 0.0;
    switch (spec.likelihood.family) {
      case F::NormalIndividual:
      case F::NormalSummary:
        v = sum / n;
        break;
      case F::Bernoulli:
        v = apply_link(spec.likelihood.link, (sum + 0.5) / (n + 1.0));
        break;
      case F::BinomialAggregate:
        v = apply_link(spec.likelihood.link, (sum + 0.5) / (trials + 1.0));
        break;
      case F::Poisson:
        v = std::log(sum / n + 0.1);
        break;
      case F::OrderedCategorical:
        v = 0.0;
        break;
    }
    out.push_back({d, v});
  }
  return out;
}

// ordinary least squares of value on a single transformed-dose regressor
std::pair<double, double> ols(const std::vector<DoseMean>& pts,
                              const std::function<double(double)>& basis) {
  double n = static_cast<double>(pts.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : pts) {
    double x = basis(p.dose);
    sx += x;
    sy += p.value;
    sxx += x * x;
    sxy += x * p.value;
  }
  double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return {sy / n, 0.0};
  double slope = (n * sxy - sx * sy) / denom;
  double intercept = (sy - slope * sx) / n;
  return {intercept, slope};
}

Eigen::VectorXd init_heuristic(const ModelSpec& spec, const Dataset& data) {
  Eigen::VectorXd x(spec.n_params());
  if (data.rows.empty()) {
    // prior-only run: start from prior centers, cutpoints spread to stay ordered
    int nc = spec.likelihood.cutpoint_count();
    int base = spec.n_params() - nc;
    for (int i = 0; i < base; ++i) {
      const Prior& p = spec.priors[static_cast<std::size_t>(i)];
      x[i] = p.kind == Prior::Kind::LogNormal      ? std::exp(p.loc)
             : p.kind == Prior::Kind::HalfStudentT ? p.scale
                                                   : p.loc;
    }
    for (int k = 0; k < nc; ++k) x[base + k] = k - 0.5 * (nc - 1);
    return x;
  }
  auto pts = dose_profile(spec, data);
  auto doses = data.distinct_doses();
  double dmax = doses.back();
  double dmed = doses[doses.size() / 2];
  if (dmed <= 0.0) dmed = dmax > 0.0 ? 0.5 * dmax : 1.0;

  double b1 = 0, b2 = 1, b3 = 1, b4 = 1;
  switch (spec.shape.kind) {
    case ShapeKind::Linear: {
      auto [a, b] = ols(pts, [](double d) { return d; });
      b1 = a;
      b2 = b;
      break;
    }
    case ShapeKind::LogLinear: {
      double c0 = spec.shape.log_offset;
      auto [a, b] = ols(pts, [c0](double d) { return std::log(d + c0); });
      b1 = a;
      b2 = b;
      break;
    }
    case ShapeKind::Emax: {
      b3 = dmed;
      auto [a, b] = ols(pts, [b3](double d) { return d / (b3 + d); });
      b1 = a;
      b2 = b;
      break;
    }
    case ShapeKind::SigmoidEmax: {
      b3 = dmed;
      b4 = 1.0;
      auto [a, b] = ols(pts, [b3](double d) { return d / (b3 + d); });
      b1 = a;
      b2 = b;
      break;
    }
    case ShapeKind::Exponential: {
      // try growth and decay rates, keep the better least-squares fit
      double rate = dmax > 0.0 ? 1.0 / dmax : 1.0;
      double best = std::numeric_limits<double>::infinity();
      for (double r : {rate, -rate}) {
        auto basis = [r](double d) { return std::exp(r * d); };
        auto [a, b] = ols(pts, basis);
        double sse = 0.0;
        for (const auto& p : pts) {
          double e = p.value - (a + b * basis(p.dose));
          sse += e * e;
        }
        if (sse < best) {
          best = sse;
          b1 = a;
          b2 = b;
          b3 = r;
        }
      }
      break;
    }
    case ShapeKind::Logistic: {
      b3 = dmed;
      b4 = std::max(0.25 * (dmax - doses.front()), 1e-2);
      auto [a, b] = ols(pts, [b3, b4](double d) { return expit((d - b3) / b4); });
      b1 = a;
      b2 = b;
      break;
    }
  }
  if (b2 == 0.0) b2 = 1e-2;

  int idx = 0;
  int np = shape_param_count(spec.shape.kind);
  double raw[4] = {b1, b2, b3, b4};
  for (int j = spec.fix_intercept ? 1 : 0; j < np; ++j) x[idx++] = raw[j];

  if (spec.likelihood.has_sigma()) {
    // residual spread around the per-dose means
    double ss = 0.0;
    long n = 0;
    for (const auto& r : data.rows) {
      for (const auto& p : pts)
        if (p.dose == r.dose) {
          ss += (r.response - p.value) * (r.response - p.value);
          ++n;
          break;
        }
    }
    double s = n > 1 ? std::sqrt(ss / (n - 1)) : 1.0;
    x[idx++] = std::max(s, 1e-3);
  }

  int nc = spec.likelihood.cutpoint_count();
  if (nc > 0) {
    // cumulative frequencies over all rows
    int K = spec.likelihood.categories;
    std::vector<double> counts(static_cast<std::size_t>(K), 0.5);
    for (const auto& r : data.rows)
      counts[static_cast<std::size_t>(r.response) - 1] += 1.0;
    double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    double cum = 0.0, prev = neg_inf;
    for (int k = 0; k < nc; ++k) {
      cum += counts[static_cast<std::size_t>(k)];
      double c = logit(std::clamp(cum / total, 1e-4, 1.0 - 1e-4));
      if (c <= prev) c = prev + 0.1;
      x[idx++] = c;
      prev = c;
    }
  }
  return x;
}

// ---- Nelder-Mead polish of the posterior mode in the working space ----

Eigen::VectorXd nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& start, int max_iter) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> simplex;
  std::vector<double> fv;
  simplex.push_back(start);
  fv.push_back(f(start));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = start;
    v[i] += v[i] != 0.0 ? 0.1 * std::abs(v[i]) + 0.05 : 0.1;
    simplex.push_back(v);
    fv.push_back(f(v));
  }
  auto order = [&]() {
    std::vector<std::size_t> idx(simplex.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return fv[a] > fv[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> f2;
    for (auto i : idx) {
      s2.push_back(simplex[i]);
      f2.push_back(fv[i]);
    }
    simplex = std::move(s2);
    fv = std::move(f2);
  };
  order();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[static_cast<std::size_t>(i)];
    centroid /= static_cast<double>(n);

    Eigen::VectorXd worst = simplex.back();
    Eigen::VectorXd refl = centroid + alpha * (centroid - worst);
    double fr = f(refl);
    if (fr > fv[0]) {
      Eigen::VectorXd exp_pt = centroid + gamma * (refl - centroid);
      double fe = f(exp_pt);
      if (fe > fr) {
        simplex.back() = exp_pt;
        fv.back() = fe;
      } else {
        simplex.back() = refl;
        fv.back() = fr;
      }
    } else if (fr > fv[fv.size() - 2]) {
      simplex.back() = refl;
      fv.back() = fr;
    } else {
      Eigen::VectorXd contr = centroid + rho * (worst - centroid);
      double fc = f(contr);
      if (fc > fv.back()) {
        simplex.back() = contr;
        fv.back() = fc;
      } else {
        for (std::size_t i = 1; i < simplex.size(); ++i) {
          simplex[i] = simplex[0] + shrink * (simplex[i] - simplex[0]);
          fv[i] = f(simplex[i]);
        }
      }
    }
    order();
    if (std::isfinite(fv[0]) && std::isfinite(fv.back()) && fv[0] - fv.back() < 1e-10)
      break;
  }
  return simplex[0];
}

// ---- one chain ----

struct ChainResult {
  Eigen::MatrixXd kept;  // kept x dim, natural scale
  long accepted_post = 0;
  long underflows = 0;
};

ChainResult run_chain(const ModelSpec& spec, const Dataset& data, const McmcConfig& cfg,
                      const Transform& transform, const Eigen::VectorXd& z_mode,
                      std::uint64_t chain_seed) {
  Posterior post{spec, data, transform, 0};
  Rng rng(chain_seed);
  int dim = transform.dim();

  // jittered start; fall back to prior draws, then give up
  Eigen::VectorXd z = z_mode;
  double lp = neg_inf;
  bool ok = false;
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    Eigen::VectorXd cand = z_mode;
    for (int i = 0; i < dim; ++i) cand[i] += 0.1 * (1.0 + std::abs(z_mode[i])) * rng.normal();
    double l = post(cand);
    if (std::isfinite(l)) {
      z = cand;
      lp = l;
      ok = true;
    }
  }
  for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
    Eigen::VectorXd x(spec.n_params());
    for (int i = 0; i < spec.n_params(); ++i)
      x[i] = spec.priors[static_cast<std::size_t>(i)].sample(rng);
    if (spec.likelihood.cutpoint_count() > 1) {
      int start = spec.shape_free_count() + (spec.likelihood.has_sigma() ? 1 : 0);
      std::sort(x.data() + start, x.data() + x.size());
      for (Eigen::Index k = start + 1; k < x.size(); ++k)
        if (x[k] - x[k - 1] < 1e-3) x[k] = x[k - 1] + 1e-3;
    }
    if (!spec.params_admissible(x)) continue;
    Eigen::VectorXd cand = transform.to_unconstrained(x);
    double l = post(cand);
    if (std::isfinite(l)) {
      z = cand;
      lp = l;
      ok = true;
    }
  }
  if (!ok)
    throw convergence_error("initialization failed: no finite log-posterior after 100 attempts (" +
                            spec.id() + ")");

  const double base_scale = 2.38 * 2.38 / dim;
  const long hist_floor = 5 * dim + 5;
  double log_lambda = 0.0;  // global proposal scale, Robbins-Monro tuned

  // moments of the current adaptation window
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  long nhist = 0;
  long rm_t = 0;

  // proposal shape (unit Cholesky factor); amplitude applied at proposal time
  Eigen::MatrixXd prop_chol =
      (0.1 / std::sqrt(base_scale)) * working_scales(spec, transform).asDiagonal();
  long warm_accepted = 0;

  auto refresh_chol = [&]() {
    if (nhist < hist_floor) return false;
    Eigen::MatrixXd c = cov / static_cast<double>(nhist - 1);
    double ridge = 1e-10 + 1e-6 * c.trace() / dim;
    c.diagonal().array() += ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(c);
    if (llt.info() != Eigen::Success) return false;
    prop_chol = llt.matrixL();
    return true;
  };

  std::vector<int> windows = adaptation_windows(cfg.warmup);
  std::size_t wi = 0;

  Eigen::VectorXd xi(dim), zprop(dim);
  for (int t = 1; t <= cfg.warmup; ++t) {
    double amp = std::sqrt(base_scale) * std::exp(0.5 * log_lambda);
    for (int i = 0; i < dim; ++i) xi[i] = rng.normal();
    zprop = z + amp * (prop_chol * xi);
    double lpp = post(zprop);
    double log_ratio = lpp - lp;
    double acc_prob = std::isfinite(lpp) ? std::min(1.0, std::exp(std::min(0.0, log_ratio))) : 0.0;
    if (acc_prob > 0.0 && std::log(rng.uniform()) < log_ratio) {
      z = zprop;
      lp = lpp;
      ++warm_accepted;
    }
    // Robbins-Monro step on the global scale, clock restarted per window
    ++rm_t;
    log_lambda += std::pow(static_cast<double>(rm_t), -0.7) * (acc_prob - cfg.target_accept);
    log_lambda = std::clamp(log_lambda, -15.0, 15.0);
    // Welford update of window moments
    ++nhist;
    Eigen::VectorXd delta = z - mean;
    mean += delta / static_cast<double>(nhist);
    cov += delta * (z - mean).transpose();
    if (wi < windows.size() && t == windows[wi]) {
      // window boundary: re-estimate the shape, restart accumulation and tuning
      if (refresh_chol() && t < cfg.warmup) {
        mean.setZero();
        cov.setZero();
        nhist = 0;
        rm_t = 0;
        log_lambda = 0.0;
      }
      ++wi;
    } else if (t % 50 == 0) {
      refresh_chol();
    }
  }
  if (warm_accepted == 0)
    throw convergence_error("adaptation failed: every warmup proposal was rejected (" +
                            spec.id() + ")");

  const double post_amp = std::sqrt(base_scale) * std::exp(0.5 * log_lambda);
  ChainResult result;
  result.kept.resize(cfg.kept_per_chain(), dim);
  Eigen::Index kept = 0;
  for (int t = 1; t <= cfg.post_warmup; ++t) {
    for (int i = 0; i < dim; ++i) xi[i] = rng.normal();
    zprop = z + post_amp * (prop_chol * xi);
    double lpp = post(zprop);
    if (std::isfinite(lpp) && std::log(rng.uniform()) < lpp - lp) {
      z = zprop;
      lp = lpp;
      ++result.accepted_post;
    }
    if (t % cfg.thin == 0 && kept < result.kept.rows())
      result.kept.row(kept++) = transform.to_natural(z);
  }
  result.underflows = post.underflows;
  return result;
}

}  // namespace

PosteriorDraws run_mcmc(const ModelSpec& spec, const Dataset& data, const McmcConfig& cfg) {
  spec.validate();
  data.validate();
  cfg.validate();
  if (!data.rows.empty() && data.likelihood.family != spec.likelihood.family)
    throw config_error("dataset and model likelihood disagree");

  auto span_doses = data.distinct_doses();
  double bot_dose = span_doses.empty() ? 0.0 : span_doses.front();
  double top_dose = span_doses.empty() ? 0.0 : span_doses.back();
  Transform transform = Transform::for_spec(spec, bot_dose, top_dose);
  Posterior post{spec, data, transform, 0};

  Eigen::VectorXd x0 = init_heuristic(spec, data);
  if (!spec.params_admissible(x0)) {
    for (Eigen::Index i = 0; i < x0.size(); ++i)
      if (!std::isfinite(x0[i])) x0[i] = 0.1;
  }
  Eigen::VectorXd z0;
  if (spec.params_admissible(x0) && std::isfinite(post(transform.to_unconstrained(x0)))) {
    z0 = nelder_mead([&](const Eigen::VectorXd& z) { return post(z); },
                     transform.to_unconstrained(x0), 400);
  } else {
    z0 = Eigen::VectorXd::Zero(transform.dim());
  }

  std::vector<std::future<ChainResult>> futures;
  futures.reserve(static_cast<std::size_t>(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c) {
    std::uint64_t chain_seed = derive_seed(cfg.seed, 0xC41A1Bu + static_cast<std::uint64_t>(c));
    futures.push_back(std::async(std::launch::async, [&, chain_seed]() {
      return run_chain(spec, data, cfg, transform, z0, chain_seed);
    }));
  }

  PosteriorDraws draws;
  draws.spec = spec;
  draws.param_names = spec.param_names();
  long accepted = 0, underflows = 0;
  for (auto& fut : futures) {
    ChainResult r = fut.get();
    accepted += r.accepted_post;
    underflows += r.underflows;
    draws.chains.push_back(std::move(r.kept));
  }
  draws.diag.accept_rate =
      static_cast<double>(accepted) / (static_cast<double>(cfg.chains) * cfg.post_warmup);
  draws.diag.underflows = underflows;

  if (cfg.chains >= 2 && cfg.kept_per_chain() >= 10) {
    DiagSummary ds = diagnostics(draws);
    draws.diag.rhat = ds.rhat;
    draws.diag.ess = ds.ess;
    draws.diag.zero_variance = ds.zero_variance;
  } else {
    draws.diag.rhat = Eigen::VectorXd::Constant(spec.n_params(), 1.0);
    draws.diag.ess = Eigen::VectorXd::Constant(spec.n_params(), 0.0);
  }
  return draws;
}

namespace {

// pooled average ranks, ties broken by averaging, then normal scores
std::vector<Eigen::VectorXd> rank_normal_scores(const std::vector<Eigen::VectorXd>& seqs) {
  std::size_t S = seqs.size();
  Eigen::Index L = seqs[0].size();
  std::size_t N = S * static_cast<std::size_t>(L);
  std::vector<std::pair<double, std::size_t>> pool;
  pool.reserve(N);
  for (std::size_t s = 0; s < S; ++s)
    for (Eigen::Index i = 0; i < L; ++i)
      pool.emplace_back(seqs[s][i], s * static_cast<std::size_t>(L) + static_cast<std::size_t>(i));
  std::sort(pool.begin(), pool.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> rank(N);
  std::size_t i = 0;
  while (i < N) {
    std::size_t j = i;
    while (j + 1 < N && pool[j + 1].first == pool[i].first) ++j;
    double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[pool[k].second] = avg;
    i = j + 1;
  }
  std::vector<Eigen::VectorXd> out(S, Eigen::VectorXd(L));
  double denom = static_cast<double>(N) + 0.25;
  for (std::size_t s = 0; s < S; ++s)
    for (Eigen::Index k = 0; k < L; ++k)
      out[s][k] = normal_quantile((rank[s * static_cast<std::size_t>(L) + static_cast<std::size_t>(k)] - 0.375) / denom);
  return out;
}

std::vector<Eigen::VectorXd> split_chains(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> seqs;
  for (const auto& c : chains) {
    Eigen::Index h = c.size() / 2;
    if (h < 2) throw config_error("diagnostics need at least 4 draws per chain");
    seqs.push_back(c.head(h));
    seqs.push_back(c.tail(h));
  }
  return seqs;
}

bool all_equal(const std::vector<Eigen::VectorXd>& chains) {
  double v0 = chains[0][0];
  for (const auto& c : chains)
    for (Eigen::Index i = 0; i < c.size(); ++i)
      if (c[i] != v0) return false;
  return true;
}

struct VarDecomp {
  double W = 0.0, var_plus = 0.0;
  std::vector<double> seq_mean, seq_var;
};

VarDecomp variance_decomposition(const std::vector<Eigen::VectorXd>& seqs) {
  VarDecomp vd;
  std::size_t S = seqs.size();
  double L = static_cast<double>(seqs[0].size());
  for (const auto& s : seqs) {
    double m = s.mean();
    double v = (s.array() - m).square().sum() / (L - 1.0);
    vd.seq_mean.push_back(m);
    vd.seq_var.push_back(v);
  }
  vd.W = std::accumulate(vd.seq_var.begin(), vd.seq_var.end(), 0.0) / static_cast<double>(S);
  double grand = std::accumulate(vd.seq_mean.begin(), vd.seq_mean.end(), 0.0) / static_cast<double>(S);
  double B_over_L = 0.0;
  for (double m : vd.seq_mean) B_over_L += (m - grand) * (m - grand);
  B_over_L /= static_cast<double>(S - 1);
  vd.var_plus = (L - 1.0) / L * vd.W + B_over_L;
  return vd;
}

}  // namespace

double split_rank_rhat(const std::vector<Eigen::VectorXd>& chains, bool* zero_variance) {
  if (chains.size() < 2) throw config_error("diagnostics unavailable with a single chain");
  if (zero_variance) *zero_variance = false;
  if (all_equal(chains)) {
    if (zero_variance) *zero_variance = true;
    return 1.0;
  }
  auto seqs = rank_normal_scores(split_chains(chains));
  VarDecomp vd = variance_decomposition(seqs);
  if (vd.W <= 0.0) {
    if (zero_variance) *zero_variance = true;
    return 1.0;
  }
  return std::sqrt(vd.var_plus / vd.W);
}

double bulk_ess(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.size() < 2) throw config_error("diagnostics unavailable with a single chain");
  if (all_equal(chains)) return 0.0;
  auto seqs = rank_normal_scores(split_chains(chains));
  std::size_t S = seqs.size();
  Eigen::Index L = seqs[0].size();
  double N = static_cast<double>(S) * static_cast<double>(L);
  VarDecomp vd = variance_decomposition(seqs);
  if (vd.var_plus <= 0.0) return 0.0;

  // per-sequence autocovariances (biased, 1/L normalization)
  std::vector<Eigen::VectorXd> acov(S, Eigen::VectorXd::Zero(L));
  for (std::size_t s = 0; s < S; ++s) {
    double m = vd.seq_mean[s];
    for (Eigen::Index t = 0; t < L; ++t) {
      double sum = 0.0;
      for (Eigen::Index i = 0; i + t < L; ++i) sum += (seqs[s][i] - m) * (seqs[s][i + t] - m);
      acov[s][t] = sum / static_cast<double>(L);
    }
  }
  auto rho = [&](Eigen::Index t) {
    double mean_acov = 0.0;
    for (std::size_t s = 0; s < S; ++s) mean_acov += acov[s][t];
    mean_acov /= static_cast<double>(S);
    return 1.0 - (vd.W - mean_acov) / vd.var_plus;
  };

  // Geyer initial positive + monotone pairs
  double tau = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; 2 * k + 1 < L; ++k) {
    double pair = rho(2 * k) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    prev_pair = pair;
    tau += pair;
  }
  tau = std::max(2.0 * tau - 1.0, 1.0 / std::numeric_limits<double>::max());
  double ess = N / tau;
  return std::min(ess, N * std::log10(std::max(N, 10.0)));
}

DiagSummary diagnostics(const PosteriorDraws& draws) {
  if (draws.chains.size() < 2)
    throw config_error("diagnostics unavailable with a single chain");
  Eigen::Index P = draws.chains[0].cols();
  DiagSummary out;
  out.rhat.resize(P);
  out.ess.resize(P);
  for (Eigen::Index p = 0; p < P; ++p) {
    std::vector<Eigen::VectorXd> per_param;
    per_param.reserve(draws.chains.size());
    for (const auto& c : draws.chains) per_param.push_back(c.col(p));
    bool zv = false;
    out.rhat[p] = split_rank_rhat(per_param, &zv);
    out.ess[p] = bulk_ess(per_param);
    out.zero_variance = out.zero_variance || zv;
  }
  return out;
}

}  // namespace doseforge
