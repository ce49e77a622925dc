#include "doseforge/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doseforge/math.hpp"
#include "doseforge/rng.hpp"

namespace doseforge {

WaicResult waic(const PosteriorDraws& draws, const Dataset& data) {
  Eigen::MatrixXd flat = draws.flattened();
  Eigen::Index S = flat.rows();
  Eigen::Index n = static_cast<Eigen::Index>(data.rows.size());
  if (S < 2) throw config_error("waic needs at least two draws");
  if (n == 0) throw config_error("waic needs a nonempty dataset");

  Eigen::MatrixXd ll(S, n);
  for (Eigen::Index s = 0; s < S; ++s)
    ll.row(s) = log_likelihood(draws.spec, flat.row(s), data).per_row.transpose();

  WaicResult out;
  Eigen::VectorXd pointwise(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd col = ll.col(i);
    double lppd = logsumexp(col) - std::log(static_cast<double>(S));
    double m = col.mean();
    double v = (col.array() - m).square().sum() / static_cast<double>(S - 1);
    pointwise[i] = lppd - v;
    out.p += v;
  }
  out.elpd = pointwise.sum();
  double pm = pointwise.mean();
  double pv = n > 1 ? (pointwise.array() - pm).square().sum() / static_cast<double>(n - 1) : 0.0;
  out.se = std::sqrt(static_cast<double>(n) * pv);
  return out;
}

ModelWeightSet compute_weights(const std::vector<WaicResult>& waics,
                               const std::vector<std::string>& ids) {
  if (waics.empty()) throw config_error("compute_weights needs at least one model");
  if (ids.size() != waics.size())
    throw config_error("compute_weights: id/waic count mismatch");

  double best = waics[0].elpd;
  for (const auto& w : waics) best = std::max(best, w.elpd);
  double total = 0.0;
  std::vector<double> raw(waics.size());
  for (std::size_t i = 0; i < waics.size(); ++i) {
    raw[i] = std::exp(waics[i].elpd - best);
    total += raw[i];
  }

  ModelWeightSet out;
  for (std::size_t i = 0; i < waics.size(); ++i) {
    ModelWeightEntry e;
    e.spec_id = ids[i];
    e.elpd = waics[i].elpd;
    e.p = waics[i].p;
    e.se = waics[i].se;
    e.weight = raw[i] / total;
    out.entries.push_back(e);
  }
  return out;
}

std::vector<long> largest_remainder(const Eigen::VectorXd& weights, long n) {
  if (n <= 0) throw config_error("pool size must be positive");
  Eigen::Index m = weights.size();
  std::vector<long> counts(static_cast<std::size_t>(m), 0);
  std::vector<std::pair<double, Eigen::Index>> remainders;
  long assigned = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double exact = weights[i] * static_cast<double>(n);
    long fl = static_cast<long>(std::floor(exact));
    counts[static_cast<std::size_t>(i)] = fl;
    assigned += fl;
    remainders.emplace_back(exact - static_cast<double>(fl), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (long k = 0; k < n - assigned; ++k)
    ++counts[static_cast<std::size_t>(remainders[static_cast<std::size_t>(k)].second)];
  return counts;
}

PooledDraws pool_draws(const std::vector<PosteriorDraws>& per_model,
                       const ModelWeightSet& weights, long n, std::uint64_t seed) {
  if (per_model.size() != weights.entries.size())
    throw config_error("pool_draws: weight/model count mismatch");
  if (n <= 0) throw config_error("pool size must be positive");

  Eigen::VectorXd w(static_cast<Eigen::Index>(weights.entries.size()));
  for (std::size_t i = 0; i < weights.entries.size(); ++i)
    w[static_cast<Eigen::Index>(i)] = weights.entries[i].weight;
  std::vector<long> counts = largest_remainder(w, n);

  PooledDraws out;
  out.seed = seed;
  out.draws.reserve(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (std::size_t m = 0; m < per_model.size(); ++m) {
    out.specs.push_back(per_model[m].spec);
    long count = counts[m];
    if (count == 0) continue;
    Eigen::MatrixXd flat = per_model[m].flattened();
    long avail = flat.rows();
    if (count <= avail) {
      // partial Fisher-Yates: first `count` slots of a shuffled index range
      std::vector<long> idx(static_cast<std::size_t>(avail));
      std::iota(idx.begin(), idx.end(), 0L);
      for (long i = 0; i < count; ++i) {
        long j = i + static_cast<long>(rng.below(static_cast<std::uint64_t>(avail - i)));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        out.draws.push_back({static_cast<int>(m), flat.row(idx[static_cast<std::size_t>(i)])});
      }
    } else {
      for (long i = 0; i < count; ++i) {
        long j = static_cast<long>(rng.below(static_cast<std::uint64_t>(avail)));
        out.draws.push_back({static_cast<int>(m), flat.row(j)});
      }
    }
  }
  return out;
}

}  // namespace doseforge
