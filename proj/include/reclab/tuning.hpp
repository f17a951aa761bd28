#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "reclab/metrics.hpp"
#include "reclab/recs/registry.hpp"

namespace reclab {

enum class Objective { rmse, ndcg };

using Folds = std::vector<std::vector<std::size_t>>;

/// Uniform random partition of tuple indices [0, n) into k folds whose sizes
/// differ by at most one (the first n mod k folds get the extra tuple).
inline Folds kfold_split(std::size_t n, std::size_t k, Rng& rng) {
  if (k < 2) throw ContractError("kfold: k must be at least 2");
  if (n < k) throw ContractError("kfold: k exceeds the number of observations");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Folds folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
    std::sort(folds[f].begin(), folds[f].end());
    pos += size;
  }
  return folds;
}

inline Folds kfold_split(const ObservationSet& obs, std::size_t k, Rng& rng) {
  return kfold_split(obs.size(), k, rng);
}

struct FoldMetrics {
  std::optional<double> rmse;
  std::optional<double> ndcg;
};

/// Held-out RMSE (rating-scale models only) and nDCG@k with test tuples
/// grouped by user.
inline FoldMetrics evaluate_heldout(const Recommender& model, const ObservationSet& test, std::size_t ndcg_k) {
  FoldMetrics out;
  std::vector<double> predicted, actual;
  std::vector<std::vector<RankedEntry>> per_user(test.n_users());
  for (const auto& o : test) {
    const double p = model.predict(o.user, o.item);
    predicted.push_back(p);
    actual.push_back(o.rating);
    per_user[o.user].push_back({o.item, p, o.rating});
  }
  if (model.rating_scale_scores() && !predicted.empty()) out.rmse = rmse(predicted, actual);
  try {
    out.ndcg = ndcg_at_k(per_user, ndcg_k);
  } catch (const ContractError&) {
    // No user has two held-out items; nDCG is undefined for this fold.
  }
  return out;
}

using RecommenderFactory = std::function<std::unique_ptr<Recommender>(const ParamMap&)>;

/// Fits a fresh model per fold on the complement and evaluates on the fold.
/// The fit stream of fold f is seed/"fit"/f, independent of the config.
inline std::vector<FoldMetrics> cross_validate(const RecommenderFactory& factory, const ParamMap& config,
                                               const ObservationSet& obs, const Folds& folds,
                                               const RngSeed& seed, std::size_t ndcg_k) {
  std::vector<FoldMetrics> out;
  std::vector<std::uint8_t> in_fold(obs.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (std::size_t k : folds[f]) in_fold[k] = 1;
    std::vector<std::size_t> train_idx;
    train_idx.reserve(obs.size() - folds[f].size());
    for (std::size_t k = 0; k < obs.size(); ++k) {
      if (!in_fold[k]) train_idx.push_back(k);
    }
    const ObservationSet train = obs.subset(train_idx);
    const ObservationSet test = obs.subset(folds[f]);
    auto model = factory(config);
    Rng fit_rng = seed.derive("fit").derive(f).stream();
    model->fit(train, fit_rng);
    out.push_back(evaluate_heldout(*model, test, ndcg_k));
  }
  return out;
}

/// Cartesian product of the axes, first axis (by name) varying slowest.
inline std::vector<ParamMap> expand_grid(const GridAxes& axes) {
  std::vector<ParamMap> out{ParamMap{}};
  for (const auto& [name, values] : axes) {
    if (values.empty()) throw ContractError("empty grid axis '" + name + "'");
    std::vector<ParamMap> next;
    next.reserve(out.size() * values.size());
    for (const auto& partial : out) {
      for (const auto& v : values) {
        ParamMap m = partial;
        m[name] = v;
        next.push_back(std::move(m));
      }
    }
    out = std::move(next);
  }
  return out;
}

struct ConfigScore {
  ParamMap config;
  std::vector<FoldMetrics> folds;
  std::optional<double> mean_rmse;
  std::optional<double> mean_ndcg;
  bool failed = false;
  std::string error;
};

struct GridResult {
  ParamMap best;
  std::size_t best_index = 0;
  std::vector<ConfigScore> table;
};

inline std::optional<double> mean_of(const std::vector<FoldMetrics>& folds,
                                     std::optional<double> FoldMetrics::*field) {
  double s = 0.0;
  for (const auto& f : folds) {
    if (!(f.*field)) return std::nullopt;
    s += *(f.*field);
  }
  return folds.empty() ? std::nullopt : std::optional<double>(s / static_cast<double>(folds.size()));
}

/// Exhaustive search with one shared set of folds. Minimizes mean RMSE or
/// maximizes mean nDCG; ties keep the earlier grid point. Configurations
/// whose fits throw are recorded as failed and skipped.
inline GridResult grid_search(const RecommenderFactory& factory, const GridAxes& axes, const ObservationSet& obs,
                              std::size_t k, Objective objective, const RngSeed& seed, std::size_t ndcg_k = 20) {
  const auto configs = expand_grid(axes);
  if (configs.empty()) throw ContractError("empty grid");
  Rng fold_rng = seed.derive("folds").stream();
  const Folds folds = kfold_split(obs, k, fold_rng);

  GridResult result;
  std::optional<double> best_value;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    ConfigScore score;
    score.config = configs[c];
    try {
      score.folds = cross_validate(factory, configs[c], obs, folds, seed, ndcg_k);
      score.mean_rmse = mean_of(score.folds, &FoldMetrics::rmse);
      score.mean_ndcg = mean_of(score.folds, &FoldMetrics::ndcg);
      const auto value = objective == Objective::rmse ? score.mean_rmse : score.mean_ndcg;
      if (!value || !std::isfinite(*value)) {
        score.failed = true;
        score.error = "objective undefined";
      } else if (!best_value || (objective == Objective::rmse ? *value < *best_value : *value > *best_value)) {
        best_value = value;
        result.best_index = c;
      }
    } catch (const std::exception& e) {
      score.failed = true;
      score.error = e.what();
    }
    result.table.push_back(std::move(score));
  }
  if (!best_value) throw std::runtime_error("grid search: every configuration failed");
  result.best = result.table[result.best_index].config;
  return result;
}

/// RMSE for rating-scale models, nDCG otherwise.
inline Objective default_objective(const std::string& recommender) {
  return recommender == "ease" ? Objective::ndcg : Objective::rmse;
}

}  // namespace reclab
