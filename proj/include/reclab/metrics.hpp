#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "reclab/core.hpp"
#include "reclab/recommender.hpp"

namespace reclab {

/// Online metrics of one timestep.
struct TimestepRecord {
  int timestep = 0;
  double mean_rating = 0.0;
  std::optional<double> observed_rmse;  // absent for models not on the rating scale
  std::size_t coverage = 0;
  double novelty = 0.0;
  std::optional<double> gini;
  std::optional<double> population_rmse;
  std::size_t n_new_ratings = 0;
  std::size_t n_ratings_total = 0;
};

inline double rmse(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw ContractError("rmse: length mismatch");
  if (predicted.empty()) throw ContractError("rmse: empty input");
  double s = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    const double e = predicted[k] - actual[k];
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(predicted.size()));
}

inline double mean_rating(std::span<const double> ratings) {
  if (ratings.empty()) throw ContractError("mean_rating: empty input");
  return std::accumulate(ratings.begin(), ratings.end(), 0.0) / static_cast<double>(ratings.size());
}

/// One scored test entry of a user.
struct RankedEntry {
  ItemId item = 0;
  double predicted = 0.0;
  double truth = 0.0;
};

/// Ratio of summed DCG to summed ideal DCG over users. Users with fewer than
/// two entries are skipped; prediction ties rank the lower ItemId first.
inline double ndcg_at_k(const std::vector<std::vector<RankedEntry>>& per_user, std::size_t k) {
  if (k < 1) throw ContractError("ndcg: k must be at least 1");
  double dcg = 0.0, idcg = 0.0;
  bool any = false;
  std::vector<RankedEntry> order;
  for (const auto& entries : per_user) {
    if (entries.size() < 2) continue;
    any = true;
    const std::size_t depth = std::min(k, entries.size());
    order = entries;
    std::sort(order.begin(), order.end(), [](const RankedEntry& a, const RankedEntry& b) {
      return a.predicted > b.predicted || (a.predicted == b.predicted && a.item < b.item);
    });
    for (std::size_t pos = 0; pos < depth; ++pos) dcg += order[pos].truth / std::log2(pos + 2.0);
    std::sort(order.begin(), order.end(), [](const RankedEntry& a, const RankedEntry& b) {
      return a.truth > b.truth || (a.truth == b.truth && a.item < b.item);
    });
    for (std::size_t pos = 0; pos < depth; ++pos) idcg += order[pos].truth / std::log2(pos + 2.0);
  }
  if (!any) throw ContractError("ndcg: every user has fewer than two entries");
  if (idcg == 0.0) throw ContractError("ndcg: ideal DCG is zero");
  return dcg / idcg;
}

inline std::size_t coverage(std::span<const ItemId> recommended) {
  return std::unordered_set<ItemId>(recommended.begin(), recommended.end()).size();
}

/// Mean self-information of the recommended items. `raters_before[i]` counts
/// users who rated item i before this timestep; popularity is floored at
/// 1/n_users.
inline double novelty(std::span<const ItemId> recommended, std::span<const std::size_t> raters_before,
                      std::size_t n_users) {
  if (recommended.empty()) throw ContractError("novelty: no recommendations");
  if (n_users == 0) throw ContractError("novelty: no users");
  const double floor = 1.0 / static_cast<double>(n_users);
  double s = 0.0;
  for (ItemId i : recommended) {
    const double p = std::max(static_cast<double>(raters_before[i]) / static_cast<double>(n_users), floor);
    s -= std::log2(p);
  }
  return s / static_cast<double>(recommended.size());
}

/// Mean absolute difference over all ordered pairs divided by twice the mean.
inline double gini(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw ContractError("gini: all counts are zero");
  // Sorted form of sum_i sum_j |x_i - x_j| = 2 sum_k (2k - n + 1) x_(k).
  std::vector<double> x(counts.begin(), counts.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (2.0 * static_cast<double>(k) - n + 1.0) * x[k];
  return 2.0 * s / (2.0 * n * total);
}

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> idx(xs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t start = 0; start < idx.size();) {
    std::size_t stop = start + 1;
    while (stop < idx.size() && xs[idx[stop]] == xs[idx[start]]) ++stop;
    const double avg = 0.5 * static_cast<double>(start + 1 + stop);
    for (std::size_t k = start; k < stop; ++k) ranks[idx[k]] = avg;
    start = stop;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
    syy += (ys[k] - my) * (ys[k] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw ContractError("correlation: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw ContractError("spearman: length mismatch");
  if (xs.size() < 2) throw ContractError("spearman: need at least two points");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

/// Prediction error against the dense noiseless truth.
inline double population_rmse(const Recommender& model, const RatingTable& truth) {
  if (truth.values.empty()) throw ContractError("population_rmse: empty snapshot");
  std::vector<double> scores(truth.n_items);
  double s = 0.0;
  for (UserId u = 0; u < truth.n_users; ++u) {
    model.score_user(u, scores);
    for (ItemId i = 0; i < truth.n_items; ++i) {
      const double e = scores[i] - truth(u, i);
      s += e * e;
    }
  }
  return std::sqrt(s / static_cast<double>(truth.values.size()));
}

/// Mean and 95% normal-approximation half-width; no half-width below n = 2.
struct Interval {
  double mean = 0.0;
  std::optional<double> half_width;
};

inline Interval aggregate_ci(std::span<const double> values) {
  if (values.empty()) throw ContractError("aggregate_ci: no values");
  Interval out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.half_width = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace reclab
