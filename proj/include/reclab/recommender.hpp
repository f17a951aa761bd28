#pragma once

#include <algorithm>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "reclab/core.hpp"
#include "reclab/environment.hpp"
#include "reclab/params.hpp"

namespace reclab {

/// A rating-prediction recommender. Every model is refit from scratch by
/// fit(); predictions for unseen users or items fall back to model-specific
/// defaults rather than failing.
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual std::string name() const = 0;

  /// `rng` is the recommender's own stream (initialization, shuffling).
  virtual void fit(const ObservationSet& observations, Rng& rng) = 0;

  virtual double predict(UserId u, ItemId i) const = 0;

  /// Scores for every item for user `u`; `out` has n_items entries.
  virtual void score_user(UserId u, std::span<double> out) const {
    for (ItemId i = 0; i < out.size(); ++i) out[i] = predict(u, i);
  }

  /// False for models whose scores are not on the rating scale.
  virtual bool rating_scale_scores() const { return true; }

  /// Simulation-only hook for models that read the environment's ground truth.
  virtual void bind_environment(const Environment* /*env*/) {}

  std::vector<double> predict(std::span<const std::pair<UserId, ItemId>> pairs) const {
    std::vector<double> out;
    out.reserve(pairs.size());
    for (auto [u, i] : pairs) out.push_back(predict(u, i));
    return out;
  }
};

/// Top-n unrated items by score, ties broken by lower ItemId.
inline std::vector<ItemId> greedy_select(std::span<const double> scores,
                                         std::span<const std::uint8_t> rated, std::size_t n) {
  if (n < 1) throw ContractError("greedy_select: n must be at least 1");
  std::vector<ItemId> candidates;
  candidates.reserve(scores.size());
  for (ItemId i = 0; i < scores.size(); ++i) {
    if (rated.empty() || !rated[i]) candidates.push_back(i);
  }
  if (candidates.empty()) throw ContractError("greedy_select: user has no unrated items");
  const auto better = [&](ItemId a, ItemId b) {
    return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
  };
  const std::size_t take = std::min(n, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                    candidates.end(), better);
  candidates.resize(take);
  return candidates;
}

/// Rated-item mask of user `u` in `observations`.
inline std::vector<std::uint8_t> rated_mask(const ObservationSet& observations, UserId u) {
  std::vector<std::uint8_t> mask(observations.n_items(), 0);
  for (std::size_t k : observations.user_entries(u)) mask[observations[k].item] = 1;
  return mask;
}

/// Convenience: fitted model + history -> ranked recommendations for `u`.
inline std::vector<ItemId> recommend(const Recommender& model, const ObservationSet& observations,
                                     UserId u, std::size_t slate_size) {
  std::vector<double> scores(observations.n_items());
  model.score_user(u, scores);
  const auto mask = rated_mask(observations, u);
  return greedy_select(scores, mask, slate_size);
}

}  // namespace reclab
