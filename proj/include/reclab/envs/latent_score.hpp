#pragma once

#include <cmath>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "reclab/envs/latent.hpp"

namespace reclab {

/// Index into the slate the user picks: the maximum of recommender score plus
/// the user's private noise. Exact ties are broken uniformly with `rng`.
inline std::size_t latent_score_pick(std::span<const double> scores, std::span<const double> known,
                                     Rng& rng) {
  if (scores.empty()) throw ContractError("latent-score: empty slate");
  if (scores.size() != known.size()) throw ContractError("latent-score: size mismatch");
  double best = -INFINITY;
  std::vector<std::size_t> ties;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double v = scores[k] + known[k];
    if (v > best) {
      best = v;
      ties.assign(1, k);
    } else if (v == best) {
      ties.push_back(k);
    }
  }
  return ties.size() == 1 ? ties.front() : ties[uniform_index(rng, ties.size())];
}

struct LatentScoreConfig {
  LatentConfig latent{170, 100, 8, 0.5, 3.0, 0.25, -1.0};
  std::size_t slate_size = 10;
  double known_fraction = 0.5;
};

/// Users see a slate, know part of each item's noise term, and combine it with
/// the recommender's score to pick one item. The realized rating includes both
/// the known and the unknown part of the noise.
class LatentScoreEnvironment final : public Environment {
 public:
  explicit LatentScoreEnvironment(LatentScoreConfig config) : cfg_(config) {
    if (cfg_.known_fraction < 0 || cfg_.known_fraction > 1) {
      throw ContractError("latent-score: known fraction must lie in [0, 1]");
    }
    if (cfg_.slate_size < 1) throw ContractError("latent-score: slate size must be >= 1");
  }

  std::string name() const override { return "latent-score"; }
  std::size_t n_users() const override { return cfg_.latent.n_users; }
  std::size_t n_items() const override { return cfg_.latent.n_items; }
  RatingRange rating_range() const override { return state_.range; }
  std::size_t slate_size() const override { return cfg_.slate_size; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<LatentScoreEnvironment>(*this); }

  void reset(const RngSeed& seed) override {
    Rng init = seed.derive("init").stream();
    noise_ = seed.derive("noise").stream();
    state_ = draw_latent_state(cfg_.latent, init);
    const double known_std = std::sqrt(cfg_.known_fraction) * cfg_.latent.noise_std;
    std::normal_distribution<double> z(0.0, 1.0);
    known_ = RatingTable(n_users(), n_items());
    for (auto& e : known_.values) e = known_std * z(init);
  }

  double true_rating(UserId u, ItemId i) const override { return latent_rate(state_, u, i, 0.0); }

  /// The chosen item and its realized rating.
  std::pair<ItemId, double> choose(const Slate& slate) {
    if (slate.items.empty()) throw ContractError("latent-score: empty slate");
    if (slate.items.size() > cfg_.slate_size) throw ContractError("latent-score: slate too large");
    std::vector<double> known(slate.items.size());
    for (std::size_t k = 0; k < slate.items.size(); ++k) known[k] = known_(slate.user, slate.items[k]);
    const ItemId i = slate.items[latent_score_pick(slate.scores, known, noise_)];
    return {i, realize(slate.user, i)};
  }

  std::vector<Observation> online_step(std::span<const Slate> slates, int timestep) override {
    std::vector<Observation> out;
    out.reserve(slates.size());
    for (const auto& slate : slates) {
      auto [item, rating] = choose(slate);
      out.push_back({slate.user, item, rating, timestep});
    }
    return out;
  }

  const LatentState& state() const { return state_; }
  double known_noise(UserId u, ItemId i) const { return known_(u, i); }

 protected:
  double rate_offline(UserId u, ItemId i) override { return realize(u, i); }

 private:
  double realize(UserId u, ItemId i) {
    const double unknown_std = std::sqrt(1.0 - cfg_.known_fraction) * cfg_.latent.noise_std;
    const double unknown = unknown_std * std::normal_distribution<double>(0.0, 1.0)(noise_);
    return latent_rate(state_, u, i, known_(u, i) + unknown);
  }

  LatentScoreConfig cfg_;
  LatentState state_;
  RatingTable known_;
  Rng noise_;
};

}  // namespace reclab
