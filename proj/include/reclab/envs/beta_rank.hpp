#pragma once

#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "reclab/environment.hpp"

namespace reclab {

struct BetaParams {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Beta shape parameters with the given mean and variance.
inline BetaParams beta_moments(double mean, double variance) {
  if (!(mean > 0.0 && mean < 1.0)) throw ContractError("beta moments: mean must lie in (0, 1)");
  if (!(variance > 0.0 && variance < mean * (1.0 - mean))) {
    throw ContractError("beta moments: variance must lie in (0, mean * (1 - mean))");
  }
  const double nu = mean * (1.0 - mean) / variance - 1.0;
  return {mean * nu, (1.0 - mean) * nu};
}

inline double draw_beta(BetaParams p, Rng& rng) {
  const double x = std::gamma_distribution<double>(p.alpha, 1.0)(rng);
  const double y = std::gamma_distribution<double>(p.beta, 1.0)(rng);
  return x / (x + y);
}

/// Position weight of the 1-based slate rank.
inline double rank_discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

/// Choice distribution over a ranked slate given the user's known utilities.
inline std::vector<double> beta_rank_choice_probabilities(std::span<const double> utilities) {
  if (utilities.empty()) throw ContractError("beta-rank: empty slate");
  std::vector<double> w(utilities.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = utilities[k] * rank_discount(k + 1);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

inline std::vector<double> draw_dirichlet(std::size_t dim, double concentration, Rng& rng) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> v(dim);
  double total = 0.0;
  do {
    total = 0.0;
    for (auto& x : v) total += (x = g(rng));
  } while (total <= 0.0);
  for (auto& x : v) x /= total;
  return v;
}

struct BetaRankConfig {
  std::size_t n_users = 170;
  std::size_t n_items = 100;
  std::size_t dim = 10;
  double concentration = 0.7;
  double variance = 1e-5;        // observation variance
  double known_variance = 1e-5;  // variance of the user's private utility estimate
  std::size_t slate_size = 10;
  std::size_t max_resample = 1000;
};

/// Nonnegative Dirichlet factors give p_u . q_i in (0, 1); users pick from a
/// slate with probability proportional to known utility times rank discount.
class BetaRankEnvironment final : public Environment {
 public:
  explicit BetaRankEnvironment(BetaRankConfig config) : cfg_(config) {
    if (cfg_.dim < 1 || cfg_.concentration <= 0) throw ContractError("beta-rank: bad factor prior");
    if (cfg_.variance <= 0 || cfg_.known_variance <= 0) {
      throw ContractError("beta-rank: variances must be positive");
    }
    if (cfg_.variance >= 0.25 || cfg_.known_variance >= 0.25) {
      throw ContractError("beta-rank: variance must be below 0.25 for any mean to be feasible");
    }
    if (cfg_.slate_size < 1) throw ContractError("beta-rank: slate size must be >= 1");
  }

  std::string name() const override { return "beta-rank"; }
  std::size_t n_users() const override { return cfg_.n_users; }
  std::size_t n_items() const override { return cfg_.n_items; }
  RatingRange rating_range() const override { return {0.0, 1.0}; }
  std::size_t slate_size() const override { return cfg_.slate_size; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<BetaRankEnvironment>(*this); }

  void reset(const RngSeed& seed) override {
    Rng init = seed.derive("init").stream();
    noise_ = seed.derive("noise").stream();
    users_.clear();
    items_.clear();
    for (std::size_t u = 0; u < cfg_.n_users; ++u) {
      users_.push_back(draw_dirichlet(cfg_.dim, cfg_.concentration, init));
    }
    // Resample any item whose mean against some user makes a moment match
    // infeasible, so that choice time never fails.
    for (std::size_t i = 0; i < cfg_.n_items; ++i) {
      std::size_t attempts = 0;
      for (;;) {
        auto q = draw_dirichlet(cfg_.dim, cfg_.concentration, init);
        if (feasible_against_all_users(q)) {
          items_.push_back(std::move(q));
          break;
        }
        if (++attempts >= cfg_.max_resample) {
          throw ContractError("beta-rank: could not draw feasible factors for item " +
                              std::to_string(i));
        }
      }
    }
  }

  double mean(UserId u, ItemId i) const {
    const auto& p = users_[u];
    const auto& q = items_[i];
    return std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
  }

  double true_rating(UserId u, ItemId i) const override { return mean(u, i); }

  std::pair<ItemId, double> choose(const Slate& slate) {
    if (slate.items.empty()) throw ContractError("beta-rank: empty slate");
    std::vector<double> utility(slate.items.size());
    for (std::size_t k = 0; k < utility.size(); ++k) {
      utility[k] = draw_beta(beta_moments(mean(slate.user, slate.items[k]), cfg_.known_variance), noise_);
    }
    const auto probs = beta_rank_choice_probabilities(utility);
    std::discrete_distribution<std::size_t> pick(probs.begin(), probs.end());
    const ItemId i = slate.items[pick(noise_)];
    return {i, rate_offline(slate.user, i)};
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

 protected:
  double rate_offline(UserId u, ItemId i) override {
    return draw_beta(beta_moments(mean(u, i), cfg_.variance), noise_);
  }

 private:
  bool feasible_against_all_users(const std::vector<double>& q) const {
    const double var = std::max(cfg_.variance, cfg_.known_variance);
    for (const auto& p : users_) {
      const double mu = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
      if (!(mu > 0.0 && mu < 1.0 && var < mu * (1.0 - mu))) return false;
    }
    return true;
  }

  BetaRankConfig cfg_;
  std::vector<std::vector<double>> users_;
  std::vector<std::vector<double>> items_;
  Rng noise_;
};

}  // namespace reclab
