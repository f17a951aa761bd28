#pragma once

#include <random>
#include <string>
#include <vector>

#include "reclab/recommender.hpp"

namespace reclab {

/// Non-personalized: every user gets the items with the highest mean rating.
class TopPop final : public Recommender {
 public:
  explicit TopPop(RatingRange range = {}) : range_(range) {}

  std::string name() const override { return "toppop"; }

  void fit(const ObservationSet& obs, Rng&) override {
    std::vector<double> sum(obs.n_items(), 0.0);
    std::vector<std::size_t> count(obs.n_items(), 0);
    for (const auto& o : obs) {
      sum[o.item] += o.rating;
      ++count[o.item];
    }
    const double fallback = obs.empty() ? range_.midpoint() : obs.mean_rating();
    popularity_.assign(obs.n_items(), fallback);
    for (ItemId i = 0; i < obs.n_items(); ++i) {
      if (count[i] > 0) popularity_[i] = sum[i] / static_cast<double>(count[i]);
    }
  }

  double predict(UserId, ItemId i) const override { return popularity_.at(i); }

 private:
  RatingRange range_;
  std::vector<double> popularity_;
};

/// Uniform random scores, redrawn on every fit.
class RandomRecommender final : public Recommender {
 public:
  explicit RandomRecommender(RatingRange range = {}) : range_(range) {}

  std::string name() const override { return "random"; }

  void fit(const ObservationSet& obs, Rng& rng) override {
    table_ = RatingTable(obs.n_users(), obs.n_items());
    std::uniform_real_distribution<double> unif(range_.lo, range_.hi);
    for (auto& v : table_.values) v = unif(rng);
  }

  double predict(UserId u, ItemId i) const override { return table_(u, i); }

 private:
  RatingRange range_;
  RatingTable table_;
};

/// Reads the environment's noiseless ratings at the moment of recommendation.
class Oracle final : public Recommender {
 public:
  std::string name() const override { return "oracle"; }

  void bind_environment(const Environment* env) override { env_ = env; }

  void fit(const ObservationSet&, Rng&) override {
    if (env_ == nullptr) throw ContractError("oracle: no environment bound");
  }

  double predict(UserId u, ItemId i) const override {
    if (env_ == nullptr) throw ContractError("oracle: no environment bound");
    return env_->true_rating(u, i);
  }

 private:
  const Environment* env_ = nullptr;
};

}  // namespace reclab
