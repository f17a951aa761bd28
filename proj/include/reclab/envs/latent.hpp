#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "reclab/environment.hpp"

namespace reclab {

/// Biased latent-factor ground truth shared by latent-static, ML-100K and
/// latent-score.
struct LatentState {
  std::size_t dim = 0;
  double global_bias = 3.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;  // n_users x dim
  std::vector<double> item_factors;  // n_items x dim
  double noise_std = 0.5;
  RatingRange range{1.0, 5.0};

  std::size_t n_users() const { return user_bias.size(); }
  std::size_t n_items() const { return item_bias.size(); }

  double dot(UserId u, ItemId i) const {
    double s = 0.0;
    const double* p = user_factors.data() + u * dim;
    const double* q = item_factors.data() + i * dim;
    for (std::size_t f = 0; f < dim; ++f) s += p[f] * q[f];
    return s;
  }

  double unclipped(UserId u, ItemId i) const {
    return global_bias + user_bias[u] + item_bias[i] + dot(u, i);
  }
};

inline double latent_rate(const LatentState& s, UserId u, ItemId i, double noise) {
  return clip(s.unclipped(u, i) + noise, s.range);
}

struct LatentConfig {
  std::size_t n_users = 1000;
  std::size_t n_items = 1700;
  std::size_t dim = 8;
  double noise_std = 0.5;
  double global_bias = 3.0;
  double bias_std = 0.25;
  double factor_std = -1.0;  // negative: sqrt(0.5 / dim)
};

inline LatentState draw_latent_state(const LatentConfig& cfg, Rng& rng) {
  LatentState s;
  s.dim = cfg.dim;
  s.global_bias = cfg.global_bias;
  s.noise_std = cfg.noise_std;
  const double factor_std =
      cfg.factor_std >= 0 ? cfg.factor_std
                          : (cfg.dim > 0 ? std::sqrt(0.5 / static_cast<double>(cfg.dim)) : 0.0);
  std::normal_distribution<double> z(0.0, 1.0);
  s.user_bias.resize(cfg.n_users);
  s.item_bias.resize(cfg.n_items);
  for (auto& c : s.user_bias) c = cfg.bias_std * z(rng);
  for (auto& b : s.item_bias) b = cfg.bias_std * z(rng);
  s.user_factors.resize(cfg.n_users * cfg.dim);
  s.item_factors.resize(cfg.n_items * cfg.dim);
  for (auto& p : s.user_factors) p = factor_std * z(rng);
  for (auto& q : s.item_factors) q = factor_std * z(rng);
  return s;
}

/// Users consume the recommended item and rate it with the latent model.
/// latent-static draws its state at reset; ML-100K is handed a fitted state.
class LatentEnvironment final : public Environment {
 public:
  LatentEnvironment(std::string name, LatentConfig config)
      : name_(std::move(name)), cfg_(config) {
    if (cfg_.n_users == 0 || cfg_.n_items == 0) throw ContractError(name_ + ": empty sizes");
    if (cfg_.noise_std < 0) throw ContractError(name_ + ": noise must be nonnegative");
  }

  /// Fixed ground truth; reset() only restarts the noise stream.
  LatentEnvironment(std::string name, LatentState fixed)
      : name_(std::move(name)), state_(std::move(fixed)), fixed_(true) {
    cfg_.n_users = state_.n_users();
    cfg_.n_items = state_.n_items();
    cfg_.dim = state_.dim;
    cfg_.noise_std = state_.noise_std;
  }

  std::string name() const override { return name_; }
  std::size_t n_users() const override { return cfg_.n_users; }
  std::size_t n_items() const override { return cfg_.n_items; }
  RatingRange rating_range() const override { return state_.range; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<LatentEnvironment>(*this); }

  void reset(const RngSeed& seed) override {
    noise_ = seed.derive("noise").stream();
    if (fixed_) return;
    Rng init = seed.derive("init").stream();
    state_ = draw_latent_state(cfg_, init);
  }

  double true_rating(UserId u, ItemId i) const override { return latent_rate(state_, u, i, 0.0); }

  std::vector<Observation> online_step(std::span<const Slate> slates, int timestep) override {
    std::vector<Observation> out;
    out.reserve(slates.size());
    for (const auto& slate : slates) {
      if (slate.items.empty()) throw ContractError(name_ + ": empty slate");
      const ItemId i = slate.items.front();
      out.push_back({slate.user, i, rate_offline(slate.user, i), timestep});
    }
    return out;
  }

  const LatentState& state() const { return state_; }

 protected:
  double rate_offline(UserId u, ItemId i) override {
    return latent_rate(state_, u, i, std::normal_distribution<double>(0.0, 1.0)(noise_) * state_.noise_std);
  }

 private:
  std::string name_;
  LatentConfig cfg_;
  LatentState state_;
  bool fixed_ = false;
  Rng noise_;
};

}  // namespace reclab
