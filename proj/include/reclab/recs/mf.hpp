#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "reclab/recommender.hpp"

namespace reclab {

struct MfParams {
  std::size_t dim = 16;
  double learning_rate = 0.01;
  double regularization = 0.02;
  std::size_t epochs = 50;
  double init_std = 0.1;
};

/// Biased matrix factorization: mu + c_u + b_i + p_u . q_i.
struct MfParameters {
  std::size_t dim = 0;
  double global_mean = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;  // n_users x dim
  std::vector<double> item_factors;  // n_items x dim

  double raw(UserId u, ItemId i) const {
    double s = global_mean + user_bias[u] + item_bias[i];
    const double* p = user_factors.data() + u * dim;
    const double* q = item_factors.data() + i * dim;
    for (std::size_t f = 0; f < dim; ++f) s += p[f] * q[f];
    return s;
  }
};

/// Training objective: sum over observations of the squared residual plus
/// omega times the squared norms of the parameters touching that observation.
inline double mf_objective(const MfParameters& m, const ObservationSet& obs, double omega) {
  double total = 0.0;
  for (const auto& o : obs) {
    const double e = o.rating - m.raw(o.user, o.item);
    double reg = m.user_bias[o.user] * m.user_bias[o.user] + m.item_bias[o.item] * m.item_bias[o.item];
    for (std::size_t f = 0; f < m.dim; ++f) {
      const double p = m.user_factors[o.user * m.dim + f];
      const double q = m.item_factors[o.item * m.dim + f];
      reg += p * p + q * q;
    }
    total += e * e + omega * reg;
  }
  return total;
}

/// Analytic gradient of mf_objective, laid out like the parameter vectors.
inline MfParameters mf_gradient(const MfParameters& m, const ObservationSet& obs, double omega) {
  MfParameters g = m;
  g.global_mean = 0.0;
  std::fill(g.user_bias.begin(), g.user_bias.end(), 0.0);
  std::fill(g.item_bias.begin(), g.item_bias.end(), 0.0);
  std::fill(g.user_factors.begin(), g.user_factors.end(), 0.0);
  std::fill(g.item_factors.begin(), g.item_factors.end(), 0.0);
  for (const auto& o : obs) {
    const double e = o.rating - m.raw(o.user, o.item);
    g.user_bias[o.user] += -2.0 * e + 2.0 * omega * m.user_bias[o.user];
    g.item_bias[o.item] += -2.0 * e + 2.0 * omega * m.item_bias[o.item];
    for (std::size_t f = 0; f < m.dim; ++f) {
      const double p = m.user_factors[o.user * m.dim + f];
      const double q = m.item_factors[o.item * m.dim + f];
      g.user_factors[o.user * m.dim + f] += -2.0 * e * q + 2.0 * omega * p;
      g.item_factors[o.item * m.dim + f] += -2.0 * e * p + 2.0 * omega * q;
    }
  }
  return g;
}

/// One stochastic step on a single observation; equivalent to moving against
/// half the gradient of that observation's term, scaled by eta.
inline void mf_sgd_step(MfParameters& m, const Observation& o, double eta, double omega) {
  const double e = o.rating - m.raw(o.user, o.item);
  double& c = m.user_bias[o.user];
  double& b = m.item_bias[o.item];
  c += eta * (e - omega * c);
  b += eta * (e - omega * b);
  double* p = m.user_factors.data() + o.user * m.dim;
  double* q = m.item_factors.data() + o.item * m.dim;
  for (std::size_t f = 0; f < m.dim; ++f) {
    const double pf = p[f];
    const double qf = q[f];
    p[f] += eta * (e * qf - omega * pf);
    q[f] += eta * (e * pf - omega * qf);
  }
}

inline double training_rmse(const MfParameters& m, const ObservationSet& obs) {
  double s = 0.0;
  for (const auto& o : obs) {
    const double e = o.rating - m.raw(o.user, o.item);
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(obs.size()));
}

/// Trains from scratch: zero biases, N(0, init_std^2) factors, global mean
/// fixed to the training mean, shuffled per-observation SGD for each epoch.
/// `on_epoch` (if set) sees the parameters after every epoch.
template <typename EpochHook>
MfParameters mf_train(const ObservationSet& obs, const MfParams& params, Rng& rng, EpochHook&& on_epoch) {
  if (obs.empty()) throw ContractError("sgd-mf: cannot fit on an empty dataset");
  MfParameters m;
  m.dim = params.dim;
  m.global_mean = obs.mean_rating();
  m.user_bias.assign(obs.n_users(), 0.0);
  m.item_bias.assign(obs.n_items(), 0.0);
  m.user_factors.resize(obs.n_users() * params.dim);
  m.item_factors.resize(obs.n_items() * params.dim);
  std::normal_distribution<double> z(0.0, 1.0);
  for (auto& p : m.user_factors) p = params.init_std * z(rng);
  for (auto& q : m.item_factors) q = params.init_std * z(rng);

  std::vector<std::size_t> order(obs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k : order) mf_sgd_step(m, obs[k], params.learning_rate, params.regularization);
    const double loss = training_rmse(m, obs);
    if (!std::isfinite(loss)) {
      throw std::runtime_error("sgd-mf: training diverged at epoch " + std::to_string(epoch + 1) +
                               " (learning rate " + std::to_string(params.learning_rate) + ")");
    }
    on_epoch(m, epoch);
  }
  return m;
}

inline MfParameters mf_train(const ObservationSet& obs, const MfParams& params, Rng& rng) {
  return mf_train(obs, params, rng, [](const MfParameters&, std::size_t) {});
}

class MfModel final : public Recommender {
 public:
  explicit MfModel(MfParams params, RatingRange range = {}) : params_(params), range_(range) {}

  std::string name() const override { return "sgd-mf"; }

  void fit(const ObservationSet& obs, Rng& rng) override {
    model_ = mf_train(obs, params_, rng);
    seen_users_.assign(obs.n_users(), 0);
    seen_items_.assign(obs.n_items(), 0);
    for (const auto& o : obs) {
      seen_users_[o.user] = 1;
      seen_items_[o.item] = 1;
    }
    // Parameters of entities without data stay at their initial values during
    // training; cold-start rule is zero bias and zero factors.
    for (UserId u = 0; u < obs.n_users(); ++u) {
      if (seen_users_[u]) continue;
      model_.user_bias[u] = 0.0;
      std::fill_n(model_.user_factors.begin() + static_cast<std::ptrdiff_t>(u * model_.dim), model_.dim, 0.0);
    }
    for (ItemId i = 0; i < obs.n_items(); ++i) {
      if (seen_items_[i]) continue;
      model_.item_bias[i] = 0.0;
      std::fill_n(model_.item_factors.begin() + static_cast<std::ptrdiff_t>(i * model_.dim), model_.dim, 0.0);
    }
  }

  double predict(UserId u, ItemId i) const override { return clip(model_.raw(u, i), range_); }

  const MfParameters& parameters() const { return model_; }
  MfParameters& mutable_parameters() { return model_; }
  const MfParams& params() const { return params_; }

 private:
  MfParams params_;
  RatingRange range_;
  MfParameters model_;
  std::vector<std::uint8_t> seen_users_;
  std::vector<std::uint8_t> seen_items_;
};

}  // namespace reclab
