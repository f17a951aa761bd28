#pragma once

#include <string>

#include "reclab/dataio/ml100k.hpp"
#include "reclab/envs/latent.hpp"
#include "reclab/recs/mf.hpp"
#include "reclab/tuning.hpp"

namespace reclab {

/// Copies a fitted factorization into an environment ground truth.
inline LatentState latent_from_factorization(const MfParameters& m, double noise_std) {
  LatentState s;
  s.dim = m.dim;
  s.global_bias = m.global_mean;
  s.user_bias = m.user_bias;
  s.item_bias = m.item_bias;
  s.user_factors = m.user_factors;
  s.item_factors = m.item_factors;
  s.noise_std = noise_std;
  return s;
}

/// Fits biased MF (dimension `dim`) to the dataset and returns its parameters
/// as a latent ground truth.
inline LatentState init_latent_from_dataset(const ObservationSet& obs, std::size_t dim, MfParams fit_params,
                                            double noise_std, Rng& rng) {
  if (obs.empty()) throw ContractError("init_latent_from_dataset: empty dataset");
  fit_params.dim = dim;
  return latent_from_factorization(mf_train(obs, fit_params, rng), noise_std);
}

/// As above, with learning rate, regularization and epochs chosen by k-fold
/// cross-validated RMSE over `grid` first.
inline LatentState init_latent_from_dataset_tuned(const ObservationSet& obs, std::size_t dim, GridAxes grid,
                                                  double noise_std, const RngSeed& seed, std::size_t folds = 5) {
  if (obs.empty()) throw ContractError("init_latent_from_dataset: empty dataset");
  grid["dim"] = {static_cast<std::int64_t>(dim)};
  const RecommenderFactory factory = [](const ParamMap& p) { return make_recommender("sgd-mf", p, {}); };
  const auto result = grid_search(factory, grid, obs, folds, Objective::rmse, seed.derive("cv"));
  const ParamMap best = resolve_recommender_params("sgd-mf", result.best, {});
  MfParams params;
  params.learning_rate = as_real(best.at("learning_rate"));
  params.regularization = as_real(best.at("regularization"));
  params.epochs = static_cast<std::size_t>(as_integer(best.at("epochs")));
  params.init_std = as_real(best.at("init_std"));
  Rng rng = seed.derive("fit").stream();
  return init_latent_from_dataset(obs, dim, params, noise_std, rng);
}

}  // namespace reclab
