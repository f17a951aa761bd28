#pragma once

#include <memory>
#include <string>
#include <vector>

#include "reclab/envs/beta_rank.hpp"
#include "reclab/envs/latent.hpp"
#include "reclab/envs/latent_score.hpp"
#include "reclab/envs/ml100k.hpp"
#include "reclab/envs/topics.hpp"
#include "reclab/recs/registry.hpp"

namespace reclab {

inline const std::vector<std::string>& base_environment_names() {
  static const std::vector<std::string> names = {"topics-static", "topics-dynamic", "latent-static",
                                                 "ml-100k",       "latent-score",   "beta-rank"};
  return names;
}

/// Base names plus the low-data variants, which share the base environment
/// and differ only in their schedule.
inline const std::vector<std::string>& environment_names() {
  static const std::vector<std::string> names = [] {
    auto n = base_environment_names();
    n.push_back("topics-static-lowdata");
    n.push_back("latent-static-lowdata");
    return n;
  }();
  return names;
}

inline bool is_lowdata_environment(const std::string& name) {
  return name.size() > 8 && name.ends_with("-lowdata");
}

inline std::string base_environment(const std::string& name) {
  return is_lowdata_environment(name) ? name.substr(0, name.size() - 8) : name;
}

inline void require_environment(const std::string& name) {
  const auto& n = environment_names();
  if (std::find(n.begin(), n.end(), name) == n.end()) {
    throw ContractError("unknown environment '" + name + "' (valid: " + join_names(n) + ")");
  }
}

inline ParamSchema environment_schema(const std::string& name) {
  require_environment(name);
  using I = std::int64_t;
  const std::string base = base_environment(name);
  if (base == "topics-static" || base == "topics-dynamic") {
    ParamSchema s = {{"n_users", ParamKind::integer, I{1000}, {}},
                     {"n_items", ParamKind::integer, I{1700}, {}},
                     {"topics", ParamKind::integer, I{19}, {}},
                     {"noise_std", ParamKind::real, 0.5, {}}};
    if (base == "topics-dynamic") {
      s.push_back({"affinity", ParamKind::real, 0.025, {}});
      s.push_back({"memory", ParamKind::integer, I{5}, {}});
      s.push_back({"threshold", ParamKind::integer, I{3}, {}});
      s.push_back({"penalty", ParamKind::real, 1.0, {}});
    }
    return s;
  }
  if (base == "latent-static") {
    return {{"n_users", ParamKind::integer, I{1000}, {}},   {"n_items", ParamKind::integer, I{1700}, {}},
            {"dim", ParamKind::integer, I{8}, {}},          {"noise_std", ParamKind::real, 0.5, {}},
            {"global_bias", ParamKind::real, 3.0, {}},      {"bias_std", ParamKind::real, 0.25, {}},
            {"factor_std", ParamKind::real, -1.0, {}}};
  }
  if (base == "ml-100k") {
    return {{"data_path", ParamKind::categorical, std::string("data/ml-100k/u.data"), {}},
            {"dim", ParamKind::integer, I{8}, {}},
            {"noise_std", ParamKind::real, 0.5, {}},
            {"cv_tune", ParamKind::integer, I{1}, {}},
            {"learning_rate", ParamKind::real, 0.01, {}},
            {"regularization", ParamKind::real, 0.1, {}},
            {"epochs", ParamKind::integer, I{50}, {}}};
  }
  if (base == "latent-score") {
    return {{"n_users", ParamKind::integer, I{170}, {}},  {"n_items", ParamKind::integer, I{100}, {}},
            {"dim", ParamKind::integer, I{8}, {}},        {"noise_std", ParamKind::real, 0.5, {}},
            {"slate_size", ParamKind::integer, I{10}, {}}, {"known_fraction", ParamKind::real, 0.5, {}}};
  }
  return {{"n_users", ParamKind::integer, I{170}, {}},      {"n_items", ParamKind::integer, I{100}, {}},
          {"dim", ParamKind::integer, I{10}, {}},           {"concentration", ParamKind::real, 0.7, {}},
          {"variance", ParamKind::real, 1e-5, {}},          {"known_variance", ParamKind::real, 1e-5, {}},
          {"slate_size", ParamKind::integer, I{10}, {}}};
}

/// Rating scale of an environment, known without building it.
inline RatingRange environment_rating_range(const std::string& name) {
  require_environment(name);
  return base_environment(name) == "beta-rank" ? RatingRange{0.0, 1.0} : RatingRange{1.0, 5.0};
}

/// Slate length the environment requires under resolved parameters `p`.
inline std::size_t environment_slate_size(const std::string& name, const ParamMap& p) {
  const std::string base = base_environment(name);
  if (base != "latent-score" && base != "beta-rank") return 1;
  const auto v = as_integer(p.at("slate_size"));
  if (v < 1) throw ContractError(name + ": slate_size must be positive");
  return static_cast<std::size_t>(v);
}

namespace detail {
inline std::size_t positive_size(const ParamMap& p, const std::string& key, const std::string& owner) {
  const auto v = as_integer(p.at(key));
  if (v < 1) throw ContractError(owner + ": " + key + " must be positive");
  return static_cast<std::size_t>(v);
}
inline std::size_t nonnegative_size(const ParamMap& p, const std::string& key, const std::string& owner) {
  const auto v = as_integer(p.at(key));
  if (v < 0) throw ContractError(owner + ": " + key + " must be nonnegative");
  return static_cast<std::size_t>(v);
}
}  // namespace detail

/// Builds an environment. The ML-100K environment fits its ground truth here
/// (deterministically from `build_seed`); all others draw state in reset().
inline std::unique_ptr<Environment> make_environment(const std::string& name, const ParamMap& given,
                                                     const RngSeed& build_seed = {}) {
  const ParamMap p = resolve_params(environment_schema(name), given, name);
  const std::string base = base_environment(name);
  using detail::nonnegative_size;
  using detail::positive_size;

  if (base == "topics-static" || base == "topics-dynamic") {
    TopicsConfig c;
    c.n_users = positive_size(p, "n_users", name);
    c.n_items = positive_size(p, "n_items", name);
    c.n_topics = positive_size(p, "topics", name);
    c.noise_std = as_real(p.at("noise_std"));
    if (base == "topics-dynamic") {
      c.affinity = as_real(p.at("affinity"));
      c.memory = nonnegative_size(p, "memory", name);
      c.threshold = positive_size(p, "threshold", name);
      c.penalty = as_real(p.at("penalty"));
    }
    return std::make_unique<TopicsEnvironment>(name, c);
  }
  if (base == "latent-static") {
    LatentConfig c;
    c.n_users = positive_size(p, "n_users", name);
    c.n_items = positive_size(p, "n_items", name);
    c.dim = nonnegative_size(p, "dim", name);
    c.noise_std = as_real(p.at("noise_std"));
    c.global_bias = as_real(p.at("global_bias"));
    c.bias_std = as_real(p.at("bias_std"));
    c.factor_std = as_real(p.at("factor_std"));
    return std::make_unique<LatentEnvironment>(name, c);
  }
  if (base == "ml-100k") {
    const auto data = load_ml100k(as_string(p.at("data_path")));
    const std::size_t dim = nonnegative_size(p, "dim", name);
    const double noise = as_real(p.at("noise_std"));
    LatentState state;
    if (as_integer(p.at("cv_tune")) != 0) {
      GridAxes grid = {{"learning_rate", {0.005, 0.01}}, {"regularization", {0.02, 0.1}},
                       {"epochs", {std::int64_t{50}}}};
      state = init_latent_from_dataset_tuned(data.observations, dim, grid, noise, build_seed.derive("ml-100k"));
    } else {
      MfParams fit;
      fit.learning_rate = as_real(p.at("learning_rate"));
      fit.regularization = as_real(p.at("regularization"));
      fit.epochs = nonnegative_size(p, "epochs", name);
      Rng rng = build_seed.derive("ml-100k").derive("fit").stream();
      state = init_latent_from_dataset(data.observations, dim, fit, noise, rng);
    }
    return std::make_unique<LatentEnvironment>(name, std::move(state));
  }
  if (base == "latent-score") {
    LatentScoreConfig c;
    c.latent.n_users = positive_size(p, "n_users", name);
    c.latent.n_items = positive_size(p, "n_items", name);
    c.latent.dim = nonnegative_size(p, "dim", name);
    c.latent.noise_std = as_real(p.at("noise_std"));
    c.slate_size = positive_size(p, "slate_size", name);
    c.known_fraction = as_real(p.at("known_fraction"));
    return std::make_unique<LatentScoreEnvironment>(c);
  }
  BetaRankConfig c;
  c.n_users = positive_size(p, "n_users", name);
  c.n_items = positive_size(p, "n_items", name);
  c.dim = positive_size(p, "dim", name);
  c.concentration = as_real(p.at("concentration"));
  c.variance = as_real(p.at("variance"));
  c.known_variance = as_real(p.at("known_variance"));
  c.slate_size = positive_size(p, "slate_size", name);
  return std::make_unique<BetaRankEnvironment>(c);
}

}  // namespace reclab
