#pragma once

#include <algorithm>
#include <iterator>
#include <memory>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "reclab/core.hpp"
#include "reclab/params.hpp"

namespace reclab {

/// A ranked list of items shown to one user, with the recommender's score for
/// each entry (choice environments look at the scores).
struct Slate {
  UserId user = 0;
  std::vector<ItemId> items;
  std::vector<double> scores;
};

/// The simulated world. Implementations own their latent ground truth and the
/// noise stream used to realize ratings; the stream is re-derived by reset().
/// `n` distinct values of [0, total) in ascending order, each subset equally
/// likely (Knuth's selection sampling).
inline std::vector<std::size_t> sample_indices(std::size_t total, std::size_t n, Rng& stream) {
  if (n > total) throw ContractError("sample_indices: n exceeds total");
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t x = 0; x < total && out.size() < n; ++x) {
    const std::size_t need = n - out.size();
    if (uniform_index(stream, total - x) < need) out.push_back(x);
  }
  return out;
}

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual std::size_t n_users() const = 0;
  virtual std::size_t n_items() const = 0;
  virtual RatingRange rating_range() const = 0;

  /// 1 for environments where users consume the single recommended item.
  virtual std::size_t slate_size() const { return 1; }

  /// Re-draws all latent state from `seed` and restarts the noise stream.
  virtual void reset(const RngSeed& seed) = 0;

  /// Independent copy, including latent state and stream position.
  virtual std::unique_ptr<Environment> clone() const = 0;

  /// Noiseless expected rating under the current (possibly dynamic) state.
  virtual double true_rating(UserId u, ItemId i) const = 0;

  /// One realized rating per slate, in slate order. Dynamics advance here.
  virtual std::vector<Observation> online_step(std::span<const Slate> slates, int timestep) = 0;

  /// Dense snapshot of true_rating(); simulation-only.
  RatingTable true_rating_snapshot() const {
    RatingTable out(n_users(), n_items());
    for (UserId u = 0; u < n_users(); ++u) {
      for (ItemId i = 0; i < n_items(); ++i) out(u, i) = true_rating(u, i);
    }
    return out;
  }

  /// `n` distinct pairs drawn uniformly without replacement, rated with the
  /// dynamics frozen and stamped timestep 0.
  ObservationSet sample_initial(std::size_t n, Rng& stream) {
    const std::size_t total = n_users() * n_items();
    if (n > total) {
      throw ContractError("sample_initial: requested " + std::to_string(n) + " pairs but only " +
                          std::to_string(total) + " exist");
    }
    const auto picked = sample_indices(total, n, stream);
    ObservationSet out(n_users(), n_items());
    for (std::size_t flat : picked) {
      const UserId u = flat / n_items();
      const ItemId i = flat % n_items();
      out.insert({u, i, rate_offline(u, i), 0});
    }
    return out;
  }

  /// Distinct users for one timestep, uniformly at random.
  std::vector<UserId> sample_online_users(std::size_t count, Rng& stream) const {
    if (count < 1) throw ContractError("sample_online_users: count must be at least 1");
    if (count > n_users()) {
      throw ContractError("sample_online_users: count " + std::to_string(count) + " exceeds " +
                          std::to_string(n_users()) + " users");
    }
    auto users = sample_indices(n_users(), count, stream);
    std::ranges::shuffle(users, stream);
    return users;
  }

 protected:
  /// Noisy rating with dynamics frozen, drawn from the environment's stream.
  virtual double rate_offline(UserId u, ItemId i) = 0;
};

/// Description of a registered environment: its parameters and defaults.
struct EnvironmentInfo {
  std::string name;
  ParamSchema schema;
};

}  // namespace reclab
