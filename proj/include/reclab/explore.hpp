#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "reclab/core.hpp"

namespace reclab {

/// Turns point predictions into (possibly random) selections.
///
/// Candidate arrays are expected in ascending ItemId order, so "lower index"
/// and "lower ItemId" coincide for tie-breaking.
struct ExplorationPolicy {
  enum class Kind { greedy, epsilon_greedy, power_sampling };

  Kind kind = Kind::greedy;
  double epsilon = 0.0;
  double power = 1.0;
  double score_floor = 0.01;

  static ExplorationPolicy greedy() { return {}; }
  static ExplorationPolicy epsilon_greedy(double eps) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
    return {Kind::epsilon_greedy, eps, 1.0, 0.01};
  }
  static ExplorationPolicy power_sampling(double p, double floor = 0.01) {
    if (!(p > 0.0)) throw ContractError("power must be positive");
    if (!(floor > 0.0)) throw ContractError("score floor must be positive");
    return {Kind::power_sampling, 0.0, p, floor};
  }

  /// "greedy", "eps:<epsilon>" or "ts:<power>".
  static ExplorationPolicy parse(const std::string& text) {
    if (text == "greedy") return greedy();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const std::string head = text.substr(0, colon);
      const std::string tail = text.substr(colon + 1);
      double value = 0.0;
      std::size_t used = 0;
      try {
        value = std::stod(tail, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == tail.size() && used > 0) {
        if (head == "eps") return epsilon_greedy(value);
        if (head == "ts") return power_sampling(value);
      }
    }
    throw ContractError("unknown policy '" + text + "' (valid: greedy, eps:<epsilon>, ts:<power>)");
  }

  std::string to_string() const {
    auto fmt = [](double v) {
      std::string s = std::to_string(v);
      s.erase(s.find_last_not_of('0') + 1);
      if (s.back() == '.') s.pop_back();
      return s;
    };
    switch (kind) {
      case Kind::greedy: return "greedy";
      case Kind::epsilon_greedy: return "eps:" + fmt(epsilon);
      case Kind::power_sampling: return "ts:" + fmt(power);
    }
    return "greedy";
  }
};

inline std::size_t argmax_lowest(std::span<const double> scores) {
  if (scores.empty()) throw ContractError("argmax of an empty candidate set");
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

/// Argmax gets 1 - eps + eps/n, every other candidate eps/n.
inline std::vector<double> epsilon_greedy_probabilities(std::span<const double> scores, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
  const std::size_t best = argmax_lowest(scores);
  std::vector<double> p(scores.size(), eps / static_cast<double>(scores.size()));
  p[best] += 1.0 - eps;
  return p;
}

inline std::vector<double> power_probabilities(std::span<const double> scores, double power, double floor) {
  if (scores.empty()) throw ContractError("power sampling over an empty candidate set");
  if (!(power > 0.0)) throw ContractError("power must be positive");
  double top = floor;
  for (double s : scores) top = std::max(top, s);
  // Dividing by the largest floored score keeps x^p in range for large p.
  std::vector<double> w(scores.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::pow(std::max(scores[k], floor) / top, power);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

inline std::size_t epsilon_greedy_select(std::span<const double> scores, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw ContractError("epsilon must lie in [0, 1]");
  if (scores.empty()) throw ContractError("epsilon-greedy over an empty candidate set");
  if (uniform01(rng) < eps) return uniform_index(rng, scores.size());
  return argmax_lowest(scores);
}

inline std::size_t power_sample_select(std::span<const double> scores, double power, double floor, Rng& rng) {
  const auto p = power_probabilities(scores, power, floor);
  std::discrete_distribution<std::size_t> pick(p.begin(), p.end());
  return pick(rng);
}

/// Indices into `scores` forming a ranked slate. Greedy takes the top
/// entries; random policies apply their single-item rule repeatedly without
/// replacement.
inline std::vector<std::size_t> select_slate(const ExplorationPolicy& policy, std::span<const double> scores,
                                             std::size_t slate_size, Rng& rng) {
  if (slate_size < 1) throw ContractError("slate size must be at least 1");
  const std::size_t take = std::min(slate_size, scores.size());
  std::vector<std::size_t> remaining(scores.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});

  if (policy.kind == ExplorationPolicy::Kind::greedy) {
    std::partial_sort(remaining.begin(), remaining.begin() + static_cast<std::ptrdiff_t>(take), remaining.end(),
                      [&](std::size_t a, std::size_t b) {
                        return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                      });
    remaining.resize(take);
    return remaining;
  }

  std::vector<std::size_t> slate;
  slate.reserve(take);
  std::vector<double> sub;
  while (slate.size() < take) {
    sub.resize(remaining.size());
    for (std::size_t k = 0; k < remaining.size(); ++k) sub[k] = scores[remaining[k]];
    const std::size_t pick = policy.kind == ExplorationPolicy::Kind::epsilon_greedy
                                 ? epsilon_greedy_select(sub, policy.epsilon, rng)
                                 : power_sample_select(sub, policy.power, policy.score_floor, rng);
    slate.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return slate;
}

}  // namespace reclab
