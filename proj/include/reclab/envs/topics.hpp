#pragma once

#include <algorithm>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "reclab/environment.hpp"

namespace reclab {

/// Ground truth of the topic environments. Every item belongs to one topic
/// and every user holds a preference per topic.
struct TopicsState {
  static constexpr double kPrefLo = 0.5;
  static constexpr double kPrefHi = 5.5;

  std::size_t n_topics = 0;
  std::vector<std::size_t> topic_of_item;
  std::vector<double> preferences;  // n_users x n_topics, row-major
  double noise_std = 0.5;

  // Dynamics; all zero for the static variant.
  double affinity = 0.0;
  std::size_t memory = 0;
  std::size_t threshold = 1;
  double penalty = 0.0;
  std::vector<std::deque<std::size_t>> recent_topics;  // last `memory` consumed topics per user

  RatingRange range{1.0, 5.0};

  double& pref(UserId u, std::size_t k) { return preferences[u * n_topics + k]; }
  double pref(UserId u, std::size_t k) const { return preferences[u * n_topics + k]; }

  bool bored(UserId u, std::size_t k) const {
    const auto& mem = recent_topics[u];
    return static_cast<std::size_t>(std::count(mem.begin(), mem.end(), k)) >= threshold;
  }
};

/// Noiseless part of a topic rating: preference minus the boredom penalty.
inline double topics_expected(const TopicsState& s, UserId u, ItemId i) {
  const std::size_t k = s.topic_of_item[i];
  return s.pref(u, k) - (s.bored(u, k) ? s.penalty : 0.0);
}

inline double topics_rate(const TopicsState& s, UserId u, ItemId i, double noise) {
  return clip(topics_expected(s, u, i) + noise, s.range);
}

/// Records consumption of item `i` by `u`: appends its topic to the user's
/// memory, then shifts preference mass toward that topic.
inline void topics_update(TopicsState& s, UserId u, ItemId i) {
  const std::size_t k = s.topic_of_item[i];
  if (s.memory > 0) {
    auto& mem = s.recent_topics[u];
    mem.push_back(k);
    while (mem.size() > s.memory) mem.pop_front();
  }
  if (s.affinity == 0.0) return;
  const double others = s.n_topics > 1 ? s.affinity / static_cast<double>(s.n_topics - 1) : 0.0;
  for (std::size_t t = 0; t < s.n_topics; ++t) {
    const double delta = (t == k) ? s.affinity : -others;
    s.pref(u, t) = clip(s.pref(u, t) + delta, TopicsState::kPrefLo, TopicsState::kPrefHi);
  }
}

struct TopicsConfig {
  std::size_t n_users = 1000;
  std::size_t n_items = 1700;
  std::size_t n_topics = 19;
  double noise_std = 0.5;
  double affinity = 0.0;
  std::size_t memory = 0;
  std::size_t threshold = 1;
  double penalty = 0.0;
};

/// topics-static and topics-dynamic; the static one is the dynamic one with
/// affinity and boredom switched off.
class TopicsEnvironment final : public Environment {
 public:
  TopicsEnvironment(std::string name, TopicsConfig config) : name_(std::move(name)), cfg_(config) {
    if (cfg_.n_users == 0 || cfg_.n_items == 0 || cfg_.n_topics == 0) {
      throw ContractError(name_ + ": sizes must be positive");
    }
    if (cfg_.noise_std < 0 || cfg_.affinity < 0 || cfg_.penalty < 0) {
      throw ContractError(name_ + ": noise, affinity and penalty must be nonnegative");
    }
    if (cfg_.threshold < 1) throw ContractError(name_ + ": boredom threshold must be >= 1");
  }

  std::string name() const override { return name_; }
  std::size_t n_users() const override { return cfg_.n_users; }
  std::size_t n_items() const override { return cfg_.n_items; }
  RatingRange rating_range() const override { return state_.range; }

  std::unique_ptr<Environment> clone() const override { return std::make_unique<TopicsEnvironment>(*this); }

  void reset(const RngSeed& seed) override {
    Rng init = seed.derive("init").stream();
    noise_ = seed.derive("noise").stream();

    state_ = TopicsState{};
    state_.n_topics = cfg_.n_topics;
    state_.noise_std = cfg_.noise_std;
    state_.affinity = cfg_.affinity;
    state_.memory = cfg_.memory;
    state_.threshold = cfg_.threshold;
    state_.penalty = cfg_.penalty;
    state_.recent_topics.assign(cfg_.n_users, {});

    std::uniform_int_distribution<std::size_t> topic(0, cfg_.n_topics - 1);
    state_.topic_of_item.resize(cfg_.n_items);
    for (auto& k : state_.topic_of_item) k = topic(init);

    std::uniform_real_distribution<double> pref(TopicsState::kPrefLo, TopicsState::kPrefHi);
    state_.preferences.resize(cfg_.n_users * cfg_.n_topics);
    for (auto& p : state_.preferences) p = pref(init);
  }

  double true_rating(UserId u, ItemId i) const override {
    return clip(topics_expected(state_, u, i), state_.range);
  }

  std::vector<Observation> online_step(std::span<const Slate> slates, int timestep) override {
    std::vector<Observation> out;
    out.reserve(slates.size());
    for (const auto& slate : slates) {
      if (slate.items.empty()) throw ContractError(name_ + ": empty slate");
      const ItemId i = slate.items.front();
      const double r = topics_rate(state_, slate.user, i, draw_noise());
      topics_update(state_, slate.user, i);
      out.push_back({slate.user, i, r, timestep});
    }
    return out;
  }

  const TopicsState& state() const { return state_; }
  TopicsState& mutable_state() { return state_; }

 protected:
  double rate_offline(UserId u, ItemId i) override {
    return topics_rate(state_, u, i, draw_noise());
  }

 private:
  double draw_noise() {
    return std::normal_distribution<double>(0.0, 1.0)(noise_) * state_.noise_std;
  }

  std::string name_;
  TopicsConfig cfg_;
  TopicsState state_;
  Rng noise_;
};

}  // namespace reclab
