#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "reclab/envs/registry.hpp"
#include "reclab/explore.hpp"
#include "reclab/metrics.hpp"
#include "reclab/recs/registry.hpp"
#include "reclab/tuning.hpp"

namespace reclab {

struct Schedule {
  std::size_t n_initial = 100000;
  std::size_t users_per_step = 200;
  std::size_t slate_size = 0;  // 0: whatever the environment requires
  std::size_t target_total_ratings = 200000;
  std::size_t n_trials = 10;
  bool lowdata = false;
  std::size_t final_window = 1000;
  std::size_t folds = 5;
  std::size_t ndcg_k = 20;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  std::uint64_t seed = 0;
  std::string env = "topics-static";
  ParamMap env_params;
  std::string recommender = "toppop";
  ParamMap rec_params;
  GridAxes grid;  // tuning grid; empty means the recommender's default grid
  std::string policy = "greedy";
  Schedule schedule;
  bool record_population_rmse = false;
  bool record_gini = true;
  bool offline_metrics = true;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Raised when a trial cannot continue (for example a user runs out of items).
class TrialAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WindowMetrics {
  double mean_rating = 0.0;
  std::optional<double> rmse;
  std::size_t size = 0;
};

struct TrialResult {
  std::size_t trial = 0;
  std::vector<FoldMetrics> offline;
  std::vector<TimestepRecord> timeline;
  std::size_t n_initial = 0;
  std::size_t total_ratings = 0;
  std::optional<double> overall_mean_rating;  // absent when no online step ran
  std::optional<double> overall_rmse;
  WindowMetrics final_window;
  std::optional<double> final_population_rmse;
  ObservationSet observations;
};

/// Stream layout. Everything about the world (latent state, offline sample,
/// online users, rating noise) hangs off env/<trial>, so every recommender in
/// a study sees the same environment draw for a given trial.
struct TrialSeeds {
  RngSeed env;
  RngSeed recommender;
  RngSeed policy;

  static TrialSeeds make(const ExperimentConfig& c, std::size_t trial) {
    const RngSeed root{c.seed, {}};
    return {root.derive("env").derive(trial), root.derive("rec").derive(c.recommender).derive(trial),
            root.derive("policy").derive(c.policy).derive(trial)};
  }
};

inline std::size_t effective_slate_size(const ExperimentConfig& c, const Environment& env) {
  return c.schedule.slate_size == 0 ? env.slate_size() : c.schedule.slate_size;
}

inline void validate(const ExperimentConfig& c, const Environment& env) {
  const auto& s = c.schedule;
  if (s.n_initial > s.target_total_ratings) {
    throw ContractError("schedule: n_initial exceeds target_total_ratings");
  }
  if (s.users_per_step < 1 || s.users_per_step > env.n_users()) {
    throw ContractError("schedule: users_per_step must lie in [1, n_users]");
  }
  if (s.target_total_ratings > env.n_users() * env.n_items()) {
    throw ContractError("schedule: target exceeds the number of user-item pairs");
  }
  if (s.n_trials < 1) throw ContractError("schedule: n_trials must be at least 1");
  if (effective_slate_size(c, env) != env.slate_size()) {
    throw ContractError("schedule: slate size " + std::to_string(effective_slate_size(c, env)) + " does not match " +
                        env.name() + " (requires " + std::to_string(env.slate_size()) + ")");
  }
  if (s.folds < 2) throw ContractError("schedule: folds must be at least 2");
  (void)ExplorationPolicy::parse(c.policy);
  (void)resolve_recommender_params(c.recommender, c.rec_params, env.rating_range());
}

/// The initial dataset trial `trial` starts from, with the environment
/// state it was drawn from.
inline std::pair<std::unique_ptr<Environment>, ObservationSet> offline_dataset(const ExperimentConfig& c,
                                                                               const Environment& prototype,
                                                                               std::size_t trial = 0) {
  const TrialSeeds seeds = TrialSeeds::make(c, trial);
  auto env = prototype.clone();
  env->reset(seeds.env);
  Rng initial_rng = seeds.env.derive("initial").stream();
  ObservationSet initial = env->sample_initial(c.schedule.n_initial, initial_rng);
  return {std::move(env), std::move(initial)};
}

/// Grid search on trial 0's offline dataset. An empty `c.grid` means the
/// recommender's default grid.
inline GridResult tune(const ExperimentConfig& c, const Environment& prototype) {
  auto [env, initial] = offline_dataset(c, prototype, 0);
  const GridAxes axes = c.grid.empty() ? default_grid(c.recommender) : c.grid;
  const Environment* bound = env.get();
  const RecommenderFactory factory = [&](const ParamMap& p) {
    ParamMap merged = c.rec_params;
    for (const auto& [k, v] : p) merged[k] = v;
    auto m = make_recommender(c.recommender, merged, bound->rating_range());
    m->bind_environment(bound);
    return m;
  };
  return grid_search(factory, axes, initial, c.schedule.folds, default_objective(c.recommender),
                     RngSeed{c.seed, {}}.derive("tune"), c.schedule.ndcg_k);
}

/// Offline k-fold metrics of the configured recommender on `initial`.
inline std::vector<FoldMetrics> offline_evaluation(const ExperimentConfig& c, const Environment& env,
                                                   const ObservationSet& initial) {
  const RngSeed seed = RngSeed{c.seed, {}}.derive("offline");
  Rng fold_rng = seed.derive("folds").stream();
  const Folds folds = kfold_split(initial, c.schedule.folds, fold_rng);
  const RecommenderFactory factory = [&](const ParamMap& p) {
    auto m = make_recommender(c.recommender, p, env.rating_range());
    m->bind_environment(&env);
    return m;
  };
  return cross_validate(factory, c.rec_params, initial, folds, seed, c.schedule.ndcg_k);
}

/// One seeded run: offline sample, first fit, then the online loop of
/// recommend, observe, record and refit until the target rating count.
inline TrialResult run_trial(const ExperimentConfig& c, const Environment& prototype, std::size_t trial,
                             bool with_offline) {
  const TrialSeeds seeds = TrialSeeds::make(c, trial);
  auto env = prototype.clone();
  env->reset(seeds.env);
  validate(c, *env);
  const auto policy = ExplorationPolicy::parse(c.policy);
  const std::size_t slate_size = effective_slate_size(c, *env);

  TrialResult result;
  result.trial = trial;
  result.n_initial = c.schedule.n_initial;

  Rng initial_rng = seeds.env.derive("initial").stream();
  Rng users_rng = seeds.env.derive("users").stream();
  Rng rec_rng = seeds.recommender.stream();
  Rng policy_rng = seeds.policy.stream();

  ObservationSet omega = env->sample_initial(c.schedule.n_initial, initial_rng);
  if (with_offline && c.offline_metrics && !omega.empty()) result.offline = offline_evaluation(c, *env, omega);

  auto model = make_recommender(c.recommender, c.rec_params, env->rating_range());
  model->bind_environment(env.get());
  const bool rating_scale = model->rating_scale_scores();
  if (!omega.empty()) model->fit(omega, rec_rng);

  std::vector<std::size_t> raters(env->n_items(), 0);
  for (const auto& o : omega) ++raters[o.item];

  std::vector<double> online_ratings, online_predictions;
  std::vector<double> scores(env->n_items());
  std::vector<ItemId> candidates;
  std::vector<double> candidate_scores;
  int t = 0;
  while (omega.size() < c.schedule.target_total_ratings) {
    ++t;
    if (omega.empty()) throw TrialAborted("cannot run online steps without initial data to fit");
    const std::size_t count = std::min(c.schedule.users_per_step, c.schedule.target_total_ratings - omega.size());
    const auto users = env->sample_online_users(count, users_rng);

    std::vector<Slate> slates;
    slates.reserve(users.size());
    for (UserId u : users) {
      model->score_user(u, scores);
      candidates.clear();
      candidate_scores.clear();
      for (ItemId i = 0; i < env->n_items(); ++i) {
        if (!omega.contains(u, i)) {
          candidates.push_back(i);
          candidate_scores.push_back(scores[i]);
        }
      }
      if (candidates.empty()) {
        throw TrialAborted("trial " + std::to_string(trial) + ", timestep " + std::to_string(t) + ": user " +
                           std::to_string(u) + " has no unrated items left");
      }
      Slate slate{u, {}, {}};
      for (std::size_t k : select_slate(policy, candidate_scores, slate_size, policy_rng)) {
        slate.items.push_back(candidates[k]);
        slate.scores.push_back(candidate_scores[k]);
      }
      slates.push_back(std::move(slate));
    }

    TimestepRecord rec;
    rec.timestep = t;
    if (c.record_population_rmse && rating_scale) {
      rec.population_rmse = population_rmse(*model, env->true_rating_snapshot());
    }

    const auto gamma = env->online_step(slates, t);

    std::vector<double> ratings, predicted;
    std::vector<ItemId> items;
    for (std::size_t k = 0; k < gamma.size(); ++k) {
      const auto& o = gamma[k];
      const auto& slate = slates[k];
      const auto pos = std::find(slate.items.begin(), slate.items.end(), o.item) - slate.items.begin();
      ratings.push_back(o.rating);
      predicted.push_back(slate.scores[static_cast<std::size_t>(pos)]);
      items.push_back(o.item);
    }
    rec.mean_rating = mean_rating(ratings);
    if (rating_scale) rec.observed_rmse = rmse(predicted, ratings);
    rec.coverage = coverage(items);
    rec.novelty = novelty(items, raters, env->n_users());
    if (c.record_gini) {
      std::vector<double> counts(env->n_items(), 0.0);
      for (ItemId i : items) counts[i] += 1.0;
      rec.gini = gini(counts);
    }
    rec.n_new_ratings = gamma.size();

    for (const auto& o : gamma) {
      if (!omega.try_insert(o)) {
        throw TrialAborted("trial " + std::to_string(trial) + ": item " + std::to_string(o.item) +
                           " delivered twice to user " + std::to_string(o.user));
      }
      ++raters[o.item];
    }
    rec.n_ratings_total = omega.size();
    online_ratings.insert(online_ratings.end(), ratings.begin(), ratings.end());
    online_predictions.insert(online_predictions.end(), predicted.begin(), predicted.end());
    result.timeline.push_back(rec);

    if (omega.size() < c.schedule.target_total_ratings || c.record_population_rmse) model->fit(omega, rec_rng);
  }

  if (!online_ratings.empty()) {
    result.overall_mean_rating = mean_rating(online_ratings);
    if (rating_scale) result.overall_rmse = rmse(online_predictions, online_ratings);
    const std::size_t w = std::min(c.schedule.final_window, online_ratings.size());
    const std::size_t from = online_ratings.size() - w;
    if (w > 0) {
      const std::span<const double> r(online_ratings.data() + from, w);
      const std::span<const double> p(online_predictions.data() + from, w);
      result.final_window.size = w;
      result.final_window.mean_rating = mean_rating(r);
      if (rating_scale) result.final_window.rmse = rmse(p, r);
    }
  }
  if (c.record_population_rmse && rating_scale && !omega.empty()) {
    result.final_population_rmse = population_rmse(*model, env->true_rating_snapshot());
  }
  result.total_ratings = omega.size();
  result.observations = std::move(omega);
  return result;
}

inline TrialResult run_trial(const ExperimentConfig& c, std::size_t trial) {
  const auto env = make_environment(c.env, c.env_params, RngSeed{c.seed, {}});
  return run_trial(c, *env, trial, trial == 0);
}

struct TimestepAggregate {
  int timestep = 0;
  Interval mean_rating;
  std::optional<Interval> observed_rmse;
  Interval coverage;
  std::size_t n_trials = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialResult> trials;
  std::vector<TimestepAggregate> timeline;
};

/// Per-timestep mean and 95% interval across trials (trials that reached
/// the timestep only).
inline std::vector<TimestepAggregate> aggregate_timeline(const std::vector<TrialResult>& trials) {
  std::size_t steps = 0;
  for (const auto& t : trials) steps = std::max(steps, t.timeline.size());
  std::vector<TimestepAggregate> out;
  for (std::size_t s = 0; s < steps; ++s) {
    std::vector<double> mr, rm, cov;
    for (const auto& t : trials) {
      if (s >= t.timeline.size()) continue;
      const auto& r = t.timeline[s];
      mr.push_back(r.mean_rating);
      cov.push_back(static_cast<double>(r.coverage));
      if (r.observed_rmse) rm.push_back(*r.observed_rmse);
    }
    TimestepAggregate a;
    a.timestep = static_cast<int>(s + 1);
    a.n_trials = mr.size();
    a.mean_rating = aggregate_ci(mr);
    a.coverage = aggregate_ci(cov);
    if (!rm.empty() && rm.size() == mr.size()) a.observed_rmse = aggregate_ci(rm);
    out.push_back(a);
  }
  return out;
}

inline void log_progress(const std::string& line) {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << line << '\n';
}

/// Runs every trial (up to `parallel` at once) and aggregates in trial order.
/// Only trial 0 computes offline metrics.
inline ExperimentResult run_experiment(const ExperimentConfig& c, const Environment& prototype,
                                       std::size_t parallel = 1, bool verbose = false) {
  const std::size_t n = c.schedule.n_trials;
  if (n < 1) throw ContractError("n_trials must be at least 1");
  std::vector<std::optional<TrialResult>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < n;) {
      try {
        slots[k] = run_trial(c, prototype, k, k == 0);
        if (verbose) {
          log_progress("[" + c.experiment_id + "] " + c.env + "/" + c.recommender + "/" + c.policy + " trial " +
                       std::to_string(k) + " done");
        }
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(parallel, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  ExperimentResult out;
  out.config = c;
  for (auto& s : slots) out.trials.push_back(std::move(*s));
  out.timeline = aggregate_timeline(out.trials);
  return out;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c, std::size_t parallel = 1, bool verbose = false) {
  const auto env = make_environment(c.env, c.env_params, RngSeed{c.seed, {}});
  return run_experiment(c, *env, parallel, verbose);
}

/// Low-data exploration run: population RMSE on, final-window metrics over
/// the configured window. Hyperparameters come from the caller (they are
/// tuned on the full-data variant of the environment).
inline ExperimentResult lowdata_experiment(ExperimentConfig c, const Environment& prototype, std::size_t parallel = 1,
                                           bool verbose = false) {
  c.schedule.lowdata = true;
  c.record_population_rmse = true;
  return run_experiment(c, prototype, parallel, verbose);
}

inline ExperimentResult lowdata_experiment(const ExperimentConfig& c, std::size_t parallel = 1, bool verbose = false) {
  const auto env = make_environment(c.env, c.env_params, RngSeed{c.seed, {}});
  return lowdata_experiment(c, *env, parallel, verbose);
}

/// Trial-level summary of one (env, recommender, policy) experiment.
struct ExperimentSummary {
  std::string experiment_id, env, recommender, policy;
  std::size_t n_trials = 0;
  std::optional<Interval> mean_rating;
  std::optional<Interval> observed_rmse;
  std::optional<Interval> offline_rmse;
  std::optional<Interval> offline_ndcg;
  std::optional<Interval> coverage;
  std::optional<Interval> novelty;
  std::optional<Interval> gini;
  std::optional<Interval> final_mean_rating;
  std::optional<Interval> final_rmse;
  std::optional<Interval> final_population_rmse;
};

inline ExperimentSummary summarize(const ExperimentResult& r) {
  ExperimentSummary s;
  s.experiment_id = r.config.experiment_id;
  s.env = r.config.env;
  s.recommender = r.config.recommender;
  s.policy = r.config.policy;
  s.n_trials = r.trials.size();

  auto collect = [&](auto&& get) -> std::optional<Interval> {
    std::vector<double> v;
    for (const auto& t : r.trials) {
      const std::optional<double> x = get(t);
      if (!x) return std::nullopt;
      v.push_back(*x);
    }
    if (v.empty()) return std::nullopt;
    return aggregate_ci(v);
  };
  auto per_step_mean = [](const TrialResult& t, auto&& field) -> std::optional<double> {
    if (t.timeline.empty()) return std::nullopt;
    double s = 0.0;
    for (const auto& rec : t.timeline) {
      const std::optional<double> x = field(rec);
      if (!x) return std::nullopt;
      s += *x;
    }
    return s / static_cast<double>(t.timeline.size());
  };

  s.mean_rating = collect([](const TrialResult& t) { return t.overall_mean_rating; });
  s.observed_rmse = collect([](const TrialResult& t) { return t.overall_rmse; });
  s.coverage = collect([&](const TrialResult& t) {
    return per_step_mean(t, [](const TimestepRecord& x) { return std::optional<double>(double(x.coverage)); });
  });
  s.novelty = collect([&](const TrialResult& t) {
    return per_step_mean(t, [](const TimestepRecord& x) { return std::optional<double>(x.novelty); });
  });
  s.gini = collect([&](const TrialResult& t) {
    return per_step_mean(t, [](const TimestepRecord& x) { return x.gini; });
  });
  s.final_mean_rating = collect([](const TrialResult& t) -> std::optional<double> {
    if (t.final_window.size == 0) return std::nullopt;
    return t.final_window.mean_rating;
  });
  s.final_rmse = collect([](const TrialResult& t) { return t.final_window.rmse; });
  s.final_population_rmse = collect([](const TrialResult& t) { return t.final_population_rmse; });

  if (!r.trials.empty() && !r.trials.front().offline.empty()) {
    std::vector<double> rm, nd;
    bool rm_ok = true, nd_ok = true;
    for (const auto& f : r.trials.front().offline) {
      if (f.rmse) rm.push_back(*f.rmse); else rm_ok = false;
      if (f.ndcg) nd.push_back(*f.ndcg); else nd_ok = false;
    }
    if (rm_ok && !rm.empty()) s.offline_rmse = aggregate_ci(rm);
    if (nd_ok && !nd.empty()) s.offline_ndcg = aggregate_ci(nd);
  }
  return s;
}

}  // namespace reclab
