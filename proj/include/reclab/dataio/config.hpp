#pragma once

#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include <toml.hpp>

#include "reclab/harness.hpp"

namespace reclab {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schedule defaults for an environment. Low-data variants start from 1000
/// revealed ratings; the slate environments run 1000 -> 2000.
inline Schedule default_schedule(const std::string& env) {
  Schedule s;
  const std::string base = base_environment(env);
  if (is_lowdata_environment(env)) {
    s.n_initial = 1000;
    s.users_per_step = 200;
    s.target_total_ratings = 11000;
    s.n_trials = 1;
    s.lowdata = true;
  } else if (base == "latent-score" || base == "beta-rank") {
    s.n_initial = 1000;
    s.users_per_step = 100;
    s.target_total_ratings = 2000;
  }
  return s;
}

inline ExperimentConfig default_config(const std::string& env, const std::string& recommender) {
  ExperimentConfig c;
  c.env = env;
  c.recommender = recommender;
  c.schedule = default_schedule(env);
  c.record_population_rmse = is_lowdata_environment(env);
  return c;
}

/// Checks every grid axis against the recommender's parameters and coerces
/// its values to the declared kinds.
inline GridAxes resolve_grid(const std::string& recommender, const GridAxes& grid) {
  const auto schema = recommender_schema(recommender);
  GridAxes out;
  for (const auto& [axis, values] : grid) {
    std::vector<ParamValue> coerced;
    for (const auto& v : values) {
      const ParamMap one = resolve_params(schema, {{axis, v}}, recommender + " grid");
      coerced.push_back(one.at(axis));
    }
    out[axis] = std::move(coerced);
  }
  return out;
}

/// Validates names and fills every default so the result is self-describing.
inline ExperimentConfig resolve_config(ExperimentConfig c) {
  require_environment(c.env);
  require_recommender(c.recommender);
  c.env_params = resolve_params(environment_schema(c.env), c.env_params, c.env);
  c.rec_params = resolve_recommender_params(c.recommender, c.rec_params, environment_rating_range(c.env));
  c.grid = resolve_grid(c.recommender, c.grid);
  c.policy = ExplorationPolicy::parse(c.policy).to_string();
  const std::size_t required = environment_slate_size(c.env, c.env_params);
  if (c.schedule.slate_size == 0) c.schedule.slate_size = required;
  if (c.schedule.slate_size != required) {
    throw ContractError("schedule.slate_size = " + std::to_string(c.schedule.slate_size) + " but " + c.env +
                        " requires " + std::to_string(required));
  }
  if (c.schedule.n_initial > c.schedule.target_total_ratings) {
    throw ContractError("schedule: n_initial exceeds target_total_ratings");
  }
  if (c.schedule.n_trials < 1) throw ContractError("schedule.n_trials must be at least 1");
  if (c.schedule.users_per_step < 1) throw ContractError("schedule.users_per_step must be at least 1");
  if (c.schedule.folds < 2) throw ContractError("schedule.folds must be at least 2");
  if (c.schedule.lowdata) c.record_population_rmse = true;
  return c;
}

namespace detail {

inline ConfigError type_error(const std::string& path, const char* expected) {
  return ConfigError(path + ": expected " + expected);
}

inline void reject_unknown(const toml::table& t, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, _] : t) {
    if (!known.contains(std::string(key.str()))) {
      std::string valid;
      for (const auto& k : known) valid += (valid.empty() ? "" : ", ") + k;
      throw ConfigError(where + ": unknown key '" + std::string(key.str()) + "' (valid: " + valid + ")");
    }
  }
}

inline std::string get_string(const toml::node& n, const std::string& path) {
  if (auto v = n.value_exact<std::string>()) return *v;
  throw type_error(path, "a string");
}

inline std::int64_t get_int(const toml::node& n, const std::string& path) {
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  throw type_error(path, "an integer");
}

inline std::size_t get_size(const toml::node& n, const std::string& path) {
  const auto v = get_int(n, path);
  if (v < 0) throw ConfigError(path + ": must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline bool get_bool(const toml::node& n, const std::string& path) {
  if (auto v = n.value_exact<bool>()) return *v;
  throw type_error(path, "a boolean");
}

inline ParamValue get_param(const toml::node& n, const std::string& path) {
  if (auto v = n.value_exact<std::int64_t>()) return *v;
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<std::string>()) return *v;
  throw type_error(path, "a number or a string");
}

inline const toml::table& get_table(const toml::node& n, const std::string& path) {
  if (const auto* t = n.as_table()) return *t;
  throw type_error(path, "a table");
}

/// Parameters of a component: every key except `name` (and `grid`), checked
/// against the component's schema so type errors carry the key path.
inline ParamMap get_params(const toml::table& t, const std::string& path, const ParamSchema& schema,
                           const std::string& owner) {
  ParamMap out;
  for (const auto& [key, node] : t) {
    const std::string k(key.str());
    if (k == "name" || k == "grid") continue;
    const std::string where = path + "." + k;
    ParamValue v = get_param(node, where);
    try {
      out[k] = resolve_params(schema, {{k, v}}, owner).at(k);
    } catch (const ContractError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

inline void put_param(toml::table& t, const std::string& key, const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) t.insert(key, *d);
  else if (const auto* i = std::get_if<std::int64_t>(&v)) t.insert(key, *i);
  else t.insert(key, std::get<std::string>(v));
}

}  // namespace detail

/// Reads a TOML experiment description:
///
///   experiment_id = "fig1"
///   seed = 7
///   [env]          name = "topics-static", plus environment parameters
///   [recommender]  name = "sgd-mf", plus hyperparameters
///   [recommender.grid]  axis = [values, ...] for the tune command
///   [policy]       name = "greedy" | "eps:<e>" | "ts:<p>"
///   [schedule]     n_initial, users_per_step, slate_size, target_total_ratings,
///                  n_trials, lowdata, final_window, folds, ndcg_k
///   [flags]        record_population_rmse, record_gini, offline_metrics
///
/// Missing values take the defaults of the named environment.
inline ExperimentConfig parse_config(const toml::table& root) {
  using namespace detail;
  reject_unknown(root, {"experiment_id", "seed", "env", "recommender", "policy", "schedule", "flags"}, "config");

  const auto* env_node = root.get("env");
  if (!env_node) throw ConfigError("env: missing table");
  const auto& env = get_table(*env_node, "env");
  if (!env.get("name")) throw ConfigError("env.name: missing");
  const std::string env_name = get_string(*env.get("name"), "env.name");

  const auto* rec_node = root.get("recommender");
  if (!rec_node) throw ConfigError("recommender: missing table");
  const auto& rec = get_table(*rec_node, "recommender");
  if (!rec.get("name")) throw ConfigError("recommender.name: missing");
  const std::string rec_name = get_string(*rec.get("name"), "recommender.name");

  try {
    require_environment(env_name);
    require_recommender(rec_name);
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }

  ExperimentConfig c = default_config(env_name, rec_name);
  if (const auto* n = root.get("experiment_id")) c.experiment_id = get_string(*n, "experiment_id");
  if (const auto* n = root.get("seed")) {
    const auto s = get_int(*n, "seed");
    if (s < 0) throw ConfigError("seed: must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  c.env_params = get_params(env, "env", environment_schema(env_name), env_name);
  c.rec_params = get_params(rec, "recommender", recommender_schema(rec_name), rec_name);

  if (const auto* g = rec.get("grid")) {
    const auto& grid = get_table(*g, "recommender.grid");
    const auto schema = recommender_schema(rec_name);
    for (const auto& [key, node] : grid) {
      const std::string axis(key.str());
      const std::string where = "recommender.grid." + axis;
      const auto* arr = node.as_array();
      if (!arr) throw type_error(where, "an array");
      std::vector<ParamValue> values;
      for (std::size_t k = 0; k < arr->size(); ++k) {
        values.push_back(get_param(*arr->get(k), where + "[" + std::to_string(k) + "]"));
      }
      c.grid[axis] = std::move(values);
    }
  }

  if (const auto* p = root.get("policy")) {
    const auto& policy = get_table(*p, "policy");
    reject_unknown(policy, {"name"}, "policy");
    if (const auto* n = policy.get("name")) c.policy = get_string(*n, "policy.name");
  }

  if (const auto* s = root.get("schedule")) {
    const auto& t = get_table(*s, "schedule");
    reject_unknown(t,
                   {"n_initial", "users_per_step", "slate_size", "target_total_ratings", "n_trials", "lowdata",
                    "final_window", "folds", "ndcg_k"},
                   "schedule");
    auto& sc = c.schedule;
    if (const auto* n = t.get("n_initial")) sc.n_initial = get_size(*n, "schedule.n_initial");
    if (const auto* n = t.get("users_per_step")) sc.users_per_step = get_size(*n, "schedule.users_per_step");
    if (const auto* n = t.get("slate_size")) sc.slate_size = get_size(*n, "schedule.slate_size");
    if (const auto* n = t.get("target_total_ratings")) {
      sc.target_total_ratings = get_size(*n, "schedule.target_total_ratings");
    }
    if (const auto* n = t.get("n_trials")) sc.n_trials = get_size(*n, "schedule.n_trials");
    if (const auto* n = t.get("lowdata")) sc.lowdata = get_bool(*n, "schedule.lowdata");
    if (const auto* n = t.get("final_window")) sc.final_window = get_size(*n, "schedule.final_window");
    if (const auto* n = t.get("folds")) sc.folds = get_size(*n, "schedule.folds");
    if (const auto* n = t.get("ndcg_k")) sc.ndcg_k = get_size(*n, "schedule.ndcg_k");
  }

  if (const auto* f = root.get("flags")) {
    const auto& t = get_table(*f, "flags");
    reject_unknown(t, {"record_population_rmse", "record_gini", "offline_metrics"}, "flags");
    if (const auto* n = t.get("record_population_rmse")) {
      c.record_population_rmse = get_bool(*n, "flags.record_population_rmse");
    }
    if (const auto* n = t.get("record_gini")) c.record_gini = get_bool(*n, "flags.record_gini");
    if (const auto* n = t.get("offline_metrics")) c.offline_metrics = get_bool(*n, "flags.offline_metrics");
  }

  try {
    return resolve_config(std::move(c));
  } catch (const ContractError& e) {
    throw ConfigError(e.what());
  }
}

inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
  try {
    return parse_config(toml::parse(text, source));
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ": " << e.description();
    throw ConfigError(os.str());
  }
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

inline toml::table config_to_toml(const ExperimentConfig& c) {
  using detail::put_param;
  toml::table root;
  root.insert("experiment_id", c.experiment_id);
  root.insert("seed", static_cast<std::int64_t>(c.seed));

  toml::table env;
  env.insert("name", c.env);
  for (const auto& [k, v] : c.env_params) put_param(env, k, v);
  root.insert("env", std::move(env));

  toml::table rec;
  rec.insert("name", c.recommender);
  for (const auto& [k, v] : c.rec_params) put_param(rec, k, v);
  if (!c.grid.empty()) {
    toml::table grid;
    for (const auto& [axis, values] : c.grid) {
      toml::array arr;
      for (const auto& v : values) {
        if (const auto* d = std::get_if<double>(&v)) arr.push_back(*d);
        else if (const auto* i = std::get_if<std::int64_t>(&v)) arr.push_back(*i);
        else arr.push_back(std::get<std::string>(v));
      }
      grid.insert(axis, std::move(arr));
    }
    rec.insert("grid", std::move(grid));
  }
  root.insert("recommender", std::move(rec));

  root.insert("policy", toml::table{{"name", c.policy}});

  const auto& s = c.schedule;
  auto i64 = [](std::size_t v) { return static_cast<std::int64_t>(v); };
  root.insert("schedule", toml::table{{"n_initial", i64(s.n_initial)},
                                      {"users_per_step", i64(s.users_per_step)},
                                      {"slate_size", i64(s.slate_size)},
                                      {"target_total_ratings", i64(s.target_total_ratings)},
                                      {"n_trials", i64(s.n_trials)},
                                      {"lowdata", s.lowdata},
                                      {"final_window", i64(s.final_window)},
                                      {"folds", i64(s.folds)},
                                      {"ndcg_k", i64(s.ndcg_k)}});
  root.insert("flags", toml::table{{"record_population_rmse", c.record_population_rmse},
                                   {"record_gini", c.record_gini},
                                   {"offline_metrics", c.offline_metrics}});
  return root;
}

inline std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream os;
  os << config_to_toml(c) << '\n';
  return os.str();
}

}  // namespace reclab
