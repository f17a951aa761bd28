#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "reclab/dataio/config.hpp"
#include "reclab/dataio/ml100k.hpp"
#include "reclab/harness.hpp"

namespace reclab {

inline constexpr const char* kFormatVersion = "reclab-results/1";

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Real number with 9 significant digits; absent values become empty cells.
inline std::string format_real(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", *v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

inline std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) line += ',';
    line += csv_field(fields[k]);
  }
  return line + "\r\n";
}

/// Writes through a sibling temporary file and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw OutputError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw OutputError("cannot move " + tmp.string() + " to " + path.string());
  }
}

inline const std::vector<std::string>& timeseries_columns() {
  static const std::vector<std::string> c = {"experiment_id", "env",      "recommender", "policy",
                                             "trial",         "timestep", "mean_rating", "observed_rmse",
                                             "coverage",      "novelty",  "gini",        "population_rmse",
                                             "n_ratings_total"};
  return c;
}

inline const std::vector<std::string>& offline_columns() {
  static const std::vector<std::string> c = {"experiment_id", "env", "recommender", "fold", "rmse", "ndcg_at_20"};
  return c;
}

/// Metrics reported in the summary, each as a `<name>_mean` and `<name>_ci`
/// column pair (the CI column holds the 95% half-width).
inline const std::vector<std::string>& summary_metrics() {
  static const std::vector<std::string> m = {"mean_rating",       "observed_rmse", "offline_rmse",
                                             "offline_ndcg",      "coverage",      "novelty",
                                             "gini",              "final_mean_rating",
                                             "final_rmse",        "final_population_rmse"};
  return m;
}

inline std::vector<std::string> summary_columns() {
  std::vector<std::string> c = {"experiment_id", "env", "recommender", "policy", "n_trials"};
  for (const auto& m : summary_metrics()) {
    c.push_back(m + "_mean");
    c.push_back(m + "_ci");
  }
  return c;
}

inline std::string timeseries_csv(const ExperimentResult& r) {
  std::string out = csv_row(timeseries_columns());
  const auto& c = r.config;
  for (const auto& t : r.trials) {
    for (const auto& rec : t.timeline) {
      out += csv_row({c.experiment_id, c.env, c.recommender, c.policy, std::to_string(t.trial),
                      std::to_string(rec.timestep), format_real(rec.mean_rating), format_real(rec.observed_rmse),
                      std::to_string(rec.coverage), format_real(rec.novelty), format_real(rec.gini),
                      format_real(rec.population_rmse), std::to_string(rec.n_ratings_total)});
    }
  }
  return out;
}

inline std::string offline_csv(const ExperimentResult& r) {
  std::string out = csv_row(offline_columns());
  const auto& c = r.config;
  if (r.trials.empty()) return out;
  const auto& folds = r.trials.front().offline;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    out += csv_row({c.experiment_id, c.env, c.recommender, std::to_string(f), format_real(folds[f].rmse),
                    format_real(folds[f].ndcg)});
  }
  return out;
}

inline std::vector<std::string> summary_fields(const ExperimentSummary& s) {
  std::vector<std::string> row = {s.experiment_id, s.env, s.recommender, s.policy, std::to_string(s.n_trials)};
  const std::optional<Interval>* metrics[] = {&s.mean_rating,       &s.observed_rmse, &s.offline_rmse,
                                              &s.offline_ndcg,      &s.coverage,      &s.novelty,
                                              &s.gini,              &s.final_mean_rating,
                                              &s.final_rmse,        &s.final_population_rmse};
  for (const auto* m : metrics) {
    row.push_back(*m ? format_real((*m)->mean) : "");
    row.push_back(*m ? format_real((*m)->half_width) : "");
  }
  return row;
}

inline std::string summary_csv(const std::vector<ExperimentSummary>& rows) {
  std::string out = csv_row(summary_columns());
  for (const auto& s : rows) out += csv_row(summary_fields(s));
  return out;
}

inline nlohmann::ordered_json metadata_json(const ExperimentResult& r) {
  const auto& c = r.config;
  nlohmann::ordered_json j;
  j["format"] = kFormatVersion;
  j["experiment_id"] = c.experiment_id;
  j["base_seed"] = c.seed;
  j["config_toml"] = serialize_config(c);
  j["seeding"] = {
      {"environment", "base_seed/env/<trial>; shared by every recommender and policy of a study"},
      {"recommender", "base_seed/rec/<recommender>/<trial>"},
      {"policy", "base_seed/policy/<policy>/<trial>"},
      {"offline_folds", "base_seed/offline/folds"},
      {"paired_across_recommenders", true}};
  j["n_trials"] = r.trials.size();
  j["timesteps_per_trial"] = nlohmann::ordered_json::array();
  for (const auto& t : r.trials) j["timesteps_per_trial"].push_back(t.timeline.size());
  if (base_environment(c.env) == "ml-100k") {
    const auto data = load_ml100k(as_string(c.env_params.at("data_path")));
    j["raw_user_ids"] = data.raw_user_ids;
    j["raw_item_ids"] = data.raw_item_ids;
  }
  return j;
}

struct ResultFiles {
  std::filesystem::path timeseries, offline, summary, metadata;

  static ResultFiles in(const std::filesystem::path& dir) {
    return {dir / "timeseries.csv", dir / "offline.csv", dir / "summary.csv", dir / "metadata.json"};
  }
  std::vector<std::filesystem::path> all() const { return {timeseries, offline, summary, metadata}; }
};

inline ResultFiles write_results(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw OutputError("cannot create output directory " + dir.string());
  const auto files = ResultFiles::in(dir);
  write_atomic(files.timeseries, timeseries_csv(r));
  write_atomic(files.offline, offline_csv(r));
  write_atomic(files.summary, summary_csv({summarize(r)}));
  write_atomic(files.metadata, metadata_json(r).dump(2) + "\n");
  return files;
}

}  // namespace reclab
