// reclab: tune, run and report on simulated recommendation experiments.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include "reclab/dataio/config.hpp"
#include "reclab/dataio/results.hpp"
#include "reclab/reclab.hpp"
#include "reclab/report.hpp"

namespace fs = std::filesystem;
using namespace reclab;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kFailure = 2;

struct Flags {
  std::string config;
  std::string out = "results";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::size_t parallel = std::max(1u, std::thread::hardware_concurrency());
  bool quiet = false;
};

/// Loads the config and applies command-line overrides on top of it.
ExperimentConfig effective_config(const Flags& f) {
  ExperimentConfig c = load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.trials) c.schedule.n_trials = *f.trials;
  return resolve_config(c);
}

/// One row per (configuration, fold); failed configurations get a single
/// row with empty metrics.
std::string tuning_csv(const std::string& recommender, const GridResult& r) {
  std::string out = csv_row({"recommender", "config", "fold", "rmse", "ndcg_at_k"});
  for (const auto& s : r.table) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : s.config) {
      std::visit([&](const auto& x) { j[k] = x; }, v);
    }
    const std::string config = j.dump();
    if (s.failed && s.folds.empty()) {
      out += csv_row({recommender, config, "", "", ""});
      continue;
    }
    for (std::size_t f = 0; f < s.folds.size(); ++f) {
      out += csv_row({recommender, config, std::to_string(f), format_real(s.folds[f].rmse),
                      format_real(s.folds[f].ndcg)});
    }
  }
  return out;
}

int cmd_tune(const Flags& f) {
  const ExperimentConfig c = effective_config(f);
  const auto env = make_environment(c.env, c.env_params, RngSeed{c.seed, {}});
  const GridResult result = tune(c, *env);

  ExperimentConfig best = c;
  for (const auto& [k, v] : result.best) best.rec_params[k] = v;
  best.grid.clear();
  best = resolve_config(best);

  fs::create_directories(f.out);
  write_atomic(fs::path(f.out) / "tuning.csv", tuning_csv(c.recommender, result));
  const fs::path best_path = fs::path(f.out) / "best_config.toml";
  write_atomic(best_path, serialize_config(best));
  if (load_config(best_path) != best) throw std::runtime_error("best config does not reparse to itself");
  for (const auto& s : result.table) {
    if (s.failed) std::cerr << "warning: configuration failed: " << s.error << '\n';
  }
  if (!f.quiet) {
    std::cerr << "tuned " << c.recommender << " on " << c.env << " over " << result.table.size()
              << " configurations; best written to " << best_path.string() << '\n';
  }
  return kOk;
}

int cmd_run(const Flags& f) {
  const ExperimentConfig c = effective_config(f);
  const fs::path out(f.out);
  const auto files = ResultFiles::in(out);
  try {
    const auto env = make_environment(c.env, c.env_params, RngSeed{c.seed, {}});
    const ExperimentResult r = c.schedule.lowdata ? lowdata_experiment(c, *env, f.parallel, !f.quiet)
                                                  : run_experiment(c, *env, f.parallel, !f.quiet);
    write_results(r, out);
  } catch (...) {
    std::error_code ec;
    for (const auto& p : files.all()) fs::remove(p, ec);
    throw;
  }
  for (const auto& p : files.all()) {
    if (!fs::is_regular_file(p)) throw std::runtime_error("missing output " + p.string());
  }
  if (!f.quiet) std::cerr << "results written to " << out.string() << '\n';
  return kOk;
}

int cmd_report(const Flags& f) {
  if (!fs::is_directory(f.out)) throw std::runtime_error("no such results directory: " + f.out);
  const auto points = collect_summaries(f.out);
  if (points.empty()) throw std::runtime_error("no summary.csv found under " + f.out);
  const auto report = correlate(points);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  const fs::path path = fs::path(f.out) / "correlations.csv";
  write_atomic(path, correlations_csv(report));
  if (!f.quiet) std::cerr << report.rows.size() << " correlation rows written to " << path.string() << '\n';
  return kOk;
}

int cmd_list() {
  std::cout << "environments:";
  for (const auto& n : environment_names()) std::cout << ' ' << n;
  std::cout << "\nrecommenders:";
  for (const auto& n : recommender_names()) std::cout << ' ' << n;
  std::cout << "\npolicies: greedy eps:<epsilon> ts:<power>\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation-based online evaluation of recommender systems"};
  app.require_subcommand(1, 1);
  Flags f;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", f.config, "experiment config (TOML)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--seed", f.seed, "base seed (overrides the config)");
    sub->add_option("--trials", f.trials, "number of trials (overrides the config)")->check(CLI::PositiveNumber);
    sub->add_option("--parallel", f.parallel, "maximum concurrent trials")->check(CLI::PositiveNumber);
    sub->add_flag("--quiet", f.quiet, "suppress progress output");
  };
  auto* tune_cmd = app.add_subcommand("tune", "grid-search hyperparameters on the offline dataset");
  auto* run_cmd = app.add_subcommand("run", "run the online experiment and write result CSVs");
  auto* report_cmd = app.add_subcommand("report", "offline/online rank correlations from summary CSVs");
  auto* list_cmd = app.add_subcommand("list", "list environments, recommenders and policies");
  add_common(tune_cmd, true);
  add_common(run_cmd, true);
  add_common(report_cmd, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*list_cmd) return cmd_list();
    if (*tune_cmd) return cmd_tune(f);
    if (*run_cmd) return cmd_run(f);
    if (*report_cmd) return cmd_report(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
