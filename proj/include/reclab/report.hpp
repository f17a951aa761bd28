#pragma once

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reclab/dataio/csv.hpp"
#include "reclab/dataio/results.hpp"
#include "reclab/metrics.hpp"

namespace reclab {

/// One summary row reduced to what the correlation report needs.
struct SummaryPoint {
  std::string env, recommender, policy;
  std::optional<double> mean_rating, offline_ndcg, offline_rmse, coverage;
};

struct CorrelationRow {
  std::string env, policy, metric;
  std::size_t n_recommenders = 0;
  double spearman = 0.0;
};

struct CorrelationReport {
  std::vector<CorrelationRow> rows;
  std::vector<std::string> warnings;
};

inline std::vector<SummaryPoint> summary_points(const CsvTable& t) {
  const auto env = t.column("env"), rec = t.column("recommender"), pol = t.column("policy");
  const auto mr = t.column("mean_rating_mean"), nd = t.column("offline_ndcg_mean"),
             rm = t.column("offline_rmse_mean"), cov = t.column("coverage_mean");
  std::vector<SummaryPoint> out;
  for (const auto& r : t.rows) {
    out.push_back({r[env], r[rec], r[pol], parse_cell(r[mr]), parse_cell(r[nd]), parse_cell(r[rm]),
                   parse_cell(r[cov])});
  }
  return out;
}

/// Every summary.csv below `dir`, in path order.
inline std::vector<SummaryPoint> collect_summaries(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() == "summary.csv") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SummaryPoint> out;
  for (const auto& f : files) {
    auto pts = summary_points(read_csv(f));
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

/// Spearman correlations across recommenders within each (env, policy):
/// offline nDCG, offline RMSE (EASE excluded) and coverage against the
/// online mean rating.
inline CorrelationReport correlate(const std::vector<SummaryPoint>& points) {
  std::map<std::pair<std::string, std::string>, std::vector<const SummaryPoint*>> groups;
  for (const auto& p : points) groups[{p.env, p.policy}].push_back(&p);

  using Getter = std::optional<double> SummaryPoint::*;
  struct Metric {
    const char* name;
    Getter field;
    bool skip_ease;
  };
  const Metric metrics[] = {{"ndcg_vs_mean_rating", &SummaryPoint::offline_ndcg, false},
                            {"rmse_vs_mean_rating", &SummaryPoint::offline_rmse, true},
                            {"coverage_vs_mean_rating", &SummaryPoint::coverage, false}};

  CorrelationReport report;
  for (const auto& [key, members] : groups) {
    for (const auto& m : metrics) {
      std::vector<double> xs, ys;
      std::map<std::string, int> seen;
      for (const auto* p : members) {
        if (m.skip_ease && p->recommender == "ease") continue;
        if (!(p->*m.field) || !p->mean_rating) continue;
        if (seen[p->recommender]++) continue;
        xs.push_back(*(p->*m.field));
        ys.push_back(*p->mean_rating);
      }
      if (xs.size() < 2) {
        report.warnings.push_back(key.first + " (" + key.second + "): " + m.name + " needs at least 2 recommenders, found " +
                                  std::to_string(xs.size()));
        continue;
      }
      const bool flat_x = std::adjacent_find(xs.begin(), xs.end(), std::not_equal_to<>()) == xs.end();
      const bool flat_y = std::adjacent_find(ys.begin(), ys.end(), std::not_equal_to<>()) == ys.end();
      if (flat_x || flat_y) {
        report.warnings.push_back(key.first + " (" + key.second + "): " + m.name +
                                  " is undefined because one side is constant across recommenders");
        continue;
      }
      report.rows.push_back({key.first, key.second, m.name, xs.size(), spearman(xs, ys)});
    }
  }
  return report;
}

inline std::string correlations_csv(const CorrelationReport& r) {
  std::string out = csv_row({"env", "policy", "metric", "n_recommenders", "spearman"});
  for (const auto& row : r.rows) {
    out += csv_row({row.env, row.policy, row.metric, std::to_string(row.n_recommenders), format_real(row.spearman)});
  }
  return out;
}

}  // namespace reclab
