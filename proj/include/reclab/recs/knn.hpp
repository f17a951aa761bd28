#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "reclab/recommender.hpp"

namespace reclab {

enum class KnnOrientation { item, user };
enum class Similarity { cosine, pearson };

struct KnnParams {
  std::size_t k = 40;  // 0 means unbounded
  double shrinkage = 100.0;
  Similarity similarity = Similarity::pearson;
};

/// Accumulated co-rating statistics for one entity pair.
struct CoRating {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }
};

/// Base similarity over co-rated entries, before shrinkage.
inline double base_similarity(const CoRating& c, Similarity kind) {
  if (c.n == 0) return 0.0;
  double num = 0, den = 0;
  if (kind == Similarity::cosine) {
    num = c.sxy;
    den = std::sqrt(c.sxx * c.syy);
  } else {
    if (c.n < 2) return 0.0;
    num = c.sxy - c.sx * c.sy / c.n;
    const double vx = c.sxx - c.sx * c.sx / c.n;
    const double vy = c.syy - c.sy * c.sy / c.n;
    if (vx <= 0 || vy <= 0) return 0.0;
    den = std::sqrt(vx * vy);
  }
  if (den <= 0) return 0.0;
  return std::clamp(num / den, -1.0, 1.0);
}

inline double shrunk_similarity(const CoRating& c, Similarity kind, double shrinkage) {
  if (c.n == 0) return 0.0;
  return c.n / (c.n + shrinkage) * base_similarity(c, kind);
}

/// Mean-centered neighborhood model. The item orientation compares items over
/// their common raters; the user orientation swaps the roles.
class KnnModel final : public Recommender {
 public:
  KnnModel(KnnOrientation orientation, KnnParams params, RatingRange range = {})
      : orientation_(orientation), params_(params), range_(range) {}

  std::string name() const override {
    return orientation_ == KnnOrientation::item ? "itemknn" : "userknn";
  }

  void fit(const ObservationSet& obs, Rng&) override {
    if (obs.empty()) throw ContractError(name() + ": cannot fit on an empty dataset");
    const bool by_item = orientation_ == KnnOrientation::item;
    n_entities_ = by_item ? obs.n_items() : obs.n_users();
    n_contexts_ = by_item ? obs.n_users() : obs.n_items();
    global_mean_ = obs.mean_rating();

    profiles_.assign(n_contexts_, {});
    std::vector<double> sum(n_entities_, 0.0);
    std::vector<std::size_t> count(n_entities_, 0);
    for (const auto& o : obs) {
      const std::size_t e = by_item ? o.item : o.user;
      const std::size_t c = by_item ? o.user : o.item;
      profiles_[c].push_back({e, o.rating});
      sum[e] += o.rating;
      ++count[e];
    }
    for (auto& p : profiles_) std::sort(p.begin(), p.end());

    means_.assign(n_entities_, global_mean_);
    seen_.assign(n_entities_, 0);
    for (std::size_t e = 0; e < n_entities_; ++e) {
      if (count[e] > 0) {
        means_[e] = sum[e] / static_cast<double>(count[e]);
        seen_[e] = 1;
      }
    }

    std::vector<CoRating> stats(n_entities_ * n_entities_);
    for (const auto& profile : profiles_) {
      for (std::size_t a = 0; a < profile.size(); ++a) {
        for (std::size_t b = a + 1; b < profile.size(); ++b) {
          stats[profile[a].first * n_entities_ + profile[b].first].add(profile[a].second,
                                                                      profile[b].second);
        }
      }
    }
    sim_.assign(n_entities_ * n_entities_, 0.0);
    for (std::size_t e = 0; e < n_entities_; ++e) {
      for (std::size_t f = e + 1; f < n_entities_; ++f) {
        const double s = shrunk_similarity(stats[e * n_entities_ + f], params_.similarity,
                                           params_.shrinkage);
        sim_[e * n_entities_ + f] = s;
        sim_[f * n_entities_ + e] = s;
      }
    }
  }

  double similarity(std::size_t e, std::size_t f) const { return sim_[e * n_entities_ + f]; }
  double entity_mean(std::size_t e) const { return means_[e]; }

  double predict(UserId u, ItemId i) const override {
    const bool by_item = orientation_ == KnnOrientation::item;
    const std::size_t e = by_item ? i : u;
    const std::size_t c = by_item ? u : i;
    if (e >= n_entities_ || !seen_[e]) return clip(global_mean_, range_);
    if (c >= n_contexts_) return clip(means_[e], range_);
    return clip(neighborhood_estimate(e, profiles_[c]), range_);
  }

 private:
  double neighborhood_estimate(std::size_t e, const std::vector<std::pair<std::size_t, double>>& profile) const {
    thread_local std::vector<std::pair<double, std::size_t>> scratch;  // (-sim, index into profile)
    scratch.clear();
    for (std::size_t k = 0; k < profile.size(); ++k) {
      const std::size_t f = profile[k].first;
      if (f == e) continue;
      const double s = sim_[e * n_entities_ + f];
      if (s > 0) scratch.emplace_back(-s, k);
    }
    if (scratch.empty()) return means_[e];
    const std::size_t take =
        params_.k == 0 ? scratch.size() : std::min(params_.k, scratch.size());
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(take), scratch.end());
    double num = 0, den = 0;
    for (std::size_t n = 0; n < take; ++n) {
      const double s = -scratch[n].first;
      const auto& [f, r] = profile[scratch[n].second];
      num += s * (r - means_[f]);
      den += std::abs(s);
    }
    return means_[e] + num / den;
  }

  KnnOrientation orientation_;
  KnnParams params_;
  RatingRange range_;
  std::size_t n_entities_ = 0;
  std::size_t n_contexts_ = 0;
  double global_mean_ = 0;
  std::vector<std::vector<std::pair<std::size_t, double>>> profiles_;  // per context: (entity, rating)
  std::vector<double> means_;
  std::vector<std::uint8_t> seen_;
  std::vector<double> sim_;
};

}  // namespace reclab
