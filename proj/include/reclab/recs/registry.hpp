#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reclab/recs/baselines.hpp"
#include "reclab/recs/ease.hpp"
#include "reclab/recs/knn.hpp"
#include "reclab/recs/mf.hpp"

namespace reclab {

/// Named axes of candidate values; expanded as a Cartesian product.
using GridAxes = std::map<std::string, std::vector<ParamValue>>;

inline const std::vector<std::string>& recommender_names() {
  static const std::vector<std::string> names = {"random", "toppop", "itemknn", "userknn",
                                                 "oracle", "sgd-mf", "ease"};
  return names;
}

inline bool is_recommender(const std::string& name) {
  const auto& n = recommender_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

inline std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

inline void require_recommender(const std::string& name) {
  if (!is_recommender(name)) {
    throw ContractError("unknown recommender '" + name + "' (valid: " + join_names(recommender_names()) + ")");
  }
}

inline ParamSchema recommender_schema(const std::string& name) {
  require_recommender(name);
  if (name == "itemknn" || name == "userknn") {
    return {{"k", ParamKind::integer, std::int64_t{40}, {}},
            {"shrinkage", ParamKind::real, 100.0, {}},
            {"similarity", ParamKind::categorical, std::string("pearson"), {"cosine", "pearson"}}};
  }
  if (name == "sgd-mf") {
    return {{"dim", ParamKind::integer, std::int64_t{16}, {}},
            {"learning_rate", ParamKind::real, 0.01, {}},
            {"regularization", ParamKind::real, 0.02, {}},
            {"epochs", ParamKind::integer, std::int64_t{50}, {}},
            {"init_std", ParamKind::real, 0.1, {}}};
  }
  if (name == "ease") {
    return {{"l2", ParamKind::real, 100.0, {}}, {"threshold", ParamKind::real, 4.0, {}}};
  }
  return {};
}

/// Default tuning grid for each recommender.
inline GridAxes default_grid(const std::string& name) {
  require_recommender(name);
  using I = std::int64_t;
  if (name == "itemknn" || name == "userknn") {
    return {{"k", {I{20}, I{40}, I{80}}},
            {"shrinkage", {0.0, 25.0, 100.0}},
            {"similarity", {std::string("cosine"), std::string("pearson")}}};
  }
  if (name == "sgd-mf") {
    return {{"dim", {I{8}, I{16}, I{32}}},
            {"learning_rate", {0.002, 0.01}},
            {"regularization", {0.02, 0.1}},
            {"epochs", {I{50}, I{128}}}};
  }
  if (name == "ease") return {{"l2", {10.0, 100.0, 500.0}}};
  return {};
}

/// Fills defaults; the EASE positive threshold defaults to three quarters of
/// the way up the environment's rating range (4 on [1, 5]).
inline ParamMap resolve_recommender_params(const std::string& name, ParamMap given, RatingRange range) {
  if (name == "ease" && !given.contains("threshold")) {
    given["threshold"] = range.lo + 0.75 * (range.hi - range.lo);
  }
  return resolve_params(recommender_schema(name), given, name);
}

inline std::unique_ptr<Recommender> make_recommender(const std::string& name, const ParamMap& given,
                                                     RatingRange range) {
  const ParamMap p = resolve_recommender_params(name, given, range);
  if (name == "random") return std::make_unique<RandomRecommender>(range);
  if (name == "toppop") return std::make_unique<TopPop>(range);
  if (name == "oracle") return std::make_unique<Oracle>();
  if (name == "itemknn" || name == "userknn") {
    KnnParams kp;
    const auto k = as_integer(p.at("k"));
    if (k < 0) throw ContractError(name + ": k must be nonnegative (0 = unbounded)");
    kp.k = static_cast<std::size_t>(k);
    kp.shrinkage = as_real(p.at("shrinkage"));
    if (kp.shrinkage < 0) throw ContractError(name + ": shrinkage must be nonnegative");
    kp.similarity = as_string(p.at("similarity")) == "cosine" ? Similarity::cosine : Similarity::pearson;
    return std::make_unique<KnnModel>(name == "itemknn" ? KnnOrientation::item : KnnOrientation::user, kp,
                                      range);
  }
  if (name == "sgd-mf") {
    MfParams mp;
    const auto dim = as_integer(p.at("dim"));
    const auto epochs = as_integer(p.at("epochs"));
    if (dim < 0 || epochs < 0) throw ContractError("sgd-mf: dim and epochs must be nonnegative");
    mp.dim = static_cast<std::size_t>(dim);
    mp.epochs = static_cast<std::size_t>(epochs);
    mp.learning_rate = as_real(p.at("learning_rate"));
    mp.regularization = as_real(p.at("regularization"));
    mp.init_std = as_real(p.at("init_std"));
    return std::make_unique<MfModel>(mp, range);
  }
  return std::make_unique<EaseModel>(EaseParams{as_real(p.at("l2")), as_real(p.at("threshold"))});
}

}  // namespace reclab
