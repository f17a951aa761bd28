#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "reclab/recommender.hpp"

namespace reclab {

struct EaseParams {
  double l2 = 100.0;
  double threshold = 4.0;  // ratings at or above count as positives
};

/// Binarized user x item interaction matrix.
inline Eigen::MatrixXd binarize(const ObservationSet& obs, double threshold) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(obs.n_users()),
                                            static_cast<Eigen::Index>(obs.n_items()));
  for (const auto& o : obs) {
    if (o.rating >= threshold) x(static_cast<Eigen::Index>(o.user), static_cast<Eigen::Index>(o.item)) = 1.0;
  }
  return x;
}

/// Item-item weights of the zero-diagonal ridge regression X ~ X B:
/// P = (X^T X + l2 I)^-1, B_ij = -P_ij / P_jj, B_jj = 0.
inline Eigen::MatrixXd ease_weights(const Eigen::MatrixXd& x, double l2) {
  if (!(l2 > 0)) throw ContractError("ease: l2 weight must be positive");
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += l2;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw std::runtime_error("ease: Gram matrix factorization failed");
  const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double pjj = p(j, j);
    if (!(pjj > 0) || !std::isfinite(pjj)) throw std::runtime_error("ease: degenerate inverse diagonal");
    b.col(j) = -p.col(j) / pjj;
    b(j, j) = 0.0;
  }
  if (!b.allFinite()) throw std::runtime_error("ease: non-finite weights");
  return b;
}

/// Scores are not on the rating scale; EASE takes part in ranking metrics only.
class EaseModel final : public Recommender {
 public:
  explicit EaseModel(EaseParams params) : params_(params) {
    if (!(params_.l2 > 0)) throw ContractError("ease: l2 weight must be positive");
  }

  std::string name() const override { return "ease"; }
  bool rating_scale_scores() const override { return false; }

  void fit(const ObservationSet& obs, Rng&) override {
    const Eigen::MatrixXd x = binarize(obs, params_.threshold);
    weights_ = ease_weights(x, params_.l2);
    scores_ = x * weights_;
  }

  double predict(UserId u, ItemId i) const override {
    return scores_(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(i));
  }

  void score_user(UserId u, std::span<double> out) const override {
    for (ItemId i = 0; i < out.size(); ++i) out[i] = predict(u, i);
  }

  const Eigen::MatrixXd& weights() const { return weights_; }

 private:
  EaseParams params_;
  Eigen::MatrixXd weights_;
  Eigen::MatrixXd scores_;
};

}  // namespace reclab
