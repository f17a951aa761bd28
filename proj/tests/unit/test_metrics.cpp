#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numeric>

#include "gen.hpp"
#include "reclab/metrics.hpp"
#include "reclab/recs/baselines.hpp"

using namespace reclab;

namespace {

std::vector<RankedEntry> entries(const std::vector<double>& predicted, const std::vector<double>& truth) {
  std::vector<RankedEntry> out;
  for (std::size_t k = 0; k < truth.size(); ++k) out.push_back({k, predicted[k], truth[k]});
  return out;
}

// Fixed table of predictions, for population RMSE.
class TableModel final : public Recommender {
 public:
  explicit TableModel(RatingTable t) : t_(std::move(t)) {}
  std::string name() const override { return "table"; }
  void fit(const ObservationSet&, Rng&) override {}
  double predict(UserId u, ItemId i) const override { return t_(u, i); }

 private:
  RatingTable t_;
};

}  // namespace

// ------------------------------------------------------------------- RMSE

TEST(Rmse, Examples) {
  const std::vector<double> a = {1, 5}, b = {5, 1};
  EXPECT_NEAR(rmse(a, b), 4.0, 1e-12);
  EXPECT_EQ(rmse(a, a), 0.0);
  EXPECT_THROW(rmse(std::vector<double>{}, std::vector<double>{}), ContractError);
}

TEST(Rmse, NoisyTruthGivesNoiseLevel) {
  Rng r = RngSeed{1, {}}.stream();
  std::normal_distribution<double> z(0, 0.5);
  std::vector<double> truth(100000), noisy(100000);
  for (std::size_t k = 0; k < truth.size(); ++k) {
    truth[k] = gen::real(r, 1, 5);
    noisy[k] = truth[k] + z(r);
  }
  EXPECT_NEAR(rmse(truth, noisy), 0.5, 0.01);
}

TEST(Rmse, SymmetricAndShiftInvariantProperty) {
  auto r = gen::rng(70);
  for (int round = 0; round < 200; ++round) {
    const auto n = gen::size(r, 1, 50);
    const auto a = gen::reals(r, n, -5, 5), b = gen::reals(r, n, -5, 5);
    const double c = gen::real(r, -10, 10);
    auto as = a, bs = b;
    for (auto& x : as) x += c;
    for (auto& x : bs) x += c;
    EXPECT_DOUBLE_EQ(rmse(a, b), rmse(b, a));
    EXPECT_NEAR(rmse(a, b), rmse(as, bs), 1e-9);
  }
}

TEST(MeanRating, Examples) {
  EXPECT_DOUBLE_EQ(mean_rating(std::vector<double>{3, 3, 3}), 3.0);
  EXPECT_DOUBLE_EQ(mean_rating(std::vector<double>{1, 5}), 3.0);
  EXPECT_DOUBLE_EQ(mean_rating(std::vector<double>(17, 2.5)), 2.5);
  EXPECT_THROW(mean_rating(std::vector<double>{}), ContractError);
}

// ------------------------------------------------------------------- nDCG

TEST(Ndcg, PerfectOrderIsOne) {
  EXPECT_DOUBLE_EQ(ndcg_at_k({entries({3, 2, 1}, {5, 4, 1})}, 3), 1.0);
}

TEST(Ndcg, ThreeItemHandExample) {
  // Predicted order B, A, C with truths A:5, B:4, C:3.
  const double dcg = 4 + 5 / std::log2(3.0) + 3 / 2.0;
  const double idcg = 5 + 4 / std::log2(3.0) + 3 / 2.0;
  EXPECT_NEAR(dcg, 8.65465, 1e-5);
  EXPECT_NEAR(idcg, 9.02372, 1e-5);
  EXPECT_NEAR(ndcg_at_k({entries({2, 3, 1}, {5, 4, 3})}, 3), 0.95910, 1e-5);
}

TEST(Ndcg, ReversedPairAndSkippedSingleton) {
  const std::vector<std::vector<RankedEntry>> users = {entries({1, 2}, {5, 1}), entries({4}, {3})};
  EXPECT_NEAR(ndcg_at_k(users, 2), 0.73783, 1e-5);
}

TEST(Ndcg, RatioOfSumsAcrossUsers) {
  // Two users: one perfect, one reversed. The ratio of sums differs from the
  // mean of per-user ratios.
  const std::vector<std::vector<RankedEntry>> users = {entries({2, 1}, {5, 1}), entries({1, 2}, {5, 1})};
  const double idcg = 5 + 1 / std::log2(3.0);
  const double dcg = idcg + (1 + 5 / std::log2(3.0));
  EXPECT_NEAR(ndcg_at_k(users, 2), dcg / (2 * idcg), 1e-12);
}

TEST(Ndcg, ErrorsWhenNoUserQualifies) {
  EXPECT_THROW(ndcg_at_k({entries({1}, {4})}, 5), ContractError);
  EXPECT_THROW(ndcg_at_k({entries({1, 2}, {4, 3})}, 0), ContractError);
}

TEST(Ndcg, BoundedAndInvariantUnderIncreasingTransformsProperty) {
  auto r = gen::rng(71);
  for (int round = 0; round < 300; ++round) {
    std::vector<std::vector<RankedEntry>> users, transformed;
    const auto n_users = gen::size(r, 1, 6);
    for (std::size_t u = 0; u < n_users; ++u) {
      const auto n = gen::size(r, 2, 12);
      users.push_back(entries(gen::reals(r, n, 1, 5), gen::coarse(r, n)));
      transformed.push_back(users.back());
      for (auto& e : transformed.back()) e.predicted = std::exp(2 * e.predicted) - 7;
    }
    const auto k = gen::size(r, 1, 15);
    const double v = ndcg_at_k(users, k);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0 + 1e-12);
    EXPECT_DOUBLE_EQ(v, ndcg_at_k(transformed, k));
  }
}

TEST(Ndcg, OneWhenPredictionsEqualTruthProperty) {
  auto r = gen::rng(72);
  for (int round = 0; round < 100; ++round) {
    const auto n = gen::size(r, 2, 15);
    const auto truth = gen::coarse(r, n);
    EXPECT_NEAR(ndcg_at_k({entries(truth, truth)}, gen::size(r, 1, 20)), 1.0, 1e-12);
  }
}

// --------------------------------------------------------------- coverage

TEST(Coverage, Examples) {
  EXPECT_EQ(coverage(std::vector<ItemId>{1, 2, 1}), 2u);
  EXPECT_EQ(coverage(std::vector<ItemId>{}), 0u);
  std::vector<ItemId> distinct(200);
  std::iota(distinct.begin(), distinct.end(), ItemId{0});
  EXPECT_EQ(coverage(distinct), 200u);
}

// ---------------------------------------------------------------- novelty

TEST(Novelty, Examples) {
  const std::vector<std::size_t> all = {10, 10};
  EXPECT_DOUBLE_EQ(novelty(std::vector<ItemId>{0, 1}, all, 10), 0.0);
  const std::vector<std::size_t> half = {5, 5};
  EXPECT_DOUBLE_EQ(novelty(std::vector<ItemId>{0, 1}, half, 10), 1.0);
  const std::vector<std::size_t> never = {0};
  EXPECT_DOUBLE_EQ(novelty(std::vector<ItemId>{0}, never, 1024), 10.0);
  EXPECT_THROW(novelty(std::vector<ItemId>{}, never, 1), ContractError);
}

TEST(Novelty, NonNegativeProperty) {
  auto r = gen::rng(73);
  for (int round = 0; round < 200; ++round) {
    const auto users = gen::size(r, 1, 100), items = gen::size(r, 1, 30);
    std::vector<std::size_t> raters(items);
    for (auto& c : raters) c = gen::size(r, 0, users);
    std::vector<ItemId> rec(gen::size(r, 1, 20));
    for (auto& i : rec) i = gen::size(r, 0, items - 1);
    EXPECT_GE(novelty(rec, raters, users), 0.0);
  }
}

// ------------------------------------------------------------------- Gini

TEST(Gini, Examples) {
  EXPECT_DOUBLE_EQ(gini(std::vector<double>{1, 1, 1, 1}), 0.0);
  EXPECT_NEAR(gini(std::vector<double>{0, 0, 0, 4}), 0.75, 1e-12);
  EXPECT_THROW(gini(std::vector<double>{0, 0}), ContractError);
}

TEST(Gini, MatchesDoubleSumAndPermutationInvariantProperty) {
  auto r = gen::rng(74);
  for (int round = 0; round < 300; ++round) {
    const auto n = gen::size(r, 1, 30);
    std::vector<double> x(n);
    for (auto& v : x) v = static_cast<double>(gen::size(r, 0, 9));
    if (std::accumulate(x.begin(), x.end(), 0.0) == 0) x[0] = 1;
    double num = 0, total = 0;
    for (double a : x) {
      total += a;
      for (double b : x) num += std::abs(a - b);
    }
    const double g = gini(x);
    EXPECT_NEAR(g, num / (2 * n * total), 1e-12);
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);
    auto shuffled = x;
    std::shuffle(shuffled.begin(), shuffled.end(), r);
    EXPECT_NEAR(gini(shuffled), g, 1e-12);
    const bool all_equal = std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
    EXPECT_EQ(g == 0.0, all_equal);
  }
}

// --------------------------------------------------------------- Spearman

TEST(Spearman, Examples) {
  const std::vector<double> a = {1, 2, 3}, b = {1, 3, 2}, c = {3, 2, 1};
  EXPECT_NEAR(spearman(a, a), 1.0, 1e-12);
  EXPECT_NEAR(spearman(a, c), -1.0, 1e-12);
  EXPECT_NEAR(spearman(a, b), 0.5, 1e-12);
}

TEST(Spearman, Errors) {
  const std::vector<double> one = {1}, flat = {2, 2, 2}, a = {1, 2, 3};
  EXPECT_THROW(spearman(one, one), ContractError);
  EXPECT_THROW(spearman(a, flat), ContractError);
  EXPECT_THROW(spearman(a, one), ContractError);
}

TEST(Spearman, TiesUseAverageRanks) {
  EXPECT_EQ(average_ranks(std::vector<double>{10, 20, 10, 30}), (std::vector<double>{1.5, 3, 1.5, 4}));
}

TEST(Spearman, InvariantUnderIncreasingTransformsProperty) {
  auto r = gen::rng(75);
  for (int round = 0; round < 300; ++round) {
    const auto n = gen::size(r, 3, 20);
    const auto x = gen::coarse(r, n), y = gen::reals(r, n, -3, 3);
    if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end()) continue;
    auto tx = x, ty = y;
    for (auto& v : tx) v = std::log(v) * 3 + 1;
    for (auto& v : ty) v = std::exp(v);
    const double s = spearman(x, y);
    EXPECT_GE(s, -1.0);
    EXPECT_LE(s, 1.0);
    EXPECT_NEAR(spearman(tx, ty), s, 1e-12);
  }
}

// -------------------------------------------------------- population RMSE

TEST(PopulationRmse, ZeroForExactModel) {
  RatingTable t(3, 4, 2.5);
  EXPECT_EQ(population_rmse(TableModel(t), t), 0.0);
  EXPECT_THROW(population_rmse(TableModel(t), RatingTable{}), ContractError);
}

TEST(PopulationRmse, MatchesDoubleLoop) {
  auto r = gen::rng(76);
  RatingTable truth(5, 5), pred(5, 5);
  for (auto& v : truth.values) v = gen::real(r, 1, 5);
  for (auto& v : pred.values) v = gen::real(r, 1, 5);
  double s = 0;
  for (UserId u = 0; u < 5; ++u)
    for (ItemId i = 0; i < 5; ++i) s += (pred(u, i) - truth(u, i)) * (pred(u, i) - truth(u, i));
  EXPECT_NEAR(population_rmse(TableModel(pred), truth), std::sqrt(s / 25), 1e-12);
}

// ------------------------------------------------------------ aggregate_ci

TEST(AggregateCi, Examples) {
  const auto c = aggregate_ci(std::vector<double>{3, 3, 3, 3});
  EXPECT_EQ(c.mean, 3.0);
  EXPECT_EQ(*c.half_width, 0.0);
  const auto d = aggregate_ci(std::vector<double>{2, 4});
  EXPECT_DOUBLE_EQ(d.mean, 3.0);
  EXPECT_NEAR(*d.half_width, 1.96, 1e-12);
  EXPECT_FALSE(aggregate_ci(std::vector<double>{7}).half_width.has_value());
  EXPECT_THROW(aggregate_ci(std::vector<double>{}), ContractError);
}

TEST(AggregateCi, HalfWidthShrinksAsInverseRootN) {
  Rng r = RngSeed{8, {}}.stream();
  std::normal_distribution<double> z(0, 1);
  auto mean_width = [&](std::size_t n) {
    double s = 0;
    for (int rep = 0; rep < 2000; ++rep) {
      std::vector<double> v(n);
      for (auto& x : v) x = z(r);
      s += *aggregate_ci(v).half_width;
    }
    return s / 2000;
  };
  const double w25 = mean_width(25), w100 = mean_width(100);
  EXPECT_NEAR(w25 / w100, 2.0, 0.05);
}

TEST(MetricOracles, RunFast) {
  const auto start = std::chrono::steady_clock::now();
  for (int k = 0; k < 1000; ++k) {
    ndcg_at_k({entries({2, 3, 1}, {5, 4, 3})}, 3);
    gini(std::vector<double>{0, 0, 0, 4});
    spearman(std::vector<double>{1, 2, 3}, std::vector<double>{1, 3, 2});
    rmse(std::vector<double>{1, 5}, std::vector<double>{5, 1});
  }
  EXPECT_LT(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), 1.0);
}
