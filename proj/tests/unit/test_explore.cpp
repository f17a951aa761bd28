#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include "gen.hpp"
#include "reclab/explore.hpp"

using namespace reclab;

namespace {

double frequency_of(std::size_t target, int n, auto&& draw) {
  int hits = 0;
  for (int k = 0; k < n; ++k) hits += draw() == target;
  return hits / double(n);
}

}  // namespace

TEST(EpsilonGreedy, ZeroEpsilonIsGreedy) {
  Rng r = RngSeed{1, {}}.stream();
  const std::vector<double> s = {1, 3, 3, 2};
  for (int k = 0; k < 100; ++k) EXPECT_EQ(epsilon_greedy_select(s, 0.0, r), 1u);
}

TEST(EpsilonGreedy, FullEpsilonIsUniform) {
  const std::vector<double> s = {1, 3, 2, 0};
  for (double p : epsilon_greedy_probabilities(s, 1.0)) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(EpsilonGreedy, ArgmaxFrequencyMatchesClosedForm) {
  const std::vector<double> s = {1, 2, 3, 4, 9, 5, 6, 7, 8, 0};
  EXPECT_NEAR(epsilon_greedy_probabilities(s, 0.2)[4], 0.82, 1e-15);
  Rng r = RngSeed{2, {}}.stream();
  EXPECT_NEAR(frequency_of(4, 100000, [&] { return epsilon_greedy_select(s, 0.2, r); }), 0.82, 0.005);
}

TEST(EpsilonGreedy, RejectsEpsilonOutsideUnitInterval) {
  Rng r = RngSeed{2, {}}.stream();
  const std::vector<double> s = {1, 2};
  EXPECT_THROW(epsilon_greedy_select(s, 1.5, r), ContractError);
  EXPECT_THROW(epsilon_greedy_probabilities(s, -0.1), ContractError);
  EXPECT_THROW(ExplorationPolicy::epsilon_greedy(2.0), ContractError);
}

TEST(PowerSampling, Examples) {
  const std::vector<double> equal(5, 3.7);
  for (double p : power_probabilities(equal, 8, 0.01)) EXPECT_NEAR(p, 0.2, 1e-15);
  const std::vector<double> s = {4, 2};
  auto p1 = power_probabilities(s, 1, 0.01);
  EXPECT_NEAR(p1[0], 2.0 / 3, 1e-15);
  EXPECT_NEAR(p1[1], 1.0 / 3, 1e-15);
  EXPECT_NEAR(power_probabilities(s, 20, 0.01)[0], 1 / (1 + std::pow(2.0, -20)), 1e-15);
  EXPECT_NEAR(power_probabilities(s, 20, 0.01)[0], 0.99999905, 1e-8);
}

TEST(PowerSampling, EmpiricalFrequenciesMatch) {
  const std::vector<double> s = {4, 2};
  Rng r = RngSeed{3, {}}.stream();
  EXPECT_NEAR(frequency_of(0, 100000, [&] { return power_sample_select(s, 1, 0.01, r); }), 2.0 / 3, 0.005);
}

TEST(PowerSampling, FloorHandlesNonPositiveScores) {
  const std::vector<double> s = {-3, 0, 0.01};
  const auto p = power_probabilities(s, 2, 0.01);
  for (double x : p) EXPECT_NEAR(x, 1.0 / 3, 1e-15);
}

TEST(SelectionDistributions, ProperOnArbitraryScoresProperty) {
  auto r = gen::rng(60);
  for (int round = 0; round < 500; ++round) {
    const auto n = gen::size(r, 1, 40);
    const auto s = gen::reals(r, n, -2, 6);
    const double eps = gen::real(r, 0, 1), pw = gen::real(r, 0.1, 30);
    for (const auto& p : {epsilon_greedy_probabilities(s, eps), power_probabilities(s, pw, 0.01)}) {
      double total = 0;
      for (double x : p) {
        EXPECT_GE(x, 0.0);
        total += x;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(PowerSampling, MonotoneInScoreProperty) {
  auto r = gen::rng(61);
  for (int round = 0; round < 300; ++round) {
    const auto s = gen::reals(r, gen::size(r, 2, 20), 0.01, 5);
    const auto p = power_probabilities(s, gen::real(r, 0.5, 20), 0.01);
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        if (s[i] > s[j] && p[j] > 0) EXPECT_GT(p[i], p[j]);
  }
}

TEST(EpsilonGreedy, ArgmaxProbabilityDecreasesInEpsilonProperty) {
  auto r = gen::rng(62);
  for (int round = 0; round < 100; ++round) {
    const auto s = gen::reals(r, gen::size(r, 2, 20), 1, 5);
    const std::size_t best = argmax_lowest(s);
    double prev = 2;
    for (double eps = 0; eps <= 1.0; eps += 0.05) {
      const double p = epsilon_greedy_probabilities(s, eps)[best];
      EXPECT_LT(p, prev);
      prev = p;
    }
  }
}

TEST(PowerSampling, ArgmaxProbabilityGrowsWithPower) {
  auto r = gen::rng(63);
  for (int round = 0; round < 100; ++round) {
    const auto s = gen::reals(r, gen::size(r, 2, 20), 0.5, 5);
    const std::size_t best = argmax_lowest(s);
    double prev = 0;
    for (double p : {1.0, 8.0, 20.0}) {
      const double now = power_probabilities(s, p, 0.01)[best];
      EXPECT_GE(now, prev);
      prev = now;
    }
  }
}

TEST(SelectSlate, GreedyTopThree) {
  Rng r = RngSeed{4, {}}.stream();
  const std::vector<double> s = {2, 5, 1, 5, 4};
  EXPECT_EQ(select_slate(ExplorationPolicy::greedy(), s, 3, r), (std::vector<std::size_t>{1, 3, 4}));
  EXPECT_EQ(select_slate(ExplorationPolicy::greedy(), s, 9, r).size(), 5u);
  EXPECT_THROW(select_slate(ExplorationPolicy::greedy(), s, 0, r), ContractError);
}

TEST(SelectSlate, FullEpsilonGivesUniformPermutations) {
  Rng r = RngSeed{5, {}}.stream();
  const std::vector<double> s = {3, 1, 2};
  std::map<std::vector<std::size_t>, int> counts;
  const int n = 60000;
  for (int k = 0; k < n; ++k) ++counts[select_slate(ExplorationPolicy::epsilon_greedy(1.0), s, 3, r)];
  ASSERT_EQ(counts.size(), 6u);
  const double p = 1.0 / 6;
  for (const auto& [perm, c] : counts) EXPECT_NEAR(c / double(n), p, 3 * std::sqrt(p * (1 - p) / n));
}

TEST(SelectSlate, PowerSlateOfTwoMatchesEnumeration) {
  const std::vector<double> s = {4, 2, 3};
  const double pw = 2;
  std::map<std::pair<std::size_t, std::size_t>, double> expected;
  double z = 0;
  for (double v : s) z += v * v;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) {
      if (a == b) continue;
      expected[{a, b}] = s[a] * s[a] / z * (s[b] * s[b] / (z - s[a] * s[a]));
    }
  }
  Rng r = RngSeed{6, {}}.stream();
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    const auto slate = select_slate(ExplorationPolicy::power_sampling(pw), s, 2, r);
    ASSERT_EQ(slate.size(), 2u);
    ++counts[{slate[0], slate[1]}];
  }
  for (const auto& [pair, p] : expected) {
    EXPECT_NEAR(counts[pair] / double(n), p, 3 * std::sqrt(p * (1 - p) / n)) << pair.first << "," << pair.second;
  }
}

TEST(SelectSlate, RandomSlatesHaveDistinctEntriesProperty) {
  auto r = gen::rng(64);
  for (int round = 0; round < 200; ++round) {
    const auto n = gen::size(r, 1, 25);
    const auto s = gen::reals(r, n, 0, 5);
    const auto policy = round % 2 ? ExplorationPolicy::epsilon_greedy(0.5) : ExplorationPolicy::power_sampling(8);
    const auto k = gen::size(r, 1, 30);
    auto slate = select_slate(policy, s, k, r);
    EXPECT_EQ(slate.size(), std::min(k, n));
    std::sort(slate.begin(), slate.end());
    EXPECT_EQ(std::adjacent_find(slate.begin(), slate.end()), slate.end());
  }
}

TEST(ExplorationPolicy, ParseAndPrint) {
  for (const std::string text : {"greedy", "eps:0.1", "eps:0.2", "ts:8", "ts:20"}) {
    EXPECT_EQ(ExplorationPolicy::parse(text).to_string(), text);
  }
  EXPECT_EQ(ExplorationPolicy::parse("eps:0.2").kind, ExplorationPolicy::Kind::epsilon_greedy);
  EXPECT_THROW(ExplorationPolicy::parse("ucb"), ContractError);
  EXPECT_THROW(ExplorationPolicy::parse("eps:"), ContractError);
  EXPECT_THROW(ExplorationPolicy::parse("ts:-1"), ContractError);
}
