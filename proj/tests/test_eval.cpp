#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "advil/eval.hpp"
#include "advil/metrics.hpp"
#include "support.hpp"

namespace advil {
namespace {

TEST(McValue, DeterministicOneStepIsExact) {
  WeightVec w(2);
  w << 3.0, 0.0;
  const LinearBandit env(Mat::Identity(2, 2), w);
  const DeterministicPolicy pi(2, [](const State&, int) { return 0; });
  const Estimate e = mc_value(env, pi, HorizonSpec::finite(1), 50, 1);
  EXPECT_EQ(e.mean, 3.0);
  EXPECT_EQ(e.stderr_, 0.0);
}

TEST(McValue, SingleStateGeometricSeries) {
  const auto env = TabularEnv::single_state(1.0);
  const Estimate e = mc_value(*env, UniformPolicy(1), HorizonSpec::discounted(0.5, 200), 100000, 3);
  EXPECT_GT(e.stderr_, 0.0);
  EXPECT_NEAR(e.mean, 2.0, 3.0 * e.stderr_);
}

TEST(McValue, TabularMatchesExactValue) {
  const auto env = test::random_tabular(4, 2, 2, 6);
  const TabularOracle oracle(env);
  Rng rng(1);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const double gamma = 0.8;
  const Estimate e = mc_value(*env, TablePolicy(pi), HorizonSpec::discounted(gamma), 20000, 2);
  EXPECT_NEAR(e.mean, oracle.initial_value(pi, env->cost_table(), gamma), 3.0 * e.stderr_);
}

TEST(McValueProperty, BiasWithinFourStandardErrors) {
  const auto env = test::random_tabular(4, 2, 2, 13);
  const TabularOracle oracle(env);
  Rng rng(5);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const double gamma = 0.7;
  const double exact = oracle.initial_value(pi, env->cost_table(), gamma);
  int within = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const Estimate e = mc_value(*env, TablePolicy(pi), HorizonSpec::discounted(gamma), 500, derive_seed(4, "trial", t));
    if (std::abs(e.mean - exact) <= 4.0 * e.stderr_) ++within;
  }
  EXPECT_GE(within, 95);
}

TEST(McValue, GeometricAndFixedHorizonAgree) {
  const auto env = test::random_tabular(4, 2, 2, 17);
  const TabularOracle oracle(env);
  Rng rng(9);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const double gamma = 0.9;
  const HorizonSpec h = HorizonSpec::discounted(gamma, 300);
  const Estimate geo = mc_value(*env, TablePolicy(pi), h, 20000, 1, {}, McEstimator::geometric);
  const Estimate fixed = mc_value(*env, TablePolicy(pi), h, 20000, 2, {}, McEstimator::fixed_horizon);
  const double tol = 4.0 * std::hypot(geo.stderr_, fixed.stderr_);
  EXPECT_NEAR(geo.mean, fixed.mean, tol);
  const double exact = oracle.initial_value(pi, env->cost_table(), gamma);
  EXPECT_NEAR(fixed.mean, exact, 4.0 * fixed.stderr_);
}

TEST(McValue, CustomCostAndPairing) {
  const auto env = test::random_tabular(3, 2, 2, 2);
  const kernels::CostFn one = [](const State&, int) { return 1.0; };
  const Estimate a = mc_value(*env, UniformPolicy(2), HorizonSpec::finite(7), 10, 4, one);
  EXPECT_DOUBLE_EQ(a.mean, 7.0);
  const Estimate b = mc_value(*env, UniformPolicy(2), HorizonSpec::finite(7), 10, 4);
  const Estimate c = mc_value(*env, UniformPolicy(2), HorizonSpec::finite(7), 10, 4);
  EXPECT_EQ(b.mean, c.mean);
  EXPECT_THROW(mc_value(*env, UniformPolicy(2), HorizonSpec::finite(7), 0, 4), InvalidInput);
}

TEST(NormalizedReturn, Examples) {
  EXPECT_DOUBLE_EQ(normalized_return(-2.0, -2.0, -5.0), 1.0);
  EXPECT_DOUBLE_EQ(normalized_return(-5.0, -2.0, -5.0), 0.0);
  EXPECT_DOUBLE_EQ(normalized_return(-3.5, -2.0, -5.0), 0.5);
  EXPECT_THROW(normalized_return(1.0, 2.0, 2.0), InvalidInput);
}

TEST(NormalizedReturnProperty, ShiftInvariant) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.normal(), b = rng.normal(), c = b + 0.5 + rng.uniform();
    const double shift = 10.0 * rng.normal();
    EXPECT_NEAR(normalized_return(a + shift, b + shift, c + shift), normalized_return(a, b, c), 1e-12);
  }
}

TEST(LoglogSlope, Examples) {
  const std::vector<std::pair<double, double>> linear{{1, 1}, {10, 10}};
  const std::vector<std::pair<double, double>> three_quarters{{1, 1}, {16, 8}};
  const std::vector<std::pair<double, double>> flat{{1, 2}, {4, 2}, {16, 2}};
  EXPECT_NEAR(loglog_slope(linear), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope(three_quarters), 0.75, 1e-12);
  EXPECT_NEAR(loglog_slope(flat), 0.0, 1e-12);
  const std::vector<std::pair<double, double>> bad{{1, 1}, {2, -1}};
  const std::vector<std::pair<double, double>> single{{1, 1}};
  EXPECT_THROW(loglog_slope(bad), InvalidInput);
  EXPECT_THROW(loglog_slope(single), InvalidInput);
}

std::shared_ptr<TabularEnv> two_arm_bandit() {
  Mat c(1, 2);
  c << 0.0, 1.0;
  return std::make_shared<TabularEnv>(1, 2, Mat::Ones(2, 1), c, Vec::Ones(1));
}

TEST(ExactRegret, ComparatorSequenceHasZeroRegret) {
  const auto env = test::random_tabular(3, 2, 2, 4);
  const TabularOracle oracle(env);
  Rng rng(2);
  const Mat pi = test::random_policy_table(3, 2, rng);
  const std::vector<PolicyPtr> seq(5, std::make_shared<TablePolicy>(pi));
  const CostStream costs = CostStream::random_walk(test::random_unit_ball(6, rng), 0.3, 5, 2, 1);
  const RegretTrace r = exact_regret_finite(oracle, seq, costs, {pi, pi}, 2);
  EXPECT_NEAR(r.total(), 0.0, 1e-12);
}

TEST(ExactRegret, BanditWrongArmAccumulatesOnePerRound) {
  const auto env = two_arm_bandit();
  const TabularOracle oracle(env);
  Mat bad(1, 2), good(1, 2);
  bad << 0, 1;
  good << 1, 0;
  const int K = 17;
  const std::vector<PolicyPtr> seq(K, std::make_shared<TablePolicy>(bad));
  const CostStream costs = CostStream::fixed(*env->true_cost_weights(), K);
  const RegretTrace r = exact_regret_finite(oracle, seq, costs, {good}, 1);
  EXPECT_NEAR(r.total(), K, 1e-12);
  ASSERT_EQ(r.cumulative.size(), static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) EXPECT_NEAR(r.cumulative[static_cast<std::size_t>(k)], k + 1.0, 1e-12);
}

TEST(ExactRegret, MixedSequenceEqualsSumOfValueGaps) {
  const auto env = test::random_tabular(4, 3, 2, 8);
  const TabularOracle oracle(env);
  Rng rng(11);
  const int H = 3, K = 6;
  const CostStream costs = CostStream::random_walk(test::random_unit_ball(12, rng), 0.4, K, H, 3);
  std::vector<PolicyPtr> seq;
  std::vector<std::vector<Mat>> tables;
  for (int k = 0; k < K; ++k) {
    std::vector<Mat> t;
    for (int h = 0; h < H; ++h) t.push_back(test::random_policy_table(4, 3, rng));
    seq.push_back(std::make_shared<TablePolicy>(t));
    tables.push_back(t);
  }
  std::vector<Mat> comparator;
  for (int h = 0; h < H; ++h) comparator.push_back(test::random_policy_table(4, 3, rng));
  const RegretTrace r = exact_regret_finite(oracle, seq, costs, comparator, H);
  double expected = 0.0;
  for (int k = 0; k < K; ++k) {
    std::vector<Mat> c;
    for (int h = 0; h < H; ++h) c.push_back(oracle.cost_from_weights(costs.weights(k, h)));
    const double gap =
        oracle.initial_value_finite(tables[static_cast<std::size_t>(k)], c) - oracle.initial_value_finite(comparator, c);
    EXPECT_NEAR(r.per_round[static_cast<std::size_t>(k)], gap, 1e-12);
    expected += gap;
  }
  EXPECT_NEAR(r.total(), expected, 1e-10);
}

TEST(ExactRegret, DiscountedMatchesValueGaps) {
  const auto env = test::random_tabular(4, 2, 2, 9);
  const TabularOracle oracle(env);
  Rng rng(12);
  const double gamma = 0.85;
  const int K = 5;
  const CostStream costs = CostStream::random_walk(test::random_unit_ball(8, rng), 0.4, K, 1, 5);
  std::vector<PolicyPtr> seq;
  std::vector<Mat> tables;
  for (int k = 0; k < K; ++k) {
    tables.push_back(test::random_policy_table(4, 2, rng));
    seq.push_back(std::make_shared<TablePolicy>(tables.back()));
  }
  const Mat comparator = test::random_policy_table(4, 2, rng);
  const RegretTrace r = exact_regret_discounted(oracle, seq, costs, comparator, gamma);
  for (int k = 0; k < K; ++k) {
    const Mat c = oracle.cost_from_weights(costs.weights(k));
    EXPECT_NEAR(r.per_round[static_cast<std::size_t>(k)],
                oracle.initial_value(tables[static_cast<std::size_t>(k)], c, gamma) - oracle.initial_value(comparator, c, gamma),
                1e-12);
  }
}

TEST(ExactRegretProperty, NonNegativeAgainstPerRoundOptimum) {
  const auto env = test::random_tabular(5, 3, 3, 21);
  const TabularOracle oracle(env);
  Rng rng(13);
  const int H = 3;
  for (int k = 0; k < 30; ++k) {
    std::vector<WeightVec> stage_w;
    for (int h = 0; h < H; ++h) stage_w.push_back(test::random_unit_ball(15, rng));
    const CostStream one = CostStream::scripted({stage_w});
    std::vector<Mat> costs;
    for (const WeightVec& w : stage_w) costs.push_back(oracle.cost_from_weights(w));
    std::vector<Mat> pis;
    for (int h = 0; h < H; ++h) pis.push_back(test::random_policy_table(5, 3, rng));
    const std::vector<PolicyPtr> seq{std::make_shared<TablePolicy>(pis)};
    EXPECT_GE(exact_regret_finite(oracle, seq, one, oracle.optimal_policy_finite(costs), H).per_round[0], -1e-8);

    const CostStream flat = CostStream::scripted({{stage_w[0]}});
    const std::vector<PolicyPtr> stationary{std::make_shared<TablePolicy>(pis[0])};
    EXPECT_GE(exact_regret_discounted(oracle, stationary, flat, oracle.optimal_policy(costs[0], 0.9), 0.9).per_round[0],
              -1e-8);
  }
}

TEST(BestFixed, BeatsEveryDeterministicPolicy) {
  const auto env = test::random_tabular(2, 2, 2, 30);
  const TabularOracle oracle(env);
  Rng rng(14);
  const int H = 2, K = 8;
  const CostStream costs = CostStream::random_walk(test::random_unit_ball(4, rng), 0.5, K, H, 6);
  const auto best = best_fixed_finite(oracle, costs, K, H);
  auto total = [&](const std::vector<Mat>& pis) {
    double v = 0.0;
    for (int k = 0; k < K; ++k) v += oracle.initial_value_finite(pis, stage_costs(oracle, costs, k, H));
    return v;
  };
  const double best_total = total(best);
  for (int code = 0; code < 16; ++code) {
    std::vector<Mat> pis(H, Mat::Zero(2, 2));
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < 2; ++s) pis[static_cast<std::size_t>(h)](s, (code >> (h * 2 + s)) & 1) = 1.0;
    EXPECT_LE(best_total, total(pis) + 1e-10);
  }
}

TEST(MetricTrace, CsvSchemaAndOrdering) {
  MetricTrace t;
  t.add(0, "a", 1.5);
  t.add(0, "b", 0.1, 0.25);
  t.add(3, "a", -2.0);
  EXPECT_EQ(t.to_csv(), "round,metric,value,stderr\n0,a,1.5,0\n0,b,0.1,0.25\n3,a,-2,0\n");
  EXPECT_THROW(t.add(2, "a", 0.0), InvalidInput);
  EXPECT_THROW(t.add(4, "a", std::nan("")), InvalidInput);
  EXPECT_EQ(t.values("a"), (std::vector<double>{1.5, -2.0}));
  EXPECT_EQ(t.rounds("a"), (std::vector<long>{0, 3}));
}

TEST(MeanStderr, Examples) {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  const Estimate e = mean_stderr(xs);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
  const std::vector<double> one{7.0};
  EXPECT_EQ(mean_stderr(one).stderr_, 0.0);
}

}  // namespace
}  // namespace advil
