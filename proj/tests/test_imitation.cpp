#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "advil/experiment.hpp"
#include "advil/imitation.hpp"
#include "support.hpp"

namespace advil {
namespace {

WeightVec v2(double a, double b) {
  WeightVec w(2);
  w << a, b;
  return w;
}

TEST(OgdCostUpdate, Examples) {
  const WeightVec w = v2(0.2, -0.1);
  EXPECT_EQ(ogd_cost_update(w, v2(0.4, 0.4), v2(0.4, 0.4), 0.7, CostSet::ball), w);
  EXPECT_TRUE(ogd_cost_update(v2(0, 0), v2(1, 0), v2(0, 0), 0.5, CostSet::ball).isApprox(v2(-0.5, 0)));
  EXPECT_TRUE(ogd_cost_update(v2(1, 0), v2(-1, 0), v2(0, 0), 1.0, CostSet::ball).isApprox(v2(1, 0)));
}

TEST(OgdCostUpdate, BoxVariantClamps) {
  EXPECT_TRUE(ogd_cost_update(v2(0.5, 0.5), v2(1, -1), v2(0, 0), 1.0, CostSet::box).isApprox(v2(0, 1)));
  EXPECT_TRUE(ogd_cost_update(v2(0.5, 0.5), v2(0.1, -0.2), v2(0, 0), 1.0, CostSet::box).isApprox(v2(0.4, 0.7)));
}

TEST(OgdProperty, RegretWithinBound) {
  const int K = 400;
  const double alpha = 1.0 / (2.0 * std::sqrt(static_cast<double>(K)));
  const double bound = 1.0 / (2.0 * alpha) + 2.0 * alpha * K;
  for (int seq = 0; seq < 6; ++seq) {
    Rng rng(derive_seed(55, "sequence", static_cast<std::uint64_t>(seq)));
    WeightVec w = WeightVec::Zero(2), total = WeightVec::Zero(2);
    double learner = 0.0;
    for (int k = 0; k < K; ++k) {
      const FeatVec e = test::random_unit_ball(2, rng), l = test::random_unit_ball(2, rng);
      learner += w.dot(e - l);
      total += e - l;
      w = ogd_cost_update(w, e, l, alpha, CostSet::ball);
      ASSERT_LE(w.norm(), 1.0 + 1e-12);
    }
    double best = 1e300;
    for (int i = -100; i <= 100; ++i)
      for (int j = -100; j <= 100; ++j) {
        const WeightVec u = v2(0.01 * i, 0.01 * j);
        if (u.norm() <= 1.0) best = std::min(best, u.dot(total));
      }
    EXPECT_LE(learner - best, bound) << "sequence " << seq;
  }
}

TEST(EstimateLearnerFeat, Examples) {
  const auto env = test::random_tabular(3, 2, 2, 1);
  Transition a, b;
  a.state.id = 1;
  a.action = 1;
  b.state.id = 2;
  b.action = 0;
  const std::vector<Transition> one{a}, two{a, b};
  EXPECT_TRUE(estimate_learner_feat(*env, one).isApprox(env->features(a.state, 1)));
  EXPECT_TRUE(estimate_learner_feat(*env, two).isApprox(0.5 * (env->features(a.state, 1) + env->features(b.state, 0))));
  EXPECT_THROW(estimate_learner_feat(*env, std::vector<Transition>{}), InvalidInput);
}

TEST(EstimateLearnerFeat, MatchesExactOccupancy) {
  const auto env = test::random_tabular(4, 2, 2, 3);
  const TabularOracle oracle(env);
  Rng rng(2);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const double gamma = 0.8;
  const auto samples = kernels::occupancy_samples(*env, TablePolicy(pi), gamma, 200, 100000, 4);
  const FeatVec exact = oracle.feature_expectation(oracle.occupancy(pi, gamma));
  EXPECT_LE((estimate_learner_feat(*env, samples) - exact).lpNorm<Eigen::Infinity>(), 0.01);
}

ExpertDataset discounted_expert(const std::shared_ptr<TabularEnv>& env, double gamma, int n) {
  Rng rng(8);
  const TablePolicy expert(test::random_policy_table(env->num_states(), env->num_actions(), rng));
  return collect_expert_dataset(*env, expert, n, HorizonSpec::discounted(gamma), 12);
}

TEST(Ilarl, SmallestInstanceRuns) {
  const auto env = test::random_tabular(3, 2, 2, 4);
  IlarlOptions o;
  o.rounds = 1;
  o.tau = 1;
  o.alpha = 0.3;
  const RunResult r = ilarl_run(env, discounted_expert(env, 0.9, 5), o, 1);
  EXPECT_EQ(r.rounds(), 1);
  EXPECT_EQ(r.round_weights.size(), 1u);
  EXPECT_EQ(r.trajectories, 1);
  EXPECT_EQ(r.output_index, 0);
}

TEST(Ilarl, DeterministicAndValidated) {
  const auto env = test::random_tabular(3, 2, 2, 4);
  const ExpertDataset ds = discounted_expert(env, 0.9, 5);
  IlarlOptions o;
  o.rounds = 30;
  o.tau = 5;
  o.alpha = 0.2;
  const RunResult a = ilarl_run(env, ds, o, 6), b = ilarl_run(env, ds, o, 6);
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
  EXPECT_EQ(a.output_index, b.output_index);
  for (std::size_t k = 0; k < a.round_weights.size(); ++k) EXPECT_EQ(a.round_weights[k][0], b.round_weights[k][0]);
  o.tau = 31;
  EXPECT_THROW(ilarl_run(env, ds, o, 6), InvalidInput);
}

TEST(IlarlProperty, WeightsStayInBall) {
  const auto env = test::random_tabular(4, 3, 2, 5);
  IlarlOptions o;
  o.rounds = 100;
  o.tau = 5;
  o.alpha = 2.0;
  const RunResult r = ilarl_run(env, discounted_expert(env, 0.9, 10), o, 2);
  for (const auto& w : r.round_weights) EXPECT_LE(w[0].norm(), 1.0 + 1e-12);
}

TEST(Brig, SingleRoundGreedyStageMatchesReconstruction) {
  Rng rng(3);
  auto env = std::make_shared<LinearBandit>(LinearBandit::gaussian_features(5, 3, rng), WeightVec::Zero(3));
  const DeterministicPolicy expert(5, [](const State&, int) { return 2; });
  const ExpertDataset ds = collect_expert_dataset(*env, expert, 4, HorizonSpec::finite(1), 1);
  BrigOptions o;
  o.rounds = 2;
  o.horizon = 1;
  o.beta = 0.5;
  o.alpha = 0.7;
  const RunResult r = brig_run(env, ds, o, 9);
  ASSERT_EQ(r.rounds(), 2);

  Rng episode(derive_seed(9, "episode", 0));
  const Trajectory first = sample_episode_finite(*env, UniformPolicy(5), 1, episode);
  const FeatVec phi0 = env->features(first.steps[0].state, first.steps[0].action);
  const WeightVec w2 = project_box(-o.alpha * (env->features({}, 2) - phi0), 0.0, 1.0);
  EXPECT_TRUE(r.round_weights[1][0].isApprox(w2));
  const Mat lambda = Mat::Identity(3, 3) + phi0 * phi0.transpose();
  std::vector<double> q(5);
  for (int a = 0; a < 5; ++a) {
    const FeatVec phi = env->features({}, a);
    q[static_cast<std::size_t>(a)] =
        std::clamp(phi.dot(w2) - o.beta * std::sqrt(phi.dot(lambda.ldlt().solve(phi))), -1.0, 1.0);
  }
  const auto p = r.round_policies[1]->distribution({}, 0);
  EXPECT_DOUBLE_EQ(p[static_cast<std::size_t>(argmin_lowest(q))], 1.0);
}

TEST(Brig, DeterministicAndBoxConstrained) {
  const auto env = test::random_tabular(3, 2, 2, 7);
  Rng rng(1);
  const TablePolicy expert(test::random_policy_table(3, 2, rng));
  const ExpertDataset ds = collect_expert_dataset(*env, expert, 8, HorizonSpec::finite(3), 2);
  BrigOptions o;
  o.rounds = 40;
  o.horizon = 3;
  o.alpha = 0.5;
  const RunResult a = brig_run(env, ds, o, 4), b = brig_run(env, ds, o, 4);
  EXPECT_EQ(a.trace.to_csv(), b.trace.to_csv());
  for (std::size_t k = 0; k < a.round_weights.size(); ++k)
    for (std::size_t h = 0; h < 3; ++h) {
      EXPECT_EQ(a.round_weights[k][h], b.round_weights[k][h]);
      EXPECT_GE(a.round_weights[k][h].minCoeff(), 0.0);
      EXPECT_LE(a.round_weights[k][h].maxCoeff(), 1.0);
    }
  EXPECT_THROW(brig_run(env, discounted_expert(env, 0.9, 2), o, 4), InvalidInput);
}

TEST(Schedule, Examples) {
  ScheduleInputs in;
  in.rounds = 8;
  in.dim = 4;
  in.gamma = 0.9;
  in.num_actions = 2;
  EXPECT_DOUBLE_EQ(schedule_from_theorems(Theorem::thm5, in).alpha, 0.25);

  ScheduleInputs br;
  br.rounds = 2;
  br.dim = 2;
  br.horizon = 3;
  EXPECT_DOUBLE_EQ(schedule_from_theorems(Theorem::thmBR, br).alpha, 0.5);

  ScheduleInputs conc;
  conc.dim = 2;
  conc.delta = 1.0;
  conc.epsilon = 1.0;
  const ScheduleParams p = schedule_from_theorems(Theorem::expert_conc, conc);
  EXPECT_EQ(p.n_expert, static_cast<int>(std::ceil(2.0 * std::log(4.0))));
  EXPECT_EQ(p.n_expert, 3);
  EXPECT_EQ(p.formulas.count("n_expert"), 1u);
}

TEST(Schedule, FiniteRegretFormulas) {
  ScheduleInputs in;
  in.rounds = 1024;
  in.dim = 6;
  in.horizon = 3;
  in.num_actions = 2;
  in.beta_multiplier = 0.5;
  const ScheduleParams p = schedule_from_theorems(Theorem::thm3, in);
  EXPECT_DOUBLE_EQ(p.beta, 9.0);
  EXPECT_NEAR(p.tau_exact, 2.5 * 9.0 * std::sqrt(1024.0 * 6 / std::log(2.0)), 1e-9);
  EXPECT_NEAR(p.eta, std::sqrt(p.tau * std::log(2.0) / (1024.0 * 9)), 1e-12);
  EXPECT_EQ(p.tau, std::llround(p.tau_exact));
  EXPECT_EQ(p.formulas.size(), 3u);
}

TEST(Schedule, InvalidInputsRejected) {
  ScheduleInputs in;
  EXPECT_THROW(schedule_from_theorems(Theorem::thm3, in), InvalidInput);
  in.rounds = 10;
  in.dim = 2;
  in.horizon = 2;
  in.num_actions = 1;
  EXPECT_THROW(schedule_from_theorems(Theorem::thm3, in), InvalidInput);
  in.num_actions = 2;
  in.gamma = 1.0;
  EXPECT_THROW(schedule_from_theorems(Theorem::thm4, in), InvalidInput);
  EXPECT_THROW(parse_theorem("thm9"), InvalidInput);
  for (Theorem t : {Theorem::thm3, Theorem::thm4, Theorem::thm5, Theorem::thmBR, Theorem::expert_conc})
    EXPECT_EQ(parse_theorem(theorem_name(t)), t);
}

TEST(DecompositionProperty, IdentityHoldsExactly) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto env = test::random_tabular(5, 3, 3, seed);
    const TabularOracle oracle(env);
    Rng rng(seed + 50);
    const Mat pi = test::random_policy_table(5, 3, rng);
    const Mat pe = test::random_policy_table(5, 3, rng);
    const WeightVec w = test::random_unit_ball(15, rng);
    const WeightVec w_true = *env->true_cost_weights();
    const double gamma = 0.9;
    const DecompositionTerms t = regret_decomposition(oracle, pi, pe, w, w_true, gamma);
    const double direct = (env->cost_table().array() * (oracle.occupancy(pi, gamma) - oracle.occupancy(pe, gamma)).array()).sum();
    EXPECT_NEAR(t.total, direct, 1e-10);
    EXPECT_NEAR(t.policy_term + t.cost_term, t.total, 1e-8);
  }
}

TEST(ImitationTrend, GridworldRunningAverageImproves) {
  ExperimentConfig c = preset("fig1_tauE1");
  c.eval.n_eval = 20;
  c.eval.baseline = "none";
  const ExperimentResult r = execute_experiment(c);
  const auto values = r.trace.values("normalized_return");
  const auto rounds = r.trace.rounds("normalized_return");
  ASSERT_GE(values.size(), 20u);
  std::vector<double> running(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    running[i] = sum / static_cast<double>(i + 1);
  }
  const long window = 50;
  double first = 0.0, last = 0.0;
  int n_first = 0, n_last = 0;
  for (std::size_t i = 0; i < running.size(); ++i) {
    if (rounds[i] < rounds.front() + window) {
      first += running[i];
      ++n_first;
    }
    if (rounds[i] > rounds.back() - window) {
      last += running[i];
      ++n_last;
    }
  }
  EXPECT_GE(last / n_last, first / n_first + 0.3);
}

}  // namespace
}  // namespace advil
