#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "advil/eval.hpp"
#include "advil/expert.hpp"
#include "support.hpp"

namespace advil {
namespace {

Transition step_at(int s, int a, int next = 0, int stage = 0) {
  Transition t;
  t.state.id = s;
  t.action = a;
  t.next.id = next;
  t.stage = stage;
  return t;
}

ExpertDataset dataset_of(std::vector<Trajectory> trajs, HorizonSpec h = HorizonSpec::discounted(0.5)) {
  ExpertDataset ds;
  ds.trajectories = std::move(trajs);
  ds.horizon = h;
  return ds;
}

TEST(ExpertTraining, BanditSelectsCheapestAction) {
  Rng rng(4);
  WeightVec w(3);
  w << 0.2, -0.6, 0.1;
  auto env = std::make_shared<LinearBandit>(Mat::Identity(3, 3), w);
  ExpertTraining opt;
  opt.horizon = 1;
  opt.episodes = 200;
  const auto policy = train_expert_lsvi_ucb(env, opt, 1);
  EXPECT_EQ(policy->action({}, 0), 1);
}

TEST(ExpertTraining, TabularValueNearOptimum) {
  const auto env = test::random_tabular(4, 2, 2, 12);
  const TabularOracle oracle(env);
  const int H = 5;
  ExpertTraining opt;
  opt.horizon = H;
  opt.episodes = 2000;
  opt.beta = 8.0;
  opt.final_beta = 0.0;
  const auto policy = train_expert_lsvi_ucb(env, opt, 3);
  const std::vector<Mat> costs(H, env->cost_table());
  const double best = oracle.initial_value_finite(oracle.optimal_policy_finite(costs), costs);
  const double got = oracle.initial_value_finite(oracle.policy_tables(*policy, H), costs);
  EXPECT_LE(got - best, 0.05 * H);
}

TEST(ExpertTraining, SingleEpisodeGivesDeterministicPolicy) {
  const auto env = test::random_tabular(3, 2, 2, 1);
  ExpertTraining opt;
  opt.horizon = 3;
  opt.episodes = 1;
  const auto policy = train_expert_lsvi_ucb(env, opt, 0);
  for (int s = 0; s < 3; ++s)
    for (int h = 0; h < 3; ++h) {
      const auto p = policy->distribution(State{0, 0, s}, h);
      EXPECT_DOUBLE_EQ(*std::max_element(p.begin(), p.end()), 1.0);
    }
}

TEST(StochasticExpert, MixtureEndpoints) {
  auto det = std::make_shared<DeterministicPolicy>(4, [](const State&, int) { return 2; });
  const auto p0 = make_stochastic_expert(det, 0.0)->distribution({}, 0);
  EXPECT_EQ(p0, det->distribution({}, 0));
  for (double p : make_stochastic_expert(det, 1.0)->distribution({}, 0)) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_DOUBLE_EQ(make_stochastic_expert(det, 0.5)->distribution({}, 0)[2], 0.625);
}

TEST(StochasticExpertProperty, FrequenciesMatchMixtureLaw) {
  auto det = std::make_shared<DeterministicPolicy>(4, [](const State&, int) { return 2; });
  const auto mix = make_stochastic_expert(det, 0.5);
  Rng rng(10);
  std::vector<double> freq(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) freq[static_cast<std::size_t>(mix->sample({}, 0, rng))] += 1.0 / n;
  for (int a = 0; a < 4; ++a) EXPECT_NEAR(freq[static_cast<std::size_t>(a)], a == 2 ? 0.625 : 0.125, 0.01);
}

TEST(Dataset, Examples) {
  const auto env = test::random_tabular(4, 2, 2, 3);
  const UniformPolicy pi(2);
  EXPECT_EQ(collect_expert_dataset(*env, pi, 1, HorizonSpec::finite(4), 0).size(), 1u);
  const ExpertDataset zero = collect_expert_dataset(*env, pi, 50, HorizonSpec::discounted(0.0), 0);
  for (const Trajectory& t : zero.trajectories) EXPECT_EQ(t.size(), 1u);
  const ExpertDataset a = collect_expert_dataset(*env, pi, 20, HorizonSpec::discounted(0.9), 5);
  const ExpertDataset b = collect_expert_dataset(*env, pi, 20, HorizonSpec::discounted(0.9), 5);
  std::ostringstream sa, sb;
  write_dataset(sa, a);
  write_dataset(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_THROW(collect_expert_dataset(*env, pi, 0, HorizonSpec::finite(4), 0), InvalidInput);
}

TEST(Dataset, SerializationRoundTrip) {
  const Gridworld env;
  const UniformPolicy pi(4);
  for (const HorizonSpec& h : {HorizonSpec::finite(7), HorizonSpec::discounted(0.8), HorizonSpec::truncated(0.9, 12)}) {
    const ExpertDataset ds = collect_expert_dataset(env, pi, 5, h, 9);
    std::stringstream buf;
    write_dataset(buf, ds);
    const ExpertDataset back = read_dataset(buf);
    ASSERT_EQ(back.size(), ds.size());
    EXPECT_EQ(back.horizon.mode, h.mode);
    EXPECT_EQ(back.horizon.restart, h.restart);
    EXPECT_EQ(back.horizon.max_len, h.max_len);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      ASSERT_EQ(back.trajectories[i].size(), ds.trajectories[i].size());
      for (std::size_t j = 0; j < ds.trajectories[i].size(); ++j) {
        const Transition& x = ds.trajectories[i].steps[j];
        const Transition& y = back.trajectories[i].steps[j];
        EXPECT_EQ(x.state, y.state);
        EXPECT_EQ(x.next, y.next);
        EXPECT_EQ(x.action, y.action);
        EXPECT_EQ(x.stage, y.stage);
        EXPECT_EQ(x.cost, y.cost);
      }
    }
  }
}

TEST(Dataset, MalformedInputRejected) {
  std::istringstream missing_header("1,2,3\n");
  EXPECT_THROW(read_dataset(missing_header), InvalidInput);
  std::istringstream bad_number(std::string("# horizon finite 1\n") + kDatasetHeader + "\n0,0,x,0,0,0,0,0,0,0\n");
  EXPECT_THROW(read_dataset(bad_number), InvalidInput);
  EXPECT_THROW(load_dataset("/nonexistent/dataset.csv"), InvalidInput);
}

TEST(FeatExpDiscounted, SingleStepAtHalfDiscount) {
  const auto env = test::random_tabular(2, 2, 1, 0);
  Trajectory t;
  t.steps.push_back(step_at(1, 0));
  const std::vector<Trajectory> trajs{t};
  const FeatVec est = feat_exp_discounted(*env, trajs, 0.5);
  EXPECT_TRUE(est.isApprox(0.5 * env->features(State{0, 0, 1}, 0)));
}

TEST(FeatExpDiscounted, ZeroDiscountAveragesFirstSteps) {
  const auto env = test::random_tabular(3, 2, 1, 0);
  Trajectory a, b;
  a.steps = {step_at(0, 1), step_at(2, 0)};
  b.steps = {step_at(1, 1)};
  const std::vector<Trajectory> trajs{a, b};
  const FeatVec expected = 0.5 * (env->features(State{0, 0, 0}, 1) + env->features(State{0, 0, 1}, 1));
  EXPECT_TRUE(feat_exp_discounted(*env, trajs, 0.0).isApprox(expected));
}

TEST(FeatExpDiscounted, SelfLoopConvergesToFeature) {
  const auto env = TabularEnv::single_state(0.5);
  const ExpertDataset ds = collect_expert_dataset(*env, UniformPolicy(1), 200, HorizonSpec::truncated(0.9, 400), 1);
  EXPECT_NEAR(feat_exp_discounted(*env, ds, 0.9)[0], 1.0, 1e-12 + std::pow(0.9, 400));
}

TEST(FeatExpDiscounted, EmptyDatasetRejected) {
  const auto env = TabularEnv::single_state(0.5);
  EXPECT_THROW(feat_exp_discounted(*env, ExpertDataset{}, 0.9), InvalidInput);
  EXPECT_THROW(feat_exp_per_stage(*env, ExpertDataset{}, 2), InvalidInput);
}

TEST(FeatExpPerStage, Examples) {
  const auto env = test::random_tabular(3, 2, 1, 0);
  Trajectory a, b;
  a.steps = {step_at(0, 1, 0, 0), step_at(2, 0, 0, 1)};
  b.steps = {step_at(1, 0, 0, 0), step_at(1, 1, 0, 1)};
  const auto one = feat_exp_per_stage(*env, dataset_of({a}, HorizonSpec::finite(2)), 2);
  EXPECT_TRUE(one[0].isApprox(env->features(State{0, 0, 0}, 1)));
  EXPECT_TRUE(one[1].isApprox(env->features(State{0, 0, 2}, 0)));
  const auto two = feat_exp_per_stage(*env, dataset_of({a, b}, HorizonSpec::finite(1)), 1);
  EXPECT_TRUE(two[0].isApprox(0.5 * (env->features(State{0, 0, 0}, 1) + env->features(State{0, 0, 1}, 0))));
}

TEST(FeatExpPerStage, MatchesExactStageOccupancy) {
  const auto env = test::random_tabular(4, 2, 2, 8);
  const TabularOracle oracle(env);
  Rng rng(2);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const int H = 4;
  const ExpertDataset ds = collect_expert_dataset(*env, TablePolicy(pi), 10000, HorizonSpec::finite(H), 6);
  const auto est = feat_exp_per_stage(*env, ds, H);
  const auto occ = oracle.occupancy_finite(std::vector<Mat>(H, pi));
  for (int h = 0; h < H; ++h)
    EXPECT_LE((est[static_cast<std::size_t>(h)] - oracle.feature_expectation(occ[static_cast<std::size_t>(h)]))
                  .lpNorm<Eigen::Infinity>(),
              0.02);
}

double feat_exp_error(const TabularEnv& env, const TabularOracle& oracle, const Mat& pi, int n, std::uint64_t seed) {
  const double gamma = 0.8;
  const ExpertDataset ds = collect_expert_dataset(env, TablePolicy(pi), n, HorizonSpec::truncated(gamma, 60), seed);
  const FeatVec exact = oracle.feature_expectation(oracle.occupancy(pi, gamma));
  return (feat_exp_discounted(env, ds, gamma) - exact).lpNorm<Eigen::Infinity>();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return 0.5 * (v[v.size() / 2] + v[(v.size() - 1) / 2]);
}

TEST(FeatExpProperty, ErrorDecaysAsInverseSquareRoot) {
  const auto env = test::random_tabular(4, 2, 2, 15);
  const TabularOracle oracle(env);
  Rng rng(3);
  const Mat pi = test::random_policy_table(4, 2, rng);
  std::vector<double> small, large;
  for (std::uint64_t r = 0; r < 50; ++r) {
    small.push_back(feat_exp_error(*env, oracle, pi, 100, derive_seed(1, "small", r)));
    large.push_back(feat_exp_error(*env, oracle, pi, 400, derive_seed(1, "large", r)));
  }
  const double ratio = median(large) / median(small);
  EXPECT_GT(ratio, 0.3);
  EXPECT_LT(ratio, 0.7);
}

TEST(FeatExpProperty, ConcentrationSampleSizeAchievesAccuracy) {
  const double eps = 0.2, delta = 0.1, gamma = 0.9;
  const auto env = test::random_tabular(4, 2, 2, 40);
  const TabularOracle oracle(env);
  Rng rng(5);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const int d = env->feature_dim();
  const int n = static_cast<int>(std::ceil(2.0 * std::log(2.0 * d / delta) / (eps * eps)));
  const int len = static_cast<int>(std::ceil(std::log(1.0 / eps) / (1.0 - gamma)));
  const FeatVec exact = oracle.feature_expectation(oracle.occupancy(pi, gamma));
  int hits = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    const ExpertDataset ds =
        collect_expert_dataset(*env, TablePolicy(pi), n, HorizonSpec::truncated(gamma, len), derive_seed(9, "conc", r));
    if ((feat_exp_discounted(*env, ds, gamma) - exact).lpNorm<Eigen::Infinity>() <= eps) ++hits;
  }
  EXPECT_GE(hits, 180);
}

TEST(BehavioralCloning, SeparableLabelsRecovered) {
  const auto env = test::random_tabular(2, 2, 1, 0);
  Trajectory t;
  for (int i = 0; i < 10; ++i) {
    t.steps.push_back(step_at(0, 1));
    t.steps.push_back(step_at(1, 0));
  }
  const auto result = behavioral_cloning(env, dataset_of({t}), 200, 1.0);
  EXPECT_EQ(result.policy->greedy_action(State{0, 0, 0}), 1);
  EXPECT_EQ(result.policy->greedy_action(State{0, 0, 1}), 0);
}

TEST(BehavioralCloning, ConflictingLabelsStayBalanced) {
  const auto env = test::random_tabular(2, 2, 1, 0);
  Trajectory t;
  for (int i = 0; i < 10; ++i) {
    t.steps.push_back(step_at(0, 0));
    t.steps.push_back(step_at(0, 1));
  }
  const auto result = behavioral_cloning(env, dataset_of({t}), 200, 1.0);
  const auto p = result.policy->distribution(State{0, 0, 0}, 0);
  EXPECT_NEAR(p[0], 0.5, 0.05);
  EXPECT_NEAR(p[1], 0.5, 0.05);
}

TEST(BehavioralCloning, ZeroStepsGivesUniform) {
  const Gridworld grid;
  auto env = std::make_shared<Gridworld>();
  const ExpertDataset ds = collect_expert_dataset(grid, UniformPolicy(4), 3, HorizonSpec::finite(5), 0);
  const auto result = behavioral_cloning(env, ds, 0, 0.1);
  for (double p : result.policy->distribution(State{0.3, -0.2, 0}, 0)) EXPECT_DOUBLE_EQ(p, 0.25);
  EXPECT_THROW(behavioral_cloning(env, ExpertDataset{}, 5, 0.1), InvalidInput);
}

TEST(BehavioralCloningProperty, LossNonIncreasing) {
  const auto env = test::random_tabular(5, 3, 2, 19);
  Rng rng(1);
  const Mat pi = test::random_policy_table(5, 3, rng);
  const ExpertDataset ds = collect_expert_dataset(*env, TablePolicy(pi), 100, HorizonSpec::finite(6), 2);
  const auto result = behavioral_cloning(env, ds, 100, 0.2);
  for (std::size_t i = 1; i < result.loss.size(); ++i) EXPECT_LE(result.loss[i], result.loss[i - 1] + 1e-12);
}

TEST(MimicMd, AllStatesInsideReducesToCloneRollouts) {
  const auto env = test::random_tabular(3, 2, 2, 4);
  const UniformPolicy pi(2);
  const ExpertDataset held = collect_expert_dataset(*env, pi, 30, HorizonSpec::discounted(0.8), 1);
  const ExpertDataset clone = collect_expert_dataset(*env, pi, 40, HorizonSpec::discounted(0.8), 2);
  const auto inside = [](const State&) { return true; };
  EXPECT_TRUE(mimic_md_estimator(*env, held.trajectories, clone.trajectories, inside, 0.8)
                  .isApprox(feat_exp_discounted(*env, clone, 0.8)));
}

TEST(MimicMd, EmptySetReducesToHeldOut) {
  const auto env = test::random_tabular(3, 2, 2, 4);
  const UniformPolicy pi(2);
  const ExpertDataset held = collect_expert_dataset(*env, pi, 30, HorizonSpec::discounted(0.8), 1);
  const ExpertDataset clone = collect_expert_dataset(*env, pi, 40, HorizonSpec::discounted(0.8), 2);
  const auto outside = [](const State&) { return false; };
  EXPECT_TRUE(mimic_md_estimator(*env, held.trajectories, clone.trajectories, outside, 0.8)
                  .isApprox(feat_exp_discounted(*env, held, 0.8)));
  EXPECT_THROW(mimic_md_estimator(*env, {}, clone.trajectories, outside, 0.8), InvalidInput);
}

TEST(MimicMd, ExactCloneOnSetMatchesExpertOccupancy) {
  const auto env = test::random_tabular(4, 2, 2, 27);
  const TabularOracle oracle(env);
  Rng rng(6);
  const Mat pi = test::random_policy_table(4, 2, rng);
  const double gamma = 0.8;
  const HorizonSpec h = HorizonSpec::truncated(gamma, 60);
  const ExpertDataset held = collect_expert_dataset(*env, TablePolicy(pi), 20000, h, 31);
  const ExpertDataset clone = collect_expert_dataset(*env, TablePolicy(pi), 20000, h, 32);
  const auto member = [](const State& s) { return s.id != 3; };
  const FeatVec est = mimic_md_estimator(*env, held.trajectories, clone.trajectories, member, gamma);
  const FeatVec exact = oracle.feature_expectation(oracle.occupancy(pi, gamma));
  EXPECT_LE((est - exact).lpNorm<Eigen::Infinity>(), 0.05);
}

}  // namespace
}  // namespace advil
