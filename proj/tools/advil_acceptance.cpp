#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "advil/adversarial.hpp"
#include "advil/envs.hpp"
#include "advil/eval.hpp"
#include "advil/experiment.hpp"
#include "advil/expert.hpp"
#include "advil/imitation.hpp"
#include "advil/metrics.hpp"

namespace fs = std::filesystem;
using namespace advil;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

double metric_at(const MetricTrace& trace, const std::string& metric) {
  const std::vector<double> v = trace.values(metric);
  require(!v.empty(), "metric " + metric + " missing from trace");
  return v.back();
}

double diagnostic(const ExperimentResult& r, const std::string& key) {
  for (const auto& [k, v] : r.diagnostics)
    if (k == key) return v;
  throw InternalError("diagnostic " + key + " missing");
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Mat random_policy_table(int states, int actions, Rng& rng) {
  Mat pi(states, actions);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) pi(s, a) = 0.05 + rng.uniform();
    pi.row(s) /= pi.row(s).sum();
  }
  return pi;
}

WeightVec random_ball(int dim, Rng& rng) {
  WeightVec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = rng.normal();
  return w * (std::pow(rng.uniform(), 1.0 / dim) / w.norm());
}

// 1 ------------------------------------------------------------------------

Outcome optimism_sandwich() {
  struct Case {
    std::string label;
    ExperimentConfig config;
    double order;
  };
  ExperimentConfig finite = preset("optimism_check");
  const int d = finite.env.states * finite.env.actions;
  ExperimentConfig infinite = finite;
  infinite.algorithm.kind = "mdpe_infinite";
  infinite.env.gamma = 0.9;
  infinite.algorithm.rounds = 500;
  infinite.algorithm.tau = 25;
  const std::vector<Case> cases = {{"finite", finite, static_cast<double>(d * finite.env.horizon)},
                                   {"discounted", infinite, d / (1.0 - infinite.env.gamma)}};
  Outcome out{true, ""};
  for (const Case& cs : cases) {
    bool found = false;
    std::string trail;
    for (double m : {1.0, 2.0, 4.0, 8.0, 16.0}) {
      ExperimentConfig c = cs.config;
      c.algorithm.beta = m * cs.order;
      const ExperimentResult r = execute_experiment(c);
      const double v = diagnostic(r, "sandwich_violations");
      const double n = diagnostic(r, "sandwich_checked");
      trail += " beta=" + fmt(c.algorithm.beta, 0) + ":" + fmt(v, 0) + "/" + fmt(n, 0);
      if (v == 0.0 && n > 0.0) {
        found = true;
        break;
      }
    }
    out.pass = out.pass && found;
    out.detail += (out.detail.empty() ? "" : "; ") + cs.label + trail;
  }
  return out;
}

// 2 ------------------------------------------------------------------------

Outcome regret_sweep() {
  const ExperimentResult r = execute_experiment(preset("tabular_regret_sweep"));
  const std::vector<double> rates = r.trace.values("regret_per_round");
  const double slope = metric_at(r.trace, "loglog_slope");
  bool decreasing = rates.size() == 4;
  for (std::size_t i = 1; i < rates.size(); ++i) decreasing = decreasing && rates[i] < rates[i - 1];
  std::string detail = "slope " + fmt(slope) + ", regret/K";
  for (double x : rates) detail += " " + fmt(x);
  return {slope <= 0.9 && decreasing, detail};
}

// 3 ------------------------------------------------------------------------

Outcome gridworld_ilarl() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExperimentConfig c = preset("fig1_tauE1");
    c.seed = seed;
    const ExperimentResult r = execute_experiment(c);
    const double tail = metric_at(r.trace, "tail_normalized_return");
    const double bc = metric_at(r.trace, "bc_normalized_return");
    const double used = diagnostic(r, "mdp_trajectories");
    const bool ok = tail >= 0.8 && tail > bc && used <= 400.0;
    wins += ok ? 1 : 0;
    detail += (detail.empty() ? "" : ", ") + std::string("s") + std::to_string(seed) + " " + fmt(tail, 2) + " vs bc " +
              fmt(bc, 2);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds (" + detail + ")"};
}

// 4 ------------------------------------------------------------------------

Outcome bandit_brig() {
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ExperimentConfig c = preset("bandit_brig_vs_ilarl");
    c.seed = seed;
    const ExperimentResult r = execute_experiment(c);
    const double brig = metric_at(r.trace, "avg_suboptimality");
    const double ilarl = metric_at(r.trace, "ilarl_avg_suboptimality");
    wins += brig <= ilarl ? 1 : 0;
    detail += (detail.empty() ? "" : ", ") + fmt(brig, 2) + " vs " + fmt(ilarl, 2);
  }
  return {wins >= 4, std::to_string(wins) + "/5 seeds (" + detail + ")"};
}

// 5 ------------------------------------------------------------------------

Outcome ogd_bound() {
  const int K = 400;
  const double alpha = 1.0 / (2.0 * std::sqrt(static_cast<double>(K)));
  const double bound = 1.0 / (2.0 * alpha) + 2.0 * alpha * K;
  std::vector<WeightVec> grid;
  for (int i = -100; i <= 100; ++i)
    for (int j = -100; j <= 100; ++j) {
      WeightVec w(2);
      w << 0.01 * i, 0.01 * j;
      if (w.norm() <= 1.0) grid.push_back(w);
    }
  double worst = -1e300;
  for (int seq = 0; seq < 20; ++seq) {
    Rng rng(derive_seed(2024, "ogd_sequence", static_cast<std::uint64_t>(seq)));
    WeightVec w = WeightVec::Zero(2);
    WeightVec total = WeightVec::Zero(2);
    double learner = 0.0;
    double angle = 2.0 * M_PI * rng.uniform();
    for (int k = 0; k < K; ++k) {
      FeatVec expert(2), learner_feat(2);
      if (seq % 2 == 0) {
        expert = random_ball(2, rng);
        learner_feat = random_ball(2, rng);
      } else {
        angle += 0.2 * rng.normal();
        expert << std::cos(angle), std::sin(angle);
        learner_feat = -expert * rng.uniform();
      }
      const WeightVec g = expert - learner_feat;
      learner += w.dot(g);
      total += g;
      w = ogd_cost_update(w, expert, learner_feat, alpha, CostSet::ball);
    }
    double best = 1e300;
    for (const WeightVec& u : grid) best = std::min(best, u.dot(total));
    worst = std::max(worst, learner - best);
  }
  return {worst <= bound, "max regret " + fmt(worst, 2) + ", bound " + fmt(bound, 2) + " over 20 sequences"};
}

// 6 ------------------------------------------------------------------------

Outcome expert_concentration() {
  const int d = 8;
  const double gamma = 0.9, eps = 0.2, delta = 0.1;
  const int n_e = static_cast<int>(std::ceil(2.0 * std::log(2.0 * d / delta) / (eps * eps)));
  const int H = static_cast<int>(std::ceil(std::log(1.0 / eps) / (1.0 - gamma)));
  Rng rng(derive_seed(7, "expert_concentration"));
  const auto env = TabularEnv::random(4, 2, 2, rng);
  const TabularOracle oracle(env);
  const Mat pi = random_policy_table(4, 2, rng);
  const TablePolicy expert(pi);
  const FeatVec exact = oracle.feature_expectation(oracle.occupancy(pi, gamma));
  int within = 0;
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const ExpertDataset ds = collect_expert_dataset(*env, expert, n_e, HorizonSpec::truncated(gamma, H),
                                                    derive_seed(7, "concentration_repeat", static_cast<std::uint64_t>(rep)));
    const double err = (feat_exp_discounted(*env, ds, gamma) - exact).lpNorm<Eigen::Infinity>();
    worst = std::max(worst, err);
    within += err <= eps ? 1 : 0;
  }
  const double freq = within / 200.0;
  return {freq >= 1.0 - delta, "n_E=" + std::to_string(n_e) + " H=" + std::to_string(H) + " frequency " + fmt(freq) +
                                   " (max error " + fmt(worst) + ")"};
}

// 7 ------------------------------------------------------------------------

Outcome decomposition_identity() {
  const double gamma = 0.9;
  Rng rng(derive_seed(11, "decomposition"));
  const auto env = TabularEnv::random(6, 3, 3, rng);
  const TabularOracle oracle(env);
  const int d = env->feature_dim();
  double worst_split = 0.0, worst_value = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Mat pi = random_policy_table(6, 3, rng);
    const Mat pi_e = random_policy_table(6, 3, rng);
    const WeightVec w = random_ball(d, rng);
    const WeightVec w_true = random_ball(d, rng);
    const DecompositionTerms t = regret_decomposition(oracle, pi, pi_e, w, w_true, gamma);
    const Mat c_true = oracle.cost_from_weights(w_true);
    const double value_gap = oracle.initial_value(pi, c_true, gamma) - oracle.initial_value(pi_e, c_true, gamma);
    worst_split = std::max(worst_split, std::abs(t.total - t.policy_term - t.cost_term));
    worst_value = std::max(worst_value, std::abs(t.total / (1.0 - gamma) - value_gap));
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "max split error %.2e, max value error %.2e", worst_split, worst_value);
  return {worst_split <= 1e-8 && worst_value <= 1e-8, buf};
}

// 8 ------------------------------------------------------------------------

Outcome determinism(const fs::path& root) {
  bool identical = true;
  std::string mismatched;
  const std::set<std::string> full = {"bandit_brig_vs_ilarl", "tabular_regret_sweep", "optimism_check"};
  int compared = 0;
  for (const std::string& name : preset_names()) {
    for (bool smoke : {true, false}) {
      if (!smoke && !full.contains(name)) continue;
      std::string bytes[2];
      for (int pass = 0; pass < 2; ++pass) {
        ExperimentConfig c = smoke ? smoke_config(preset(name)) : preset(name);
        c.seed = 3;
        c.out = (root / (name + (smoke ? "_smoke" : "")) / ("pass" + std::to_string(pass))).string();
        const ExperimentResult r = run_experiment(c);
        bytes[pass] = read_file(r.directory / "metrics.csv");
      }
      ++compared;
      if (bytes[0] != bytes[1] || bytes[0].empty()) {
        identical = false;
        mismatched += " " + name;
      }
    }
  }
  const auto env = TabularEnv::single_state(0.0);
  const UniformPolicy policy(1);
  bool lengths_ok = true;
  std::string lengths;
  for (double gamma : {0.5, 0.9}) {
    Rng rng(derive_seed(5, "episode_length", static_cast<std::uint64_t>(gamma * 100)));
    const int cap = static_cast<int>(std::ceil(100.0 / (1.0 - gamma)));
    double total = 0.0;
    for (int i = 0; i < 100000; ++i)
      total += static_cast<double>(sample_episode_discounted(*env, policy, gamma, rng, cap).size());
    const double mean = total / 100000.0, target = 1.0 / (1.0 - gamma);
    lengths_ok = lengths_ok && std::abs(mean - target) <= 0.05 * target;
    lengths += " gamma " + fmt(gamma, 1) + " mean length " + fmt(mean) + " vs " + fmt(target, 1) + ";";
  }
  std::string detail = std::to_string(compared) + " CSV pairs " + (identical ? "identical" : "differ:" + mismatched) +
                       ";" + lengths;
  detail.pop_back();
  return {identical && lengths_ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  std::string out = "acceptance_runs";
  app.add_option("--only", only, "Run only these criteria (1-8)");
  app.add_option("--out", out, "Scratch directory for preset re-runs");
  CLI11_PARSE(app, argc, argv);

  const fs::path root(out);
  const std::vector<Criterion> criteria = {
      {1, "optimism sandwich", 120, optimism_sandwich},
      {2, "sublinear adversarial regret", 600, regret_sweep},
      {3, "ILARL gridworld vs BC", 900, gridworld_ilarl},
      {4, "BRIG vs ILARL on linear bandit", 120, bandit_brig},
      {5, "OGD regret bound", 60, ogd_bound},
      {6, "expert concentration", 120, expert_concentration},
      {7, "regret decomposition identity", 60, decomposition_identity},
      {8, "determinism and episode lengths", 1e300, [&] { return determinism(root / "determinism"); }},
  };

  int failed = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
              << fmt(secs, 1) << " s" << (in_time ? "" : ", over budget") << ")" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
