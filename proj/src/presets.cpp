#include <algorithm>

#include "advil/experiment.hpp"

namespace advil {

namespace {

ExperimentConfig gridworld_ilarl(const std::string& name, double sigma, const std::string& expert_kind,
                                 int trajectories) {
  ExperimentConfig c;
  c.experiment = name;
  c.out = "runs/" + name;
  c.env.kind = "gridworld";
  c.env.sigma = sigma;
  c.env.scale = 100.0;
  c.env.gamma = 0.95;
  c.env.horizon = 1;
  c.expert.kind = expert_kind;
  c.expert.mix = 0.5;
  c.expert.trajectories = trajectories;
  c.expert.length = 0;
  c.expert.train_episodes = 2000;
  c.expert.train_horizon = 40;
  c.expert.train_beta = 8.0;
  c.algorithm.kind = "ilarl";
  c.algorithm.schedule = "manual";
  c.algorithm.rounds = 400;
  c.algorithm.tau = 5;
  c.algorithm.beta = 8.0;
  c.algorithm.eta = 1.0;
  c.algorithm.alpha = 0.0;
  c.eval.n_eval = 200;
  c.eval.cadence = 5;
  c.eval.baseline = "bc";
  c.eval.tail_fraction = 0.2;
  return c;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"fig1_tauE1",    "fig1_tauE2",          "fig3_sigma0",          "fig3_sigma005",
          "fig3_sigma01",  "bandit_brig_vs_ilarl", "tabular_regret_sweep", "optimism_check"};
}

ExperimentConfig preset(const std::string& name) {
  if (name == "fig1_tauE1") return gridworld_ilarl(name, 0.1, "stochastic", 1);
  if (name == "fig1_tauE2") return gridworld_ilarl(name, 0.1, "stochastic", 2);
  if (name == "fig3_sigma0") return gridworld_ilarl(name, 0.0, "deterministic", 1);
  if (name == "fig3_sigma005") return gridworld_ilarl(name, 0.05, "deterministic", 1);
  if (name == "fig3_sigma01") return gridworld_ilarl(name, 0.1, "deterministic", 1);
  if (name == "bandit_brig_vs_ilarl") {
    ExperimentConfig c;
    c.experiment = name;
    c.out = "runs/" + name;
    c.env.kind = "bandit";
    c.env.gamma = 0.0;
    c.env.horizon = 1;
    c.env.actions = 20;
    c.env.dim = 10;
    c.expert.kind = "softmax";
    c.expert.temperature = 0.1;
    c.expert.trajectories = 10;
    c.algorithm.kind = "brig";
    c.algorithm.rounds = 500;
    c.algorithm.tau = 5;
    c.algorithm.beta = 8.0;
    c.algorithm.eta = 1.0;
    c.algorithm.alpha = 0.0;
    c.eval.n_eval = 1;
    c.eval.cadence = 25;
    c.eval.baseline = "ilarl";
    return c;
  }
  if (name == "tabular_regret_sweep") {
    ExperimentConfig c;
    c.experiment = name;
    c.out = "runs/" + name;
    c.env.kind = "tabular";
    c.env.gamma = 0.0;
    c.env.horizon = 3;
    c.env.states = 3;
    c.env.actions = 2;
    c.env.branching = 2;
    c.expert.kind = "none";
    c.algorithm.kind = "mdpe_finite";
    c.algorithm.schedule = "thm3";
    c.algorithm.beta_multiplier = 0.05;
    c.algorithm.rounds = 2048;
    c.algorithm.cost_stream = "random_walk";
    c.algorithm.cost_step = 0.2;
    c.algorithm.sweep = {256, 512, 1024, 2048};
    c.algorithm.repeats = 32;
    c.eval.n_eval = 1;
    return c;
  }
  if (name == "optimism_check") {
    ExperimentConfig c;
    c.experiment = name;
    c.out = "runs/" + name;
    c.env.kind = "tabular";
    c.env.gamma = 0.0;
    c.env.horizon = 5;
    c.env.states = 12;
    c.env.actions = 4;
    c.env.branching = 3;
    c.expert.kind = "none";
    c.algorithm.kind = "mdpe_finite";
    c.algorithm.schedule = "manual";
    c.algorithm.rounds = 200;
    c.algorithm.tau = 10;
    c.algorithm.beta = 240.0;
    c.algorithm.eta = 0.1;
    c.algorithm.cost_stream = "random_walk";
    c.algorithm.cost_step = 0.2;
    c.algorithm.optimism_check = true;
    c.eval.n_eval = 1;
    return c;
  }
  std::string list;
  for (const std::string& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw InvalidInput("unknown preset '" + name + "'; valid presets: " + list);
}

ExperimentConfig smoke_config(ExperimentConfig c) {
  AlgorithmConfig& a = c.algorithm;
  if (!a.sweep.empty()) {
    std::vector<int> reduced;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, a.sweep.size()); ++i) reduced.push_back(std::max(1, a.sweep[i] / 4));
    a.sweep = reduced;
    a.rounds = reduced.back();
    a.repeats = std::min(a.repeats, 4);
  } else {
    a.rounds = std::min(a.rounds, std::max(4 * a.tau, 20));
  }
  if (a.schedule == "manual") a.tau = std::min(a.tau, a.sweep.empty() ? a.rounds : a.sweep.front());
  a.bc_steps = std::min(a.bc_steps, 50);
  c.expert.train_episodes = std::min(c.expert.train_episodes, 100);
  c.eval.n_eval = std::min(c.eval.n_eval, 20);
  if (c.eval.cadence > 0) c.eval.cadence = std::min(c.eval.cadence, a.rounds);
  return c;
}

}  // namespace advil
