#pragma once

// Experiment configuration, presets and the runner behind the CLI.
//
// Config text format: one "key = value" per line, '#' starts a comment,
// blank lines are ignored, keys are dotted ("env.sigma"). Unknown keys,
// duplicate keys and malformed values are rejected. emit_config writes every
// key in a fixed order, so emit -> parse -> emit is the identity.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "advil/envs.hpp"
#include "advil/eval.hpp"
#include "advil/expert.hpp"
#include "advil/imitation.hpp"
#include "advil/metrics.hpp"

namespace advil {

struct EnvConfig {
  /// gridworld | bandit | tabular
  std::string kind = "gridworld";
  double sigma = 0.1;
  double scale = 1.0;
  /// Discount of discounted runs; 0 for finite-horizon ones.
  double gamma = 0.95;
  /// Stages of finite-horizon runs.
  int horizon = 1;
  /// Tabular state count.
  int states = 12;
  /// Bandit and tabular action count.
  int actions = 4;
  /// Bandit feature dimension.
  int dim = 10;
  /// Tabular successors per (s, a).
  int branching = 3;

  bool operator==(const EnvConfig&) const = default;
};

struct ExpertConfig {
  /// stochastic | deterministic | softmax | optimal | none
  std::string kind = "stochastic";
  /// Uniform-action probability of the stochastic expert.
  double mix = 0.5;
  /// Softmax expert: pi(a) proportional to exp(-cost(a) / temperature).
  double temperature = 0.1;
  int trajectories = 1;
  /// Truncation of discounted expert trajectories; 0 selects ceil(10 / (1 - gamma)).
  int length = 0;
  int train_episodes = 2000;
  int train_horizon = 20;
  double train_beta = 8.0;
  /// Optional dataset file that replaces sampling.
  std::string dataset;

  bool operator==(const ExpertConfig&) const = default;
};

struct AlgorithmConfig {
  /// ilarl | brig | mdpe_finite | mdpe_infinite | bc
  std::string kind = "ilarl";
  /// manual | thm3 | thm4 | thm5 | thmBR
  std::string schedule = "manual";
  int rounds = 400;
  int tau = 5;
  double beta = 8.0;
  double beta_multiplier = 1.0;
  double eta = 1.0;
  /// Cost step size; 0 selects 1 / sqrt(2 K).
  double alpha = 0.0;
  double delta = 0.1;
  double epsilon = 0.1;
  /// Adversarial runs: random_walk | fixed.
  std::string cost_stream = "random_walk";
  double cost_step = 0.2;
  int bc_steps = 500;
  double bc_lr = 0.5;
  /// Adversarial runs: one run per listed K instead of `rounds`.
  std::vector<int> sweep;
  /// Adversarial sweeps: independent (cost stream, run) replicates averaged per K.
  int repeats = 1;
  /// Adversarial runs on tabular envs: count optimism sandwich violations.
  bool optimism_check = false;

  bool operator==(const AlgorithmConfig&) const = default;
};

struct EvalConfig {
  /// Monte-Carlo episodes per evaluation (paired across policies).
  int n_eval = 200;
  /// Rounds between evaluations; 0 selects the batch size.
  int cadence = 0;
  /// none | bc | ilarl
  std::string baseline = "none";
  /// Fraction of final round policies averaged into the "tail" score.
  double tail_fraction = 0.2;

  bool operator==(const EvalConfig&) const = default;
};

struct ExperimentConfig {
  std::string experiment = "custom";
  std::uint64_t seed = 0;
  /// Root output directory; runs write to <out>/seed<N>/.
  std::string out = "runs";
  EnvConfig env;
  ExpertConfig expert;
  AlgorithmConfig algorithm;
  EvalConfig eval;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string emit_config(const ExperimentConfig& config);
/// Cross-field checks; throws InvalidInput with the first problem found.
void validate_config(const ExperimentConfig& config);
/// Every key emit_config writes, in order.
std::vector<std::string> config_keys();

std::vector<std::string> preset_names();
/// Throws InvalidInput listing the valid names for an unknown one.
ExperimentConfig preset(const std::string& name);
/// Reduced budget that keeps the structure of the run.
ExperimentConfig smoke_config(ExperimentConfig config);

// ---------------------------------------------------------------------------
// Building blocks shared by the runner and the acceptance suite
// ---------------------------------------------------------------------------

EnvPtr make_environment(const EnvConfig& env, std::uint64_t seed);
HorizonSpec expert_horizon(const ExperimentConfig& config);
/// Expert policy for the configured environment. Training (gridworld) and
/// exact planning (tabular) use sub-seeds of `seed`.
PolicyPtr make_expert(const ExperimentConfig& config, const EnvPtr& env, std::uint64_t seed);

/// Returns of the expert and the uniform policy plus a paired evaluator.
class ReturnScale {
 public:
  ReturnScale(EnvPtr env, PolicyPtr expert, HorizonSpec horizon, int n_eval, std::uint64_t seed);

  /// Mean cost with stderr; exact for bandits, paired Monte Carlo otherwise.
  Estimate cost(const Policy& policy) const;
  double normalized(const Policy& policy) const;
  double normalized_cost(double cost) const;
  double expert_cost() const { return expert_cost_; }
  double uniform_cost() const { return uniform_cost_; }

 private:
  EnvPtr env_;
  HorizonSpec horizon_;
  int n_eval_;
  std::uint64_t seed_;
  double expert_cost_ = 0.0;
  double uniform_cost_ = 0.0;
};

struct ExperimentResult {
  MetricTrace trace;
  std::string schedule_json;
  std::optional<double> normalized_return_out;
  std::optional<double> regret_final;
  /// Non-canonical diagnostics: labeled scores of the last and the best policy.
  std::vector<std::pair<std::string, double>> diagnostics;
  double wall_time_s = 0.0;
  std::filesystem::path directory;
};

/// Runs the configured experiment in memory.
ExperimentResult execute_experiment(const ExperimentConfig& config);
/// execute_experiment plus config.json, metrics.csv and summary.json under
/// <out>/seed<N>/.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string config_json(const ExperimentConfig& config);
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);

}  // namespace advil
