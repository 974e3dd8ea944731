#pragma once

#include <map>
#include <string>
#include <vector>

#include "advil/adversarial.hpp"
#include "advil/expert.hpp"
#include "advil/metrics.hpp"

namespace advil {

enum class CostSet {
  /// ||w||_2 <= 1
  ball,
  /// 0 <= w <= 1
  box,
};

/// project(w - alpha (expert_feat - learner_feat)).
WeightVec ogd_cost_update(const WeightVec& w, const FeatVec& expert_feat, const FeatVec& learner_feat, double alpha,
                          CostSet set);

/// Mean feature of a batch of occupancy samples.
FeatVec estimate_learner_feat(const Environment& env, std::span<const Transition> batch);

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

enum class Theorem { thm3, thm4, thm5, thmBR, expert_conc };

Theorem parse_theorem(const std::string& name);
std::string theorem_name(Theorem which);

struct ScheduleInputs {
  int rounds = 0;
  int dim = 0;
  int horizon = 0;
  double gamma = 0.0;
  int num_actions = 0;
  double delta = 0.1;
  double epsilon = 0.1;
  /// Constant in front of the exploration-scale order (d H or d / (1 - gamma)).
  double beta_multiplier = 1.0;
};

struct ScheduleParams {
  Theorem which = Theorem::thm3;
  int rounds = 0;
  int tau = 0;
  double tau_exact = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double tau_expert = 0.0;
  int n_expert = 0;
  double min_horizon = 0.0;
  /// Formula behind every emitted value, keyed by value name.
  std::map<std::string, std::string> formulas;
};

ScheduleParams schedule_from_theorems(Theorem which, const ScheduleInputs& in);

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct RunResult {
  /// Policy played at each round.
  std::vector<PolicyPtr> round_policies;
  /// Cost weights of each round, one vector per stage.
  std::vector<std::vector<WeightVec>> round_weights;
  /// Expert feature expectation estimate, one vector per stage.
  std::vector<FeatVec> expert_feat;
  /// 0-based index of the uniformly drawn output policy.
  int output_index = 0;
  int trajectories = 0;
  MetricTrace trace;

  int rounds() const { return static_cast<int>(round_policies.size()); }
  const PolicyPtr& output_policy() const { return round_policies.at(static_cast<std::size_t>(output_index)); }
};

/// 0-based index of the uniformly drawn output policy among `rounds`.
int draw_output(std::uint64_t seed, int rounds);

struct IlarlOptions {
  int rounds = 1;
  int tau = 1;
  double beta = 8.0;
  double eta = 1.0;
  double alpha = 0.1;
  double gamma = 0.9;
  /// <= 0 selects the default truncation for gamma.
  int max_len = 0;
  kernels::Exec exec = kernels::Exec::parallel;
};

RunResult ilarl_run(EnvPtr env, const ExpertDataset& expert, const IlarlOptions& options, std::uint64_t seed);

struct BrigOptions {
  int rounds = 1;
  int horizon = 1;
  double beta = 8.0;
  double alpha = 0.1;
  kernels::Exec exec = kernels::Exec::parallel;
};

RunResult brig_run(EnvPtr env, const ExpertDataset& expert, const BrigOptions& options, std::uint64_t seed);

}  // namespace advil
