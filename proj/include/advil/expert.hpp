#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "advil/adversarial.hpp"
#include "advil/envs.hpp"
#include "advil/kernels.hpp"
#include "advil/policy.hpp"

namespace advil {

/// Per-stage argmin over Q (lowest index on ties). A single Q is stationary.
class GreedyPolicy final : public Policy {
 public:
  GreedyPolicy(EnvPtr env, std::vector<FunctionalQ> q);

  int num_actions() const override { return env_->num_actions(); }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;

  int action(const State& s, int stage) const;
  int stages() const { return static_cast<int>(q_.size()); }
  const std::vector<FunctionalQ>& q() const { return q_; }
  /// Stationary policy that plays the stage-`stage` rule everywhere.
  std::shared_ptr<const GreedyPolicy> stationary(int stage = 0) const;

 private:
  EnvPtr env_;
  std::vector<FunctionalQ> q_;
  std::vector<Vec> linear_;
};

struct ExpertTraining {
  int horizon = 20;
  int episodes = 2000;
  double beta = 8.0;
  /// Bonus scale of the last greedy pass that produces the returned policy.
  /// Negative means "same as beta".
  double final_beta = -1.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

/// Optimistic LSVI with greedy backups on the environment's (normalized) true
/// cost: one episode per iteration, growing per-stage data.
std::shared_ptr<const GreedyPolicy> train_expert_lsvi_ucb(EnvPtr env, const ExpertTraining& options,
                                                          std::uint64_t seed);

/// Plays `expert` with probability 1 - mix and a uniform action otherwise.
PolicyPtr make_stochastic_expert(PolicyPtr expert, double mix);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct ExpertDataset {
  std::vector<Trajectory> trajectories;
  HorizonSpec horizon;

  std::size_t size() const { return trajectories.size(); }
  std::size_t transitions() const;
};

ExpertDataset collect_expert_dataset(const Environment& env, const Policy& expert, int n_trajectories,
                                     const HorizonSpec& horizon, std::uint64_t seed,
                                     kernels::Exec exec = kernels::Exec::parallel);

/// Line format: a "# horizon finite H", "# horizon discounted gamma max_len"
/// or "# horizon truncated gamma max_len" line, the CSV header, then one transition per line.
void write_dataset(std::ostream& out, const ExpertDataset& ds);
ExpertDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const ExpertDataset& ds);
ExpertDataset load_dataset(const std::string& path);

inline constexpr const char* kDatasetHeader = "episode,h,state_x,state_y,state_id,action,next_x,next_y,next_id,cost";

// ---------------------------------------------------------------------------
// Feature expectations
// ---------------------------------------------------------------------------

/// (1 - gamma) / n * sum_traj sum_{t >= 0} gamma^t phi(s_t, a_t).
FeatVec feat_exp_discounted(const Environment& env, std::span<const Trajectory> trajectories, double gamma);
FeatVec feat_exp_discounted(const Environment& env, const ExpertDataset& ds, double gamma);

/// Stage h: mean of phi(s_h, a_h) over trajectories.
std::vector<FeatVec> feat_exp_per_stage(const Environment& env, const ExpertDataset& ds, int horizon);

/// Split-dataset estimator: rollouts of a cloned policy that stay inside the
/// membership set plus held-out expert trajectories that leave it, both
/// discounted as in feat_exp_discounted and normalized by their own counts.
FeatVec mimic_md_estimator(const Environment& env, std::span<const Trajectory> held_out,
                           std::span<const Trajectory> clone_rollouts,
                           const std::function<bool(const State&)>& membership, double gamma);

// ---------------------------------------------------------------------------
// Behavioral cloning
// ---------------------------------------------------------------------------

/// pi(a | s) proportional to exp(-phi(s, a)^T theta).
class SoftmaxLinearPolicy final : public Policy {
 public:
  SoftmaxLinearPolicy(EnvPtr env, WeightVec theta);

  int num_actions() const override { return env_->num_actions(); }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;

  const WeightVec& theta() const { return theta_; }
  /// Argmax of the distribution, lowest index on ties.
  int greedy_action(const State& s) const;

 private:
  EnvPtr env_;
  WeightVec theta_;
};

struct CloningResult {
  std::shared_ptr<const SoftmaxLinearPolicy> policy;
  /// Mean negative log-likelihood before each step and after the last one.
  std::vector<double> loss;
};

/// Full-batch gradient descent on the mean negative log-likelihood from theta = 0.
CloningResult behavioral_cloning(EnvPtr env, const ExpertDataset& ds, int steps, double lr);

}  // namespace advil
