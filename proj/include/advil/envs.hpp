#pragma once

#include <memory>
#include <vector>

#include "advil/env.hpp"
#include "advil/policy.hpp"

namespace advil {

// ---------------------------------------------------------------------------
// Continuous gridworld on [-1, 1]^2
// ---------------------------------------------------------------------------

struct GridworldParams {
  /// Probability that the state is pushed toward the origin instead of moving.
  double sigma = 0.1;
  /// Multiplier on the action displacement (1 = as published, 0.001 per step).
  double step_scale = 1.0;
};

inline constexpr int kGridActions = 4;
inline constexpr int kGridFeatureDim = 10;

/// [x^2, y^2, x, y, exp(-8(x^2+y^2)), 1{goal corner}, e_a]
FeatVec grid_features(const State& s, int action);
/// (x-1)^2 + (y+1)^2 + 80 exp(-8(x^2+y^2)) - 100 1{goal corner}; action independent.
double grid_cost(const State& s, int action);
/// One transition; always consumes one draw.
State grid_step(const State& s, int action, double sigma, Rng& rng, double step_scale = 1.0);
bool grid_goal_corner(double x, double y);

class Gridworld final : public Environment {
 public:
  explicit Gridworld(GridworldParams params = {});

  std::string name() const override { return "gridworld"; }
  int num_actions() const override { return kGridActions; }
  int feature_dim() const override { return kGridFeatureDim; }
  void features_into(const State& s, int action, Eigen::Ref<Vec> out) const override;
  double cost(const State& s, int action) const override;
  /// Deterministic start (-1, 1); consumes no draws.
  State initial_state(Rng& rng) const override;
  State step(const State& s, int action, Rng& rng) const override;
  CostNormalizer cost_normalizer() const override;
  std::optional<WeightVec> true_cost_weights() const override;

  const GridworldParams& params() const { return params_; }
  /// Raw-cost weights: grid_cost(s, a) = phi(s, a)^T raw_cost_weights().
  static WeightVec raw_cost_weights();

 private:
  GridworldParams params_;
};

// ---------------------------------------------------------------------------
// Linear bandit (single state, H = 1)
// ---------------------------------------------------------------------------

class LinearBandit final : public Environment {
 public:
  /// Row a of `features` is phi(a); cost(a) = phi(a)^T w_true.
  LinearBandit(Mat features, WeightVec w_true);

  std::string name() const override { return "bandit"; }
  int num_actions() const override { return static_cast<int>(features_.rows()); }
  int feature_dim() const override { return static_cast<int>(features_.cols()); }
  void features_into(const State& s, int action, Eigen::Ref<Vec> out) const override;
  double cost(const State& s, int action) const override;
  State initial_state(Rng& rng) const override;
  State step(const State& s, int action, Rng& rng) const override;
  std::optional<WeightVec> true_cost_weights() const override { return w_true_; }

  const Mat& feature_matrix() const { return features_; }
  const WeightVec& w_true() const { return w_true_; }

  /// Entry i (1-based) is 0 for odd i and 1 for even i.
  static WeightVec alternating_weights(int dim);
  /// i.i.d. N(0, 1) / sqrt(dim) entries.
  static Mat gaussian_features(int num_actions, int dim, Rng& rng);

 private:
  Mat features_;
  WeightVec w_true_;
};

// ---------------------------------------------------------------------------
// Tabular MDP with exactly linear structure (one-hot features by default)
// ---------------------------------------------------------------------------

class TabularEnv final : public Environment {
 public:
  /// transitions: (S*A) x S, row s*A + a. cost: S x A in [-1, 1]. initial: S.
  TabularEnv(int num_states, int num_actions, Mat transitions, Mat cost, Vec initial);

  std::string name() const override { return "tabular"; }
  int num_actions() const override { return num_actions_; }
  int feature_dim() const override { return num_states_ * num_actions_; }
  void features_into(const State& s, int action, Eigen::Ref<Vec> out) const override;
  double cost(const State& s, int action) const override;
  /// One draw.
  State initial_state(Rng& rng) const override;
  /// One draw.
  State step(const State& s, int action, Rng& rng) const override;
  std::optional<WeightVec> true_cost_weights() const override;

  int num_states() const { return num_states_; }
  int index(int state, int action) const { return state * num_actions_ + action; }
  const Mat& transitions() const { return transitions_; }
  const Mat& cost_table() const { return cost_; }
  const Vec& initial() const { return initial_; }

  /// Random instance: each (s, a) reaches `branching` random successors with
  /// random probabilities, costs uniform in [-1, 1], start state 0.
  static std::shared_ptr<TabularEnv> random(int num_states, int num_actions, int branching, Rng& rng);
  /// Single state, single action, constant cost.
  static std::shared_ptr<TabularEnv> single_state(double cost);

 private:
  int num_states_;
  int num_actions_;
  Mat transitions_;
  Mat cost_;
  Vec initial_;
  std::vector<std::vector<double>> transition_rows_;
};

/// Exact dynamic-programming quantities for a tabular environment.
class TabularOracle {
 public:
  explicit TabularOracle(std::shared_ptr<const TabularEnv> env);

  const TabularEnv& env() const { return *env_; }
  int num_states() const { return env_->num_states(); }
  int num_actions() const { return env_->num_actions(); }

  Mat policy_table(const Policy& policy, int stage = 0) const;
  std::vector<Mat> policy_tables(const Policy& policy, int horizon) const;

  /// (P V)(s, a) as an S x A table.
  Mat expected_next(const Vec& values) const;
  /// S x A cost table phi(s, a)^T w.
  Mat cost_from_weights(const WeightVec& w) const;
  /// Phi^T vec(d) for an S x A measure.
  Vec feature_expectation(const Mat& measure) const;

  // Discounted.
  /// Solves V = c_pi + gamma P_pi V.
  Vec value(const Mat& pi, const Mat& cost, double gamma) const;
  /// Solves d = (1 - gamma) nu0 + gamma P_pi^T d; S x A, sums to 1.
  Mat occupancy(const Mat& pi, double gamma) const;
  /// E_{s ~ nu0} V(s).
  double initial_value(const Mat& pi, const Mat& cost, double gamma) const;
  /// Deterministic optimal (cost-minimizing) policy via policy iteration.
  Mat optimal_policy(const Mat& cost, double gamma) const;

  // Finite horizon, stages 1..H stored at index 0..H-1.
  /// Returns V_1 .. V_{H+1} (V_{H+1} = 0).
  std::vector<Vec> values_finite(const std::vector<Mat>& pis, const std::vector<Mat>& costs) const;
  std::vector<Mat> occupancy_finite(const std::vector<Mat>& pis) const;
  double initial_value_finite(const std::vector<Mat>& pis, const std::vector<Mat>& costs) const;
  /// Backward induction; deterministic per-stage tables.
  std::vector<Mat> optimal_policy_finite(const std::vector<Mat>& costs) const;

 private:
  Mat policy_transition(const Mat& pi) const;

  std::shared_ptr<const TabularEnv> env_;
};

// ---------------------------------------------------------------------------
// Interaction loops
// ---------------------------------------------------------------------------

struct Transition {
  State state;
  int action = 0;
  State next;
  /// Raw environment cost of (state, action).
  double cost = 0.0;
  /// Step index within the episode, 0-based.
  int stage = 0;
};

struct Trajectory {
  std::vector<Transition> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
};

/// H steps; stage h uses pi_h.
Trajectory sample_episode_finite(const Environment& env, const Policy& policy, int horizon, Rng& rng);
/// After each step a restart coin Z ~ Bernoulli(1 - gamma) ends the episode;
/// length is capped at max_len. Without restarts the episode runs max_len
/// steps. Stationary policy (stage 0).
Trajectory sample_episode_discounted(const Environment& env, const Policy& policy, double gamma, Rng& rng,
                                     int max_len, bool restart = true);
/// Rolls until the restart coin fires (or max_len) and returns that transition;
/// its (s, a) marginal is the discounted occupancy measure.
Transition sample_occupancy(const Environment& env, const Policy& policy, double gamma, Rng& rng, int max_len);

Trajectory sample_episode(const Environment& env, const Policy& policy, const HorizonSpec& horizon, Rng& rng);

}  // namespace advil
