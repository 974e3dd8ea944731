#pragma once

#include <memory>
#include <optional>
#include <string>

#include "advil/core.hpp"
#include "advil/rng.hpp"

namespace advil {

/// Environment state. Continuous environments use (x, y); discrete ones use id.
struct State {
  double x = 0.0;
  double y = 0.0;
  int id = 0;

  bool operator==(const State&) const = default;
};

/// Affine map from raw cost into [-1, 1]: (raw - offset) / scale.
struct CostNormalizer {
  double offset = 0.0;
  double scale = 1.0;

  double operator()(double raw) const { return (raw - offset) / scale; }
  static CostNormalizer from_range(double lo, double hi);
};

/// Finite horizon H or discounted gamma. Discounted episodes either restart
/// w.p. 1 - gamma after each step or run exactly max_len steps (truncated).
struct HorizonSpec {
  enum class Mode { finite, discounted };

  Mode mode = Mode::finite;
  int horizon = 1;
  double gamma = 0.0;
  int max_len = 1;
  bool restart = true;

  static HorizonSpec finite(int horizon);
  /// max_len <= 0 selects ceil(10 / (1 - gamma)).
  static HorizonSpec discounted(double gamma, int max_len = 0);
  /// Fixed-length discounted episodes of `length` steps.
  static HorizonSpec truncated(double gamma, int length);
  static int default_max_len(double gamma);

  bool is_finite() const { return mode == Mode::finite; }
};

/// Immutable MDP description; stepping is pure given the caller's rng.
/// Each of initial_state and step consumes a fixed number of draws so paired
/// rollouts of different policies stay aligned.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int num_actions() const = 0;
  virtual int feature_dim() const = 0;

  virtual void features_into(const State& s, int action, Eigen::Ref<Vec> out) const = 0;
  /// Raw (unnormalized) true cost.
  virtual double cost(const State& s, int action) const = 0;
  virtual State initial_state(Rng& rng) const = 0;
  virtual State step(const State& s, int action, Rng& rng) const = 0;

  virtual CostNormalizer cost_normalizer() const { return {}; }
  /// Weights w with normalized_cost(s, a) = phi(s, a)^T w, when the cost is realizable.
  virtual std::optional<WeightVec> true_cost_weights() const { return std::nullopt; }

  FeatVec features(const State& s, int action) const;
  /// |A| x d block, row a = phi(s, a).
  Mat feature_block(const State& s) const;
  void feature_block_into(const State& s, Mat& out) const;
  double normalized_cost(const State& s, int action) const { return cost_normalizer()(cost(s, action)); }

 protected:
  void check_action(int action) const;
};

using EnvPtr = std::shared_ptr<const Environment>;

}  // namespace advil
