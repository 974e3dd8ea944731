#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "advil/core.hpp"
#include "advil/env.hpp"
#include "advil/rng.hpp"

namespace advil {

/// Stage-indexed stochastic policy. Stationary policies ignore the stage.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual int num_actions() const = 0;
  /// Writes pi_stage(. | s) into out (size num_actions()).
  virtual void distribution(const State& s, int stage, std::span<double> out) const = 0;

  std::vector<double> distribution(const State& s, int stage = 0) const;
  /// Consumes exactly one draw regardless of the policy.
  int sample(const State& s, int stage, Rng& rng) const;
};

using PolicyPtr = std::shared_ptr<const Policy>;

class UniformPolicy final : public Policy {
 public:
  explicit UniformPolicy(int num_actions);
  int num_actions() const override { return num_actions_; }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;

 private:
  int num_actions_;
};

/// Deterministic policy given by a (state, stage) -> action rule.
class DeterministicPolicy final : public Policy {
 public:
  using Rule = std::function<int(const State&, int)>;
  DeterministicPolicy(int num_actions, Rule rule);

  int num_actions() const override { return num_actions_; }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;
  int action(const State& s, int stage) const { return rule_(s, stage); }

 private:
  int num_actions_;
  Rule rule_;
};

/// Explicit pi[stage](state.id, action) tables for discrete state spaces.
/// A single table is treated as stationary.
class TablePolicy final : public Policy {
 public:
  explicit TablePolicy(std::vector<Mat> tables);
  explicit TablePolicy(Mat table) : TablePolicy(std::vector<Mat>{std::move(table)}) {}

  int num_actions() const override { return static_cast<int>(tables_.front().cols()); }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;
  const Mat& table(int stage) const;
  int stages() const { return static_cast<int>(tables_.size()); }

 private:
  std::vector<Mat> tables_;
};

/// With probability 1 - mix plays `base`, otherwise a uniform action.
class MixturePolicy final : public Policy {
 public:
  MixturePolicy(PolicyPtr base, double mix);
  int num_actions() const override { return base_->num_actions(); }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;

 private:
  PolicyPtr base_;
  double mix_;
};

}  // namespace advil
