#pragma once

// Online learning in linear MDPs with adversarial full-information costs:
// optimistic least-squares evaluation plus batched exponential-weights
// policy improvement, for finite-horizon and discounted problems.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "advil/core.hpp"
#include "advil/covariance.hpp"
#include "advil/envs.hpp"
#include "advil/kernels.hpp"
#include "advil/metrics.hpp"
#include "advil/policy.hpp"

namespace advil {

/// Q(s, a) = clip(phi^T cost_w + discount * phi^T value_v - beta ||phi||_{Lambda^{-1}}).
struct FunctionalQ {
  WeightVec cost_w;
  WeightVec value_v;
  double discount = 1.0;
  std::shared_ptr<const CovStats> cov;
  double beta = 0.0;
  ClipRange clip;

  Vec linear() const { return cost_w + discount * value_v; }
  double bonus_at(const Eigen::Ref<const Vec>& phi) const { return bonus(phi, *cov, beta); }
  double eval(const Eigen::Ref<const Vec>& phi) const;
  /// One value per row of `phi_block`.
  Vec eval_block(const Mat& phi_block) const;
};

/// A batch of Q functions that share covariance, bonus scale and clip range.
/// mean_into gives the average of the individually clipped values.
class QStack {
 public:
  /// Column i of `linear` is cost_w + discount * value_v of member i.
  QStack(std::shared_ptr<const CovStats> cov, double beta, ClipRange clip, Mat linear);
  static QStack from(std::span<const FunctionalQ> members);

  int size() const { return static_cast<int>(linear_.cols()); }
  const Mat& linear() const { return linear_; }
  const CovStats& cov() const { return *cov_; }
  double beta() const { return beta_; }
  const ClipRange& clip_range() const { return clip_; }

  void mean_into(const Mat& phi_block, Eigen::Ref<Vec> out) const;
  Vec mean(const Mat& phi_block) const;

 private:
  std::shared_ptr<const CovStats> cov_;
  double beta_;
  ClipRange clip_;
  Mat linear_;
};

using QStackPtr = std::shared_ptr<const QStack>;

/// pi_h(a | s) proportional to exp(-eta * sum_i Qbar_h^(i)(s, a)).
/// Evaluated lazily from the stored per-epoch stacks.
class ExpWeightsPolicy final : public Policy {
 public:
  ExpWeightsPolicy(EnvPtr env, double eta, int stages);

  /// Copy with one more epoch appended; per_stage[h] feeds stage h.
  std::shared_ptr<const ExpWeightsPolicy> extended(std::vector<QStackPtr> per_stage) const;

  int num_actions() const override { return env_->num_actions(); }
  using Policy::distribution;
  void distribution(const State& s, int stage, std::span<double> out) const override;

  /// sum_i Qbar^(i)(s, .) at `stage`.
  Vec cumulative_loss(const State& s, int stage) const;
  int epochs() const { return static_cast<int>(epochs_.size()); }
  int stages() const { return stages_; }
  double eta() const { return eta_; }

 private:
  EnvPtr env_;
  double eta_;
  int stages_;
  std::vector<std::vector<QStackPtr>> epochs_;
};

// ---------------------------------------------------------------------------
// Cost streams
// ---------------------------------------------------------------------------

/// Per-round, per-stage cost weights with ||w||_2 <= 1.
class CostStream {
 public:
  enum class Kind { fixed, random_walk, scripted };

  static CostStream fixed(const WeightVec& w, int rounds, int stages = 1);
  /// w_{k+1} = project(w_k + step * xi), xi ~ N(0, I / d), independently per stage.
  static CostStream random_walk(const WeightVec& start, double step, int rounds, int stages, std::uint64_t seed);
  /// weights[k][h]; every entry must already lie in the unit ball.
  static CostStream scripted(std::vector<std::vector<WeightVec>> weights);

  Kind kind() const { return kind_; }
  int rounds() const { return static_cast<int>(weights_.size()); }
  int stages() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().size()); }
  int dim() const;
  const WeightVec& weights(int round, int stage = 0) const;
  const std::vector<WeightVec>& round(int k) const;

 private:
  CostStream(Kind kind, std::vector<std::vector<WeightVec>> weights);
  Kind kind_;
  std::vector<std::vector<WeightVec>> weights_;
};

// ---------------------------------------------------------------------------
// Optimistic evaluation
// ---------------------------------------------------------------------------

/// Samples of one stage (or of the discounted occupancy) with the feature
/// blocks of their next states cached for value backups. Storage grows
/// geometrically so appending one sample per episode stays cheap.
class StageSamples {
 public:
  StageSamples() = default;
  StageSamples(int dim, int num_actions, bool with_next);
  static StageSamples from(const Environment& env, std::span<const Transition> steps, bool with_next);

  void append(const Environment& env, const Transition& step);

  int size() const { return count_; }
  int num_actions() const { return num_actions_; }
  bool with_next() const { return with_next_; }
  Eigen::Ref<const Mat> phi() const { return phi_.topRows(count_); }
  /// Row i * A + a = phi(next_i, a); empty without next-state blocks.
  Eigen::Ref<const Mat> next_phi() const { return next_phi_.topRows(with_next_ ? count_ * num_actions_ : 0); }
  const std::vector<State>& next_states() const { return next_states_; }

 private:
  void reserve(int rows);

  Mat phi_;
  Mat next_phi_;
  std::vector<State> next_states_;
  int num_actions_ = 0;
  int count_ = 0;
  bool with_next_ = false;
};

/// Row i * A + a = pi_stage(a | states[i]).
Vec policy_probs(const Policy& policy, std::span<const State> states, int stage, kernels::Exec exec);

/// Everything of one stage that stays fixed while the costs vary.
struct StageModel {
  std::shared_ptr<const CovStats> cov;
  std::shared_ptr<const StageSamples> samples;
  /// Bonus and policy at the next states under the next stage's model.
  Vec next_bonus;
  /// Empty means greedy (min over actions) backups.
  Vec next_probs;
};

/// Builds per-stage models. Missing covariances (empty vector) are built from
/// the samples. With a null policy the value backups are greedy.
std::vector<StageModel> make_stage_models(std::vector<std::shared_ptr<const StageSamples>> samples,
                                          std::vector<std::shared_ptr<const CovStats>> covs, const Policy* policy,
                                          double beta, kernels::Exec exec);

/// Backward recursion over stages H..1 with V_{H+1} = 0. cost_w[h] is the
/// stage cost. Returns Q_1..Q_H (index 0..H-1).
std::vector<FunctionalQ> lsvi_finite(const std::vector<StageModel>& stages, std::span<const WeightVec> cost_w,
                                     double beta, kernels::Exec exec);

/// One batch of the discounted recursion Q^{k+1} = clip(c^k + gamma Phi v^k - b).
class DiscountedBatch {
 public:
  DiscountedBatch(const Environment& env, std::span<const Transition> samples, const Policy& policy, double beta,
                  double gamma, kernels::Exec exec);

  /// V^k at this batch's next states for Q^k carried in from earlier rounds
  /// (evaluated with the policy of the batch that produced it). Null means V = 0.
  Vec carried_values(const FunctionalQ* previous, const Policy* previous_policy) const;
  /// Q^{k+1} from cost weights and V^k at the next states.
  FunctionalQ step(const WeightVec& cost_w, const Vec& next_values) const;
  /// V^{k+1} at the next states under this batch's policy.
  Vec values(const FunctionalQ& q) const;

  const std::shared_ptr<const CovStats>& cov() const { return cov_; }
  const StageSamples& samples() const { return samples_; }
  /// Mean feature of the batch samples.
  FeatVec mean_feature() const;

 private:
  const Environment& env_;
  std::shared_ptr<const CovStats> cov_;
  StageSamples samples_;
  Vec next_bonus_;
  Vec next_probs_;
  double beta_;
  double gamma_;
  kernels::Exec exec_;
};

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct MdpeOptions {
  int rounds = 1;
  int tau = 1;
  double beta = 1.0;
  double eta = 1.0;
  kernels::Exec exec = kernels::Exec::parallel;
};

/// Per-round view handed to an observer.
struct RoundView {
  int round = 0;
  int batch = 0;
  /// Finite: Q_1..Q_H. Discounted: single entry Q^{k+1}.
  std::span<const FunctionalQ> q;
  /// Discounted only: Q^k defining V^k (null at the first round) and its policy.
  const FunctionalQ* previous_q = nullptr;
  const Policy* previous_policy = nullptr;
  /// Policy played in this round.
  const Policy* policy = nullptr;
  std::span<const WeightVec> cost_w;
};

using RoundObserver = std::function<void(const RoundView&)>;

struct MdpeResult {
  /// Policy played at each of the floor(K / tau) * tau rounds.
  std::vector<PolicyPtr> round_policies;
  /// pi^(1) .. pi^(J + 1).
  std::vector<PolicyPtr> batch_policies;
  /// Bonus mass per round.
  MetricTrace trace;
};

MdpeResult mdpe_finite_run(EnvPtr env, const CostStream& costs, int horizon, const MdpeOptions& options,
                           std::uint64_t seed, const RoundObserver& observer = {});

MdpeResult mdpe_infinite_run(EnvPtr env, const CostStream& costs, double gamma, int max_len,
                             const MdpeOptions& options, std::uint64_t seed, const RoundObserver& observer = {});

}  // namespace advil
