#pragma once

#include <span>
#include <utility>
#include <vector>

#include "advil/adversarial.hpp"
#include "advil/envs.hpp"
#include "advil/kernels.hpp"
#include "advil/policy.hpp"

namespace advil {

struct Estimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Estimate mean_stderr(std::span<const double> samples);

enum class McEstimator {
  /// Undiscounted cost sum over restart-terminated episodes.
  geometric,
  /// Discounted cost sum over max_len steps without restarts.
  fixed_horizon,
};

/// Monte-Carlo value of `policy`. Episode i uses derive_seed(seed, "episode", i),
/// so two policies evaluated with one seed share their random numbers.
/// A null cost uses the raw environment cost.
Estimate mc_value(const Environment& env, const Policy& policy, const HorizonSpec& horizon, int n_episodes,
                  std::uint64_t seed, const kernels::CostFn& cost = {},
                  McEstimator estimator = McEstimator::geometric, kernels::Exec exec = kernels::Exec::parallel);

/// (J_pi - J_uniform) / (J_expert - J_uniform) with returns J = -cost.
double normalized_return(double j_pi, double j_expert, double j_uniform);

/// Least-squares slope of log(value) against log(K).
double loglog_slope(std::span<const std::pair<double, double>> points);

// ---------------------------------------------------------------------------
// Exact tabular quantities
// ---------------------------------------------------------------------------

struct RegretTrace {
  std::vector<double> per_round;
  std::vector<double> cumulative;
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

/// Caches per-stage tables of policies that repeat across rounds.
class PolicyTableCache {
 public:
  PolicyTableCache(const TabularOracle& oracle, int stages) : oracle_(oracle), stages_(stages) {}
  const std::vector<Mat>& tables(const PolicyPtr& policy);

 private:
  const TabularOracle& oracle_;
  int stages_;
  std::vector<std::pair<PolicyPtr, std::vector<Mat>>> cache_;
};

/// Per-stage cost tables of round k.
std::vector<Mat> stage_costs(const TabularOracle& oracle, const CostStream& costs, int round, int horizon);

/// sum_k V_1^{pi_k}(c_k) - V_1^{comparator}(c_k), finite horizon.
RegretTrace exact_regret_finite(const TabularOracle& oracle, std::span<const PolicyPtr> policies,
                                const CostStream& costs, const std::vector<Mat>& comparator, int horizon);
/// Deterministic per-stage policy minimizing sum_k V_1^pi(c_k).
std::vector<Mat> best_fixed_finite(const TabularOracle& oracle, const CostStream& costs, int rounds, int horizon);

/// sum_k V^{pi_k}(c_k) - V^{comparator}(c_k) from the initial distribution, discounted.
RegretTrace exact_regret_discounted(const TabularOracle& oracle, std::span<const PolicyPtr> policies,
                                    const CostStream& costs, const Mat& comparator, double gamma);
Mat best_fixed_discounted(const TabularOracle& oracle, const CostStream& costs, int rounds, double gamma);

/// Terms of <c_true, d^pi - d^E> = <c_w, d^pi - d^E> + <w_true - w, Phi^T d^pi - Phi^T d^E>,
/// each computed along its own path.
struct DecompositionTerms {
  double total = 0.0;
  double policy_term = 0.0;
  double cost_term = 0.0;
};

/// Optimism sandwich -2 b <= Q - c - P V <= 0 checked at every (s, a) of a
/// round view against exact transitions.
struct SandwichCount {
  long checked = 0;
  long violations = 0;
  /// Largest Q - c - P V seen (should stay <= 0).
  double max_upper = -1e300;
  /// Smallest Q - c - P V + 2 b seen (should stay >= 0).
  double min_lower = 1e300;

  void merge(const SandwichCount& other);
};

/// Finite horizon: every stage h with V_{h+1} = <pi_{h+1}, Q_{h+1}> and V_{H+1} = 0.
SandwichCount sandwich_finite(const TabularOracle& oracle, const RoundView& view, double tol = 1e-9);
/// Discounted: Q^{k+1} against c^k + gamma P V^k with V^k from the carried Q.
SandwichCount sandwich_discounted(const TabularOracle& oracle, const RoundView& view, double gamma,
                                  double tol = 1e-9);

DecompositionTerms regret_decomposition(const TabularOracle& oracle, const Mat& pi, const Mat& pi_expert,
                                        const WeightVec& w, const WeightVec& w_true, double gamma);

}  // namespace advil
