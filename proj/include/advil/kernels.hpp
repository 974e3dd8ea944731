#pragma once

// Data-parallel kernels. Each kernel has a plain serial reference path and an
// OpenMP path. Map-style kernels (rollouts, per-state evaluation) write into
// pre-sized slots and give bit-identical results on both paths. Reductions use
// a fixed block partition, so the parallel result does not depend on the
// thread count; it agrees with the serial reference to rounding.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "advil/core.hpp"
#include "advil/covariance.hpp"
#include "advil/envs.hpp"
#include "advil/policy.hpp"

namespace advil::kernels {

enum class Exec { serial, parallel };

inline constexpr Eigen::Index kReductionBlock = 256;

/// I + sum_i r_i r_i^T over the rows r_i of `rows`.
Mat gram_plus_identity(const Eigen::Ref<const Mat>& rows, Exec exec = Exec::parallel);

/// sum_i y_i r_i over the rows r_i of `rows`.
Vec weighted_row_sum(const Eigen::Ref<const Mat>& rows, std::span<const double> weights, Exec exec = Exec::parallel);

/// Row i = pi_stage(. | states[i]).
Mat policy_table(const Policy& policy, std::span<const State> states, int stage, Exec exec = Exec::parallel);

/// Calls fn(i) for i in [0, n). fn must only write to slot i of its outputs.
void for_each_index(std::int64_t n, const std::function<void(std::int64_t)>& fn, Exec exec = Exec::parallel);

/// Episode i runs on Rng(derive_seed(seed, "episode", i)).
std::vector<Trajectory> rollouts(const Environment& env, const Policy& policy, const HorizonSpec& horizon,
                                 int n_episodes, std::uint64_t seed, Exec exec = Exec::parallel);

/// Sample i runs on Rng(derive_seed(seed, "occupancy", i)).
std::vector<Transition> occupancy_samples(const Environment& env, const Policy& policy, double gamma, int max_len,
                                          int n_samples, std::uint64_t seed, Exec exec = Exec::parallel);

using CostFn = std::function<double(const State&, int)>;

/// Per-episode sum_t discount^t c(s_t, a_t) of independent rollouts (same
/// seeding as rollouts()). A null cost uses the raw environment cost.
std::vector<double> episode_costs(const Environment& env, const Policy& policy, const HorizonSpec& horizon,
                                  int n_episodes, std::uint64_t seed, const CostFn& cost, double discount = 1.0,
                                  Exec exec = Exec::parallel);

/// beta * ||r_i||_{Lambda^{-1}} for every row r_i.
Vec row_bonus(const Eigen::Ref<const Mat>& rows, const CovStats& cov, double beta, Exec exec = Exec::parallel);

/// Values at a batch of states from a shared Q. Row i*A + a of `phi` holds
/// phi(s_i, a); q(i, a) = clip(phi . linear - bonus). With `probs` (same
/// layout) out[i] = sum_a probs * q, otherwise out[i] = min_a q.
Vec stage_values(const Eigen::Ref<const Mat>& phi, const Vec& linear, const Vec& bonus, const Vec* probs, const ClipRange& range,
                 int num_actions, Exec exec = Exec::parallel);

int max_threads();

}  // namespace advil::kernels
