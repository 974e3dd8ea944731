#include "advil/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace advil::kernels {

namespace {

Eigen::Index block_count(Eigen::Index n) { return (n + kReductionBlock - 1) / kReductionBlock; }

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

Mat gram_plus_identity(const Eigen::Ref<const Mat>& rows, Exec exec) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index d = rows.cols();
  Mat lambda = Mat::Identity(d, d);
  if (exec == Exec::serial) {
    for (Eigen::Index i = 0; i < n; ++i) lambda.noalias() += rows.row(i).transpose() * rows.row(i);
    return lambda;
  }
  const Eigen::Index blocks = block_count(n);
  std::vector<Mat> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index start = b * kReductionBlock;
    const Eigen::Index len = std::min(kReductionBlock, n - start);
    const auto block = rows.middleRows(start, len);
    partial[static_cast<std::size_t>(b)] = block.transpose() * block;
  }
  for (const Mat& p : partial) lambda += p;
  return lambda;
}

Vec weighted_row_sum(const Eigen::Ref<const Mat>& rows, std::span<const double> weights, Exec exec) {
  const Eigen::Index n = rows.rows();
  require(static_cast<Eigen::Index>(weights.size()) == n, "weight count must match row count");
  const Eigen::Map<const Vec> y(weights.data(), n);
  if (exec == Exec::serial) {
    Vec total = Vec::Zero(rows.cols());
    for (Eigen::Index i = 0; i < n; ++i) total.noalias() += y[i] * rows.row(i).transpose();
    return total;
  }
  const Eigen::Index blocks = block_count(n);
  std::vector<Vec> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index start = b * kReductionBlock;
    const Eigen::Index len = std::min(kReductionBlock, n - start);
    partial[static_cast<std::size_t>(b)] = rows.middleRows(start, len).transpose() * y.segment(start, len);
  }
  Vec total = Vec::Zero(rows.cols());
  for (const Vec& p : partial) total += p;
  return total;
}

void for_each_index(std::int64_t n, const std::function<void(std::int64_t)>& fn, Exec exec) {
  if (exec == Exec::serial) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

Mat policy_table(const Policy& policy, std::span<const State> states, int stage, Exec exec) {
  const auto n = static_cast<std::int64_t>(states.size());
  const int n_actions = policy.num_actions();
  // Row-major so each row is a contiguous span.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> table(n, n_actions);
  for_each_index(
      n,
      [&](std::int64_t i) {
        policy.distribution(states[static_cast<std::size_t>(i)], stage,
                            std::span<double>(table.row(i).data(), static_cast<std::size_t>(n_actions)));
      },
      exec);
  return table;
}

std::vector<Trajectory> rollouts(const Environment& env, const Policy& policy, const HorizonSpec& horizon,
                                 int n_episodes, std::uint64_t seed, Exec exec) {
  require(n_episodes >= 0, "episode count must be non-negative");
  std::vector<Trajectory> out(static_cast<std::size_t>(n_episodes));
  for_each_index(
      n_episodes,
      [&](std::int64_t i) {
        Rng rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(i)));
        out[static_cast<std::size_t>(i)] = sample_episode(env, policy, horizon, rng);
      },
      exec);
  return out;
}

std::vector<Transition> occupancy_samples(const Environment& env, const Policy& policy, double gamma, int max_len,
                                          int n_samples, std::uint64_t seed, Exec exec) {
  require(n_samples >= 0, "sample count must be non-negative");
  std::vector<Transition> out(static_cast<std::size_t>(n_samples));
  for_each_index(
      n_samples,
      [&](std::int64_t i) {
        Rng rng(derive_seed(seed, "occupancy", static_cast<std::uint64_t>(i)));
        out[static_cast<std::size_t>(i)] = sample_occupancy(env, policy, gamma, rng, max_len);
      },
      exec);
  return out;
}

std::vector<double> episode_costs(const Environment& env, const Policy& policy, const HorizonSpec& horizon,
                                  int n_episodes, std::uint64_t seed, const CostFn& cost, double discount,
                                  Exec exec) {
  require(n_episodes >= 0, "episode count must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(n_episodes));
  for_each_index(
      n_episodes,
      [&](std::int64_t i) {
        Rng rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(i)));
        const Trajectory traj = sample_episode(env, policy, horizon, rng);
        double total = 0.0;
        double weight = 1.0;
        for (const Transition& t : traj.steps) {
          total += weight * (cost ? cost(t.state, t.action) : t.cost);
          weight *= discount;
        }
        out[static_cast<std::size_t>(i)] = total;
      },
      exec);
  return out;
}

Vec row_bonus(const Eigen::Ref<const Mat>& rows, const CovStats& cov, double beta, Exec exec) {
  require(beta >= 0.0, "bonus scale must be non-negative");
  const Eigen::Index n = rows.rows();
  require(rows.cols() == cov.dim(), "feature dimension does not match covariance");
  Vec out(n);
  if (exec == Exec::serial) {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = beta * std::sqrt(std::max(0.0, cov.quad_inv(rows.row(i).transpose())));
    return out;
  }
  const Mat& inv = cov.inverse();
  const Eigen::Index blocks = block_count(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < blocks; ++b) {
    const Eigen::Index start = b * kReductionBlock;
    const Eigen::Index len = std::min(kReductionBlock, n - start);
    const auto block = rows.middleRows(start, len);
    const Mat projected = block * inv;
    const Vec quad = (projected.array() * block.array()).rowwise().sum();
    for (Eigen::Index i = 0; i < len; ++i) out[start + i] = beta * std::sqrt(std::max(0.0, quad[i]));
  }
  return out;
}

Vec stage_values(const Eigen::Ref<const Mat>& phi, const Vec& linear, const Vec& bonus, const Vec* probs, const ClipRange& range,
                 int num_actions, Exec exec) {
  require(num_actions >= 1, "need at least one action");
  require(phi.rows() % num_actions == 0, "feature rows must be a multiple of the action count");
  require(bonus.size() == phi.rows(), "bonus size must match feature rows");
  require(probs == nullptr || probs->size() == phi.rows(), "probability size must match feature rows");
  const Eigen::Index n = phi.rows() / num_actions;
  Vec out(n);
  auto one = [&](Eigen::Index i) {
    double acc = probs != nullptr ? 0.0 : std::numeric_limits<double>::infinity();
    for (int a = 0; a < num_actions; ++a) {
      const Eigen::Index r = i * num_actions + a;
      const double q = clip(phi.row(r).dot(linear) - bonus[r], range);
      if (probs != nullptr) {
        acc += (*probs)[r] * q;
      } else {
        acc = std::min(acc, q);
      }
    }
    out[i] = acc;
  };
  if (exec == Exec::serial) {
    for (Eigen::Index i = 0; i < n; ++i) one(i);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) one(i);
  }
  return out;
}

}  // namespace advil::kernels
