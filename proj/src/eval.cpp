#include "advil/eval.hpp"

#include <algorithm>
#include <cmath>

namespace advil {

Estimate mean_stderr(std::span<const double> samples) {
  require(!samples.empty(), "need at least one sample");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  if (samples.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

Estimate mc_value(const Environment& env, const Policy& policy, const HorizonSpec& horizon, int n_episodes,
                  std::uint64_t seed, const kernels::CostFn& cost, McEstimator estimator, kernels::Exec exec) {
  require(n_episodes >= 1, "need at least one episode");
  std::vector<double> returns;
  if (horizon.is_finite() || estimator == McEstimator::geometric) {
    returns = kernels::episode_costs(env, policy, horizon, n_episodes, seed, cost, 1.0, exec);
  } else {
    returns = kernels::episode_costs(env, policy, HorizonSpec::finite(horizon.max_len), n_episodes, seed, cost,
                                     horizon.gamma, exec);
  }
  return mean_stderr(returns);
}

double normalized_return(double j_pi, double j_expert, double j_uniform) {
  const double span = j_expert - j_uniform;
  require(std::isfinite(span) && span != 0.0, "expert and uniform returns must differ");
  return (j_pi - j_uniform) / span;
}

double loglog_slope(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 2, "slope needs at least two points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [k, v] : points) {
    require(k > 0.0 && v > 0.0, "slope needs positive coordinates");
    sx += std::log(k);
    sy += std::log(v);
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [k, v] : points) {
    sxy += (std::log(k) - mx) * (std::log(v) - my);
    sxx += (std::log(k) - mx) * (std::log(k) - mx);
  }
  require(sxx > 0.0, "slope needs at least two distinct K");
  return sxy / sxx;
}

const std::vector<Mat>& PolicyTableCache::tables(const PolicyPtr& policy) {
  for (const auto& [p, t] : cache_)
    if (p == policy) return t;
  cache_.emplace_back(policy, oracle_.policy_tables(*policy, stages_));
  return cache_.back().second;
}

std::vector<Mat> stage_costs(const TabularOracle& oracle, const CostStream& costs, int round, int horizon) {
  std::vector<Mat> out;
  for (int h = 0; h < horizon; ++h)
    out.push_back(oracle.cost_from_weights(costs.weights(round, costs.stages() == 1 ? 0 : h)));
  return out;
}

namespace {

RegretTrace accumulate(std::vector<double> per_round) {
  RegretTrace r;
  r.per_round = std::move(per_round);
  double total = 0.0;
  for (double x : r.per_round) {
    total += x;
    r.cumulative.push_back(total);
  }
  return r;
}

}  // namespace

RegretTrace exact_regret_finite(const TabularOracle& oracle, std::span<const PolicyPtr> policies,
                                const CostStream& costs, const std::vector<Mat>& comparator, int horizon) {
  require(static_cast<int>(policies.size()) <= costs.rounds(), "more policies than cost rounds");
  PolicyTableCache cache(oracle, horizon);
  std::vector<double> per_round;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const auto c = stage_costs(oracle, costs, static_cast<int>(k), horizon);
    per_round.push_back(oracle.initial_value_finite(cache.tables(policies[k]), c) -
                        oracle.initial_value_finite(comparator, c));
  }
  return accumulate(std::move(per_round));
}

std::vector<Mat> best_fixed_finite(const TabularOracle& oracle, const CostStream& costs, int rounds, int horizon) {
  require(rounds >= 1 && rounds <= costs.rounds(), "round count out of range");
  std::vector<Mat> total(static_cast<std::size_t>(horizon),
                         Mat::Zero(oracle.num_states(), oracle.num_actions()));
  for (int k = 0; k < rounds; ++k) {
    const auto c = stage_costs(oracle, costs, k, horizon);
    for (int h = 0; h < horizon; ++h) total[static_cast<std::size_t>(h)] += c[static_cast<std::size_t>(h)];
  }
  return oracle.optimal_policy_finite(total);
}

RegretTrace exact_regret_discounted(const TabularOracle& oracle, std::span<const PolicyPtr> policies,
                                    const CostStream& costs, const Mat& comparator, double gamma) {
  require(static_cast<int>(policies.size()) <= costs.rounds(), "more policies than cost rounds");
  PolicyTableCache cache(oracle, 1);
  std::vector<double> per_round;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const Mat c = oracle.cost_from_weights(costs.weights(static_cast<int>(k), 0));
    per_round.push_back(oracle.initial_value(cache.tables(policies[k]).front(), c, gamma) -
                        oracle.initial_value(comparator, c, gamma));
  }
  return accumulate(std::move(per_round));
}

Mat best_fixed_discounted(const TabularOracle& oracle, const CostStream& costs, int rounds, double gamma) {
  require(rounds >= 1 && rounds <= costs.rounds(), "round count out of range");
  Mat total = Mat::Zero(oracle.num_states(), oracle.num_actions());
  for (int k = 0; k < rounds; ++k) total += oracle.cost_from_weights(costs.weights(k, 0));
  return oracle.optimal_policy(total, gamma);
}

void SandwichCount::merge(const SandwichCount& other) {
  checked += other.checked;
  violations += other.violations;
  max_upper = std::max(max_upper, other.max_upper);
  min_lower = std::min(min_lower, other.min_lower);
}

namespace {

struct QTable {
  Mat value;
  Mat bonus;
};

QTable tabulate(const TabularOracle& oracle, const FunctionalQ& q) {
  const TabularEnv& env = oracle.env();
  QTable t{Mat(oracle.num_states(), oracle.num_actions()), Mat(oracle.num_states(), oracle.num_actions())};
  Vec phi(env.feature_dim());
  for (int s = 0; s < oracle.num_states(); ++s) {
    State st;
    st.id = s;
    for (int a = 0; a < oracle.num_actions(); ++a) {
      env.features_into(st, a, phi);
      t.value(s, a) = q.eval(phi);
      t.bonus(s, a) = q.bonus_at(phi);
    }
  }
  return t;
}

void check_cells(const QTable& q, const Mat& target, double tol, SandwichCount& out) {
  for (Eigen::Index s = 0; s < q.value.rows(); ++s) {
    for (Eigen::Index a = 0; a < q.value.cols(); ++a) {
      const double gap = q.value(s, a) - target(s, a);
      out.max_upper = std::max(out.max_upper, gap);
      out.min_lower = std::min(out.min_lower, gap + 2.0 * q.bonus(s, a));
      ++out.checked;
      if (gap > tol || gap + 2.0 * q.bonus(s, a) < -tol) ++out.violations;
    }
  }
}

}  // namespace

SandwichCount sandwich_finite(const TabularOracle& oracle, const RoundView& view, double tol) {
  require(view.policy != nullptr, "round view has no policy");
  const int horizon = static_cast<int>(view.q.size());
  require(static_cast<int>(view.cost_w.size()) == horizon, "round view cost and Q stages differ");
  SandwichCount out;
  std::vector<QTable> tables;
  for (const FunctionalQ& q : view.q) tables.push_back(tabulate(oracle, q));
  for (int h = 0; h < horizon; ++h) {
    Vec next = Vec::Zero(oracle.num_states());
    if (h + 1 < horizon) {
      const Mat pi = oracle.policy_table(*view.policy, h + 1);
      next = (pi.array() * tables[static_cast<std::size_t>(h + 1)].value.array()).rowwise().sum();
    }
    const Mat target = oracle.cost_from_weights(view.cost_w[static_cast<std::size_t>(h)]) + oracle.expected_next(next);
    check_cells(tables[static_cast<std::size_t>(h)], target, tol, out);
  }
  return out;
}

SandwichCount sandwich_discounted(const TabularOracle& oracle, const RoundView& view, double gamma, double tol) {
  require(view.q.size() == 1 && view.cost_w.size() == 1, "discounted round view has one Q and one cost");
  Vec values = Vec::Zero(oracle.num_states());
  if (view.previous_q != nullptr) {
    require(view.previous_policy != nullptr, "carried Q without its policy");
    const Mat pi = oracle.policy_table(*view.previous_policy, 0);
    values = (pi.array() * tabulate(oracle, *view.previous_q).value.array()).rowwise().sum();
  }
  const Mat target = oracle.cost_from_weights(view.cost_w[0]) + gamma * oracle.expected_next(values);
  SandwichCount out;
  check_cells(tabulate(oracle, view.q[0]), target, tol, out);
  return out;
}

DecompositionTerms regret_decomposition(const TabularOracle& oracle, const Mat& pi, const Mat& pi_expert,
                                        const WeightVec& w, const WeightVec& w_true, double gamma) {
  const Mat d_pi = oracle.occupancy(pi, gamma);
  const Mat d_expert = oracle.occupancy(pi_expert, gamma);
  const Mat c_true = oracle.cost_from_weights(w_true);
  const Mat c_w = oracle.cost_from_weights(w);
  DecompositionTerms out;
  out.total = (c_true.array() * (d_pi - d_expert).array()).sum();
  out.policy_term = (c_w.array() * (d_pi - d_expert).array()).sum();
  out.cost_term = (w_true - w).dot(oracle.feature_expectation(d_pi) - oracle.feature_expectation(d_expert));
  return out;
}

}  // namespace advil
