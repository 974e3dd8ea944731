#include "advil/envs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advil {

// --------------------------------------------------------------- gridworld

namespace {

constexpr double kGridActionVec[kGridActions][2] = {{0.01, 0.0}, {0.0, 0.01}, {-0.01, 0.0}, {0.0, -0.01}};
// Raw cost lies in [-100, 88]: the quadratic part is at most 8 and the bump at most 80.
constexpr double kGridCostLo = -100.0;
constexpr double kGridCostHi = 88.0;

double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

void grid_features_into(const State& s, int action, Eigen::Ref<Vec> out) {
  const double r2 = s.x * s.x + s.y * s.y;
  out[0] = s.x * s.x;
  out[1] = s.y * s.y;
  out[2] = s.x;
  out[3] = s.y;
  out[4] = std::exp(-8.0 * r2);
  out[5] = grid_goal_corner(s.x, s.y) ? 1.0 : 0.0;
  for (int a = 0; a < kGridActions; ++a) out[6 + a] = (a == action) ? 1.0 : 0.0;
}

}  // namespace

bool grid_goal_corner(double x, double y) { return x >= 0.95 && x <= 1.0 && y >= -1.0 && y <= -0.95; }

FeatVec grid_features(const State& s, int action) {
  if (action < 0 || action >= kGridActions) throw InvalidInput("gridworld action out of range");
  FeatVec phi(kGridFeatureDim);
  grid_features_into(s, action, phi);
  return phi;
}

double grid_cost(const State& s, int) {
  const double dx = s.x - 1.0;
  const double dy = s.y + 1.0;
  const double bump = 80.0 * std::exp(-8.0 * (s.x * s.x + s.y * s.y));
  return dx * dx + dy * dy + bump - (grid_goal_corner(s.x, s.y) ? 100.0 : 0.0);
}

State grid_step(const State& s, int action, double sigma, Rng& rng, double step_scale) {
  if (action < 0 || action >= kGridActions) throw InvalidInput("gridworld action out of range");
  const bool pushed = rng.bernoulli(sigma);
  State next = s;
  if (!pushed) {
    next.x = clamp_unit(s.x + step_scale * kGridActionVec[action][0] / 10.0);
    next.y = clamp_unit(s.y + step_scale * kGridActionVec[action][1] / 10.0);
    return next;
  }
  const double norm = std::hypot(s.x, s.y);
  if (norm == 0.0) return s;  // push direction undefined at the origin
  next.x = clamp_unit(s.x - s.x / (10.0 * norm));
  next.y = clamp_unit(s.y - s.y / (10.0 * norm));
  return next;
}

Gridworld::Gridworld(GridworldParams params) : params_(params) {
  require(params.sigma >= 0.0 && params.sigma <= 1.0, "gridworld sigma must lie in [0, 1]");
  require(params.step_scale > 0.0, "gridworld step scale must be positive");
}

void Gridworld::features_into(const State& s, int action, Eigen::Ref<Vec> out) const {
  check_action(action);
  grid_features_into(s, action, out);
}

double Gridworld::cost(const State& s, int action) const { return grid_cost(s, action); }

State Gridworld::initial_state(Rng&) const { return State{-1.0, 1.0, 0}; }

State Gridworld::step(const State& s, int action, Rng& rng) const {
  return grid_step(s, action, params_.sigma, rng, params_.step_scale);
}

CostNormalizer Gridworld::cost_normalizer() const { return CostNormalizer::from_range(kGridCostLo, kGridCostHi); }

WeightVec Gridworld::raw_cost_weights() {
  WeightVec w(kGridFeatureDim);
  w << 1.0, 1.0, -2.0, 2.0, 80.0, -100.0, 2.0, 2.0, 2.0, 2.0;
  return w;
}

std::optional<WeightVec> Gridworld::true_cost_weights() const {
  const CostNormalizer norm = cost_normalizer();
  WeightVec w = raw_cost_weights() / norm.scale;
  w.tail(kGridActions).array() -= norm.offset / norm.scale;
  return w;
}

// ------------------------------------------------------------------ bandit

LinearBandit::LinearBandit(Mat features, WeightVec w_true) : features_(std::move(features)), w_true_(std::move(w_true)) {
  require(features_.rows() >= 2, "bandit needs at least two actions");
  require(features_.cols() == w_true_.size(), "bandit weight dimension mismatch");
  require(features_.allFinite() && w_true_.allFinite(), "bandit parameters must be finite");
}

void LinearBandit::features_into(const State&, int action, Eigen::Ref<Vec> out) const {
  check_action(action);
  out = features_.row(action).transpose();
}

double LinearBandit::cost(const State&, int action) const {
  check_action(action);
  return features_.row(action).dot(w_true_);
}

State LinearBandit::initial_state(Rng&) const { return State{}; }

State LinearBandit::step(const State& s, int action, Rng&) const {
  check_action(action);
  return s;
}

WeightVec LinearBandit::alternating_weights(int dim) {
  require(dim >= 1, "bandit dimension must be positive");
  WeightVec w(dim);
  for (int i = 1; i <= dim; ++i) w[i - 1] = (i % 2 == 1) ? 0.0 : 1.0;
  return w;
}

Mat LinearBandit::gaussian_features(int num_actions, int dim, Rng& rng) {
  require(num_actions >= 2 && dim >= 1, "bandit shape must be positive");
  Mat phi(num_actions, dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int a = 0; a < num_actions; ++a)
    for (int i = 0; i < dim; ++i) phi(a, i) = scale * rng.normal();
  return phi;
}

// ----------------------------------------------------------------- tabular

TabularEnv::TabularEnv(int num_states, int num_actions, Mat transitions, Mat cost, Vec initial)
    : num_states_(num_states),
      num_actions_(num_actions),
      transitions_(std::move(transitions)),
      cost_(std::move(cost)),
      initial_(std::move(initial)) {
  require(num_states >= 1 && num_actions >= 1, "tabular env needs states and actions");
  require(transitions_.rows() == num_states * num_actions && transitions_.cols() == num_states,
          "transition matrix must be (S*A) x S");
  require(cost_.rows() == num_states && cost_.cols() == num_actions, "cost table must be S x A");
  require(initial_.size() == num_states, "initial distribution must have S entries");
  require((transitions_.array() >= 0.0).all() && (initial_.array() >= 0.0).all(), "probabilities must be >= 0");
  require(((transitions_.rowwise().sum().array() - 1.0).abs() < 1e-9).all(), "transition rows must sum to 1");
  require(std::abs(initial_.sum() - 1.0) < 1e-9, "initial distribution must sum to 1");
  transition_rows_.resize(static_cast<std::size_t>(transitions_.rows()));
  for (Eigen::Index r = 0; r < transitions_.rows(); ++r) {
    auto& row = transition_rows_[static_cast<std::size_t>(r)];
    row.resize(static_cast<std::size_t>(num_states));
    for (int s = 0; s < num_states; ++s) row[static_cast<std::size_t>(s)] = transitions_(r, s);
  }
}

void TabularEnv::features_into(const State& s, int action, Eigen::Ref<Vec> out) const {
  check_action(action);
  if (s.id < 0 || s.id >= num_states_) throw InvalidInput("tabular state out of range");
  out.setZero();
  out[index(s.id, action)] = 1.0;
}

double TabularEnv::cost(const State& s, int action) const {
  check_action(action);
  return cost_(s.id, action);
}

State TabularEnv::initial_state(Rng& rng) const {
  State s;
  s.id = rng.categorical(std::span<const double>(initial_.data(), static_cast<std::size_t>(initial_.size())));
  return s;
}

State TabularEnv::step(const State& s, int action, Rng& rng) const {
  check_action(action);
  State next;
  next.id = rng.categorical(transition_rows_[static_cast<std::size_t>(index(s.id, action))]);
  return next;
}

std::optional<WeightVec> TabularEnv::true_cost_weights() const {
  WeightVec w(feature_dim());
  for (int s = 0; s < num_states_; ++s)
    for (int a = 0; a < num_actions_; ++a) w[index(s, a)] = cost_(s, a);
  return w;
}

std::shared_ptr<TabularEnv> TabularEnv::random(int num_states, int num_actions, int branching, Rng& rng) {
  require(branching >= 1 && branching <= num_states, "branching must lie in [1, S]");
  Mat p = Mat::Zero(num_states * num_actions, num_states);
  std::vector<int> order(static_cast<std::size_t>(num_states));
  for (int r = 0; r < num_states * num_actions; ++r) {
    std::iota(order.begin(), order.end(), 0);
    // Partial Fisher-Yates for the successor set.
    for (int i = 0; i < branching; ++i) {
      const int j = i + static_cast<int>(rng.uniform() * (num_states - i));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    double total = 0.0;
    for (int i = 0; i < branching; ++i) {
      const double weight = 0.1 + rng.uniform();
      p(r, order[static_cast<std::size_t>(i)]) = weight;
      total += weight;
    }
    p.row(r) /= total;
  }
  Mat cost(num_states, num_actions);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) cost(s, a) = 2.0 * rng.uniform() - 1.0;
  Vec initial = Vec::Zero(num_states);
  initial[0] = 1.0;
  return std::make_shared<TabularEnv>(num_states, num_actions, std::move(p), std::move(cost), std::move(initial));
}

std::shared_ptr<TabularEnv> TabularEnv::single_state(double cost) {
  return std::make_shared<TabularEnv>(1, 1, Mat::Ones(1, 1), Mat::Constant(1, 1, cost), Vec::Ones(1));
}

// ------------------------------------------------------------------ oracle

TabularOracle::TabularOracle(std::shared_ptr<const TabularEnv> env) : env_(std::move(env)) {
  require(env_ != nullptr, "oracle needs an environment");
}

Mat TabularOracle::policy_table(const Policy& policy, int stage) const {
  const int S = num_states();
  const int A = num_actions();
  require(policy.num_actions() == A, "policy action count mismatch");
  Mat table(S, A);
  std::vector<double> probs(static_cast<std::size_t>(A));
  for (int s = 0; s < S; ++s) {
    State st;
    st.id = s;
    policy.distribution(st, stage, probs);
    for (int a = 0; a < A; ++a) table(s, a) = probs[static_cast<std::size_t>(a)];
  }
  return table;
}

std::vector<Mat> TabularOracle::policy_tables(const Policy& policy, int horizon) const {
  std::vector<Mat> out;
  out.reserve(static_cast<std::size_t>(horizon));
  for (int h = 0; h < horizon; ++h) out.push_back(policy_table(policy, h));
  return out;
}

Mat TabularOracle::policy_transition(const Mat& pi) const {
  const int S = num_states();
  const int A = num_actions();
  Mat p_pi = Mat::Zero(S, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) p_pi.row(s) += pi(s, a) * env_->transitions().row(env_->index(s, a));
  return p_pi;
}

Mat TabularOracle::expected_next(const Vec& values) const {
  const Vec flat = env_->transitions() * values;
  Mat out(num_states(), num_actions());
  for (int s = 0; s < num_states(); ++s)
    for (int a = 0; a < num_actions(); ++a) out(s, a) = flat[env_->index(s, a)];
  return out;
}

Mat TabularOracle::cost_from_weights(const WeightVec& w) const {
  require(w.size() == env_->feature_dim(), "weight dimension mismatch");
  Mat out(num_states(), num_actions());
  Vec phi(env_->feature_dim());
  for (int s = 0; s < num_states(); ++s) {
    State st;
    st.id = s;
    for (int a = 0; a < num_actions(); ++a) {
      env_->features_into(st, a, phi);
      out(s, a) = phi.dot(w);
    }
  }
  return out;
}

Vec TabularOracle::feature_expectation(const Mat& measure) const {
  Vec total = Vec::Zero(env_->feature_dim());
  Vec phi(env_->feature_dim());
  for (int s = 0; s < num_states(); ++s) {
    State st;
    st.id = s;
    for (int a = 0; a < num_actions(); ++a) {
      env_->features_into(st, a, phi);
      total += measure(s, a) * phi;
    }
  }
  return total;
}

Vec TabularOracle::value(const Mat& pi, const Mat& cost, double gamma) const {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  const int S = num_states();
  const Vec c_pi = (pi.array() * cost.array()).rowwise().sum();
  const Mat system = Mat::Identity(S, S) - gamma * policy_transition(pi);
  Eigen::PartialPivLU<Mat> lu(system);
  return lu.solve(c_pi);
}

Mat TabularOracle::occupancy(const Mat& pi, double gamma) const {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  const int S = num_states();
  const Mat system = Mat::Identity(S, S) - gamma * policy_transition(pi).transpose();
  Eigen::PartialPivLU<Mat> lu(system);
  const Vec state_occ = lu.solve((1.0 - gamma) * env_->initial());
  Mat out(S, num_actions());
  for (int s = 0; s < S; ++s) out.row(s) = state_occ[s] * pi.row(s);
  return out;
}

double TabularOracle::initial_value(const Mat& pi, const Mat& cost, double gamma) const {
  return env_->initial().dot(value(pi, cost, gamma));
}

Mat TabularOracle::optimal_policy(const Mat& cost, double gamma) const {
  const int S = num_states();
  const int A = num_actions();
  Mat pi = Mat::Zero(S, A);
  pi.col(0).setOnes();
  for (int iter = 0; iter < 10000; ++iter) {
    const Vec v = value(pi, cost, gamma);
    const Mat q = cost + gamma * expected_next(v);
    Mat next = Mat::Zero(S, A);
    bool stable = true;
    for (int s = 0; s < S; ++s) {
      int current = 0;
      pi.row(s).maxCoeff(&current);
      int best = current;
      for (int a = 0; a < A; ++a) {
        if (q(s, a) < q(s, best) - 1e-12) best = a;
      }
      if (best != current) stable = false;
      next(s, best) = 1.0;
    }
    pi = next;
    if (stable) return pi;
  }
  throw InternalError("policy iteration did not converge");
}

std::vector<Vec> TabularOracle::values_finite(const std::vector<Mat>& pis, const std::vector<Mat>& costs) const {
  require(pis.size() == costs.size() && !pis.empty(), "finite horizon policy/cost stages mismatch");
  const std::size_t horizon = pis.size();
  std::vector<Vec> values(horizon + 1, Vec::Zero(num_states()));
  for (std::size_t h = horizon; h-- > 0;) {
    const Mat q = costs[h] + expected_next(values[h + 1]);
    values[h] = (pis[h].array() * q.array()).rowwise().sum();
  }
  return values;
}

std::vector<Mat> TabularOracle::occupancy_finite(const std::vector<Mat>& pis) const {
  const int S = num_states();
  std::vector<Mat> out;
  Vec state_dist = env_->initial();
  for (const Mat& pi : pis) {
    Mat d(S, num_actions());
    for (int s = 0; s < S; ++s) d.row(s) = state_dist[s] * pi.row(s);
    out.push_back(d);
    state_dist = policy_transition(pi).transpose() * state_dist;
  }
  return out;
}

double TabularOracle::initial_value_finite(const std::vector<Mat>& pis, const std::vector<Mat>& costs) const {
  return env_->initial().dot(values_finite(pis, costs).front());
}

std::vector<Mat> TabularOracle::optimal_policy_finite(const std::vector<Mat>& costs) const {
  const int S = num_states();
  const int A = num_actions();
  std::vector<Mat> pis(costs.size(), Mat::Zero(S, A));
  Vec next_v = Vec::Zero(S);
  for (std::size_t h = costs.size(); h-- > 0;) {
    const Mat q = costs[h] + expected_next(next_v);
    Vec v(S);
    for (int s = 0; s < S; ++s) {
      int best = 0;
      for (int a = 1; a < A; ++a)
        if (q(s, a) < q(s, best)) best = a;
      pis[h](s, best) = 1.0;
      v[s] = q(s, best);
    }
    next_v = v;
  }
  return pis;
}

// --------------------------------------------------------------- rollouts

Trajectory sample_episode_finite(const Environment& env, const Policy& policy, int horizon, Rng& rng) {
  require(horizon >= 1, "finite episode needs H >= 1");
  Trajectory traj;
  traj.steps.reserve(static_cast<std::size_t>(horizon));
  State s = env.initial_state(rng);
  for (int h = 0; h < horizon; ++h) {
    const int a = policy.sample(s, h, rng);
    const State next = env.step(s, a, rng);
    traj.steps.push_back({s, a, next, env.cost(s, a), h});
    s = next;
  }
  return traj;
}

Trajectory sample_episode_discounted(const Environment& env, const Policy& policy, double gamma, Rng& rng,
                                     int max_len, bool restart) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(max_len >= 1, "max_len must be positive");
  Trajectory traj;
  State s = env.initial_state(rng);
  for (int t = 0; t < max_len; ++t) {
    const int a = policy.sample(s, 0, rng);
    const State next = env.step(s, a, rng);
    traj.steps.push_back({s, a, next, env.cost(s, a), t});
    if (restart && rng.bernoulli(1.0 - gamma)) break;
    s = next;
  }
  return traj;
}

Transition sample_occupancy(const Environment& env, const Policy& policy, double gamma, Rng& rng, int max_len) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(max_len >= 1, "max_len must be positive");
  State s = env.initial_state(rng);
  Transition last;
  for (int t = 0; t < max_len; ++t) {
    const int a = policy.sample(s, 0, rng);
    const State next = env.step(s, a, rng);
    last = {s, a, next, env.cost(s, a), t};
    if (rng.bernoulli(1.0 - gamma)) break;
    s = next;
  }
  return last;
}

Trajectory sample_episode(const Environment& env, const Policy& policy, const HorizonSpec& horizon, Rng& rng) {
  if (horizon.is_finite()) return sample_episode_finite(env, policy, horizon.horizon, rng);
  return sample_episode_discounted(env, policy, horizon.gamma, rng, horizon.max_len, horizon.restart);
}

}  // namespace advil
