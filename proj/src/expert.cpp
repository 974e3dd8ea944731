#include "advil/expert.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "advil/metrics.hpp"

namespace advil {

using kernels::Exec;

// ---------------------------------------------------------------------------
// GreedyPolicy
// ---------------------------------------------------------------------------

GreedyPolicy::GreedyPolicy(EnvPtr env, std::vector<FunctionalQ> q) : env_(std::move(env)), q_(std::move(q)) {
  require(env_ != nullptr, "policy needs an environment");
  require(!q_.empty(), "greedy policy needs at least one Q");
  for (const FunctionalQ& f : q_) {
    require(f.cov != nullptr && f.cost_w.size() == env_->feature_dim(), "Q does not match the environment");
    linear_.push_back(f.linear());
  }
}

int GreedyPolicy::action(const State& s, int stage) const {
  const int h = q_.size() == 1 ? 0 : stage;
  if (h < 0 || h >= stages()) throw InvalidInput("policy stage out of range");
  const FunctionalQ& f = q_[static_cast<std::size_t>(h)];
  const Vec& lin = linear_[static_cast<std::size_t>(h)];
  const int n = env_->num_actions();
  Vec phi(env_->feature_dim());
  std::vector<double> values(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    env_->features_into(s, a, phi);
    values[static_cast<std::size_t>(a)] = clip(phi.dot(lin) - bonus(phi, *f.cov, f.beta), f.clip);
  }
  return argmin_lowest(values);
}

void GreedyPolicy::distribution(const State& s, int stage, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(action(s, stage))] = 1.0;
}

std::shared_ptr<const GreedyPolicy> GreedyPolicy::stationary(int stage) const {
  if (stage < 0 || stage >= stages()) throw InvalidInput("policy stage out of range");
  return std::make_shared<const GreedyPolicy>(env_, std::vector<FunctionalQ>{q_[static_cast<std::size_t>(stage)]});
}

// ---------------------------------------------------------------------------
// Expert training
// ---------------------------------------------------------------------------

std::shared_ptr<const GreedyPolicy> train_expert_lsvi_ucb(EnvPtr env, const ExpertTraining& options,
                                                          std::uint64_t seed) {
  require(env != nullptr, "null environment");
  require(options.horizon >= 1 && options.episodes >= 1, "horizon and episode count must be positive");
  require(options.beta >= 0.0, "bonus scale must be non-negative");
  const auto w_true = env->true_cost_weights();
  require(w_true.has_value(), "expert training needs a linearly realizable cost");
  const int horizon = options.horizon;
  const int d = env->feature_dim();
  const std::vector<WeightVec> costs(static_cast<std::size_t>(horizon), *w_true);

  std::vector<std::shared_ptr<StageSamples>> samples;
  std::vector<IncrementalCov> covs;
  for (int h = 0; h < horizon; ++h) {
    samples.push_back(std::make_shared<StageSamples>(d, env->num_actions(), h + 1 < horizon));
    covs.emplace_back(d);
  }

  auto solve = [&](double beta) {
    std::vector<std::shared_ptr<const StageSamples>> views(samples.begin(), samples.end());
    std::vector<std::shared_ptr<const CovStats>> snapshots;
    for (const IncrementalCov& c : covs) snapshots.push_back(std::make_shared<const CovStats>(c.snapshot()));
    const auto models = make_stage_models(std::move(views), std::move(snapshots), nullptr, beta, options.exec);
    return lsvi_finite(models, costs, beta, options.exec);
  };

  auto policy = std::make_shared<const GreedyPolicy>(env, solve(options.beta));
  Vec phi(d);
  for (int k = 0; k < options.episodes; ++k) {
    Rng rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(k)));
    const Trajectory traj = sample_episode_finite(*env, *policy, horizon, rng);
    for (int h = 0; h < horizon; ++h) {
      const Transition& step = traj.steps[static_cast<std::size_t>(h)];
      samples[static_cast<std::size_t>(h)]->append(*env, step);
      env->features_into(step.state, step.action, phi);
      covs[static_cast<std::size_t>(h)].add(phi);
    }
    policy = std::make_shared<const GreedyPolicy>(env, solve(options.beta));
  }
  const double final_beta = options.final_beta < 0.0 ? options.beta : options.final_beta;
  if (final_beta != options.beta) policy = std::make_shared<const GreedyPolicy>(env, solve(final_beta));
  return policy;
}

PolicyPtr make_stochastic_expert(PolicyPtr expert, double mix) {
  return std::make_shared<const MixturePolicy>(std::move(expert), mix);
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

std::size_t ExpertDataset::transitions() const {
  std::size_t n = 0;
  for (const Trajectory& t : trajectories) n += t.size();
  return n;
}

ExpertDataset collect_expert_dataset(const Environment& env, const Policy& expert, int n_trajectories,
                                     const HorizonSpec& horizon, std::uint64_t seed, Exec exec) {
  require(n_trajectories >= 1, "need at least one expert trajectory");
  ExpertDataset ds;
  ds.horizon = horizon;
  ds.trajectories = kernels::rollouts(env, expert, horizon, n_trajectories, seed, exec);
  return ds;
}

void write_dataset(std::ostream& out, const ExpertDataset& ds) {
  if (ds.horizon.is_finite()) {
    out << "# horizon finite " << ds.horizon.horizon << '\n';
  } else {
    out << "# horizon " << (ds.horizon.restart ? "discounted " : "truncated ") << format_number(ds.horizon.gamma) << ' '
        << ds.horizon.max_len << '\n';
  }
  out << kDatasetHeader << '\n';
  for (std::size_t e = 0; e < ds.trajectories.size(); ++e) {
    for (const Transition& t : ds.trajectories[e].steps) {
      out << e << ',' << t.stage << ',' << format_number(t.state.x) << ',' << format_number(t.state.y) << ','
          << t.state.id << ',' << t.action << ',' << format_number(t.next.x) << ',' << format_number(t.next.y) << ','
          << t.next.id << ',' << format_number(t.cost) << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("dataset line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

long parse_int(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("dataset line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
}

}  // namespace

ExpertDataset read_dataset(std::istream& in) {
  ExpertDataset ds;
  std::string line;
  int line_no = 0;
  if (!std::getline(in, line)) throw InvalidInput("dataset is empty");
  ++line_no;
  {
    std::istringstream head(line);
    std::string hash, word, mode;
    head >> hash >> word >> mode;
    if (hash != "#" || word != "horizon") throw InvalidInput("dataset must start with a '# horizon' line");
    if (mode == "finite") {
      int h = 0;
      if (!(head >> h)) throw InvalidInput("dataset horizon line is malformed");
      ds.horizon = HorizonSpec::finite(h);
    } else if (mode == "discounted" || mode == "truncated") {
      double gamma = 0.0;
      int max_len = 0;
      if (!(head >> gamma >> max_len) || max_len < 1) throw InvalidInput("dataset horizon line is malformed");
      ds.horizon = mode == "truncated" ? HorizonSpec::truncated(gamma, max_len) : HorizonSpec::discounted(gamma, max_len);
    } else {
      throw InvalidInput("unknown dataset horizon mode '" + mode + "'");
    }
  }
  if (!std::getline(in, line) || line != kDatasetHeader) throw InvalidInput("dataset header is missing or wrong");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw InvalidInput("dataset line " + std::to_string(line_no) + ": expected 10 fields");
    const long episode = parse_int(f[0], line_no);
    Transition t;
    t.stage = static_cast<int>(parse_int(f[1], line_no));
    t.state = State{parse_double(f[2], line_no), parse_double(f[3], line_no), static_cast<int>(parse_int(f[4], line_no))};
    t.action = static_cast<int>(parse_int(f[5], line_no));
    t.next = State{parse_double(f[6], line_no), parse_double(f[7], line_no), static_cast<int>(parse_int(f[8], line_no))};
    t.cost = parse_double(f[9], line_no);
    const long expected_new = static_cast<long>(ds.trajectories.size());
    if (episode == expected_new) {
      ds.trajectories.emplace_back();
    } else if (episode != expected_new - 1) {
      throw InvalidInput("dataset line " + std::to_string(line_no) + ": episodes must be contiguous");
    }
    Trajectory& traj = ds.trajectories.back();
    if (t.stage != static_cast<int>(traj.size()))
      throw InvalidInput("dataset line " + std::to_string(line_no) + ": steps must be consecutive");
    traj.steps.push_back(t);
  }
  return ds;
}

void save_dataset(const std::string& path, const ExpertDataset& ds) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write dataset file " + path);
  write_dataset(out, ds);
}

ExpertDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open dataset file " + path);
  return read_dataset(in);
}

// ---------------------------------------------------------------------------
// Feature expectations
// ---------------------------------------------------------------------------

namespace {

FeatVec discounted_sum(const Environment& env, const Trajectory& traj, double gamma, Vec& phi) {
  FeatVec total = FeatVec::Zero(env.feature_dim());
  double discount = 1.0;
  for (const Transition& t : traj.steps) {
    env.features_into(t.state, t.action, phi);
    total += discount * phi;
    discount *= gamma;
  }
  return total;
}

}  // namespace

FeatVec feat_exp_discounted(const Environment& env, std::span<const Trajectory> trajectories, double gamma) {
  require(!trajectories.empty(), "feature expectation needs at least one trajectory");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  Vec phi(env.feature_dim());
  FeatVec total = FeatVec::Zero(env.feature_dim());
  for (const Trajectory& traj : trajectories) total += discounted_sum(env, traj, gamma, phi);
  return (1.0 - gamma) / static_cast<double>(trajectories.size()) * total;
}

FeatVec feat_exp_discounted(const Environment& env, const ExpertDataset& ds, double gamma) {
  return feat_exp_discounted(env, std::span<const Trajectory>(ds.trajectories), gamma);
}

std::vector<FeatVec> feat_exp_per_stage(const Environment& env, const ExpertDataset& ds, int horizon) {
  require(!ds.trajectories.empty(), "feature expectation needs at least one trajectory");
  require(horizon >= 1, "horizon must be positive");
  std::vector<FeatVec> out(static_cast<std::size_t>(horizon), FeatVec::Zero(env.feature_dim()));
  Vec phi(env.feature_dim());
  for (const Trajectory& traj : ds.trajectories) {
    require(static_cast<int>(traj.size()) >= horizon, "finite-horizon trajectories must cover every stage");
    for (int h = 0; h < horizon; ++h) {
      const Transition& t = traj.steps[static_cast<std::size_t>(h)];
      env.features_into(t.state, t.action, phi);
      out[static_cast<std::size_t>(h)] += phi;
    }
  }
  for (FeatVec& f : out) f /= static_cast<double>(ds.trajectories.size());
  return out;
}

FeatVec mimic_md_estimator(const Environment& env, std::span<const Trajectory> held_out,
                           std::span<const Trajectory> clone_rollouts,
                           const std::function<bool(const State&)>& membership, double gamma) {
  require(!held_out.empty(), "held-out expert data must be non-empty");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  auto inside = [&](const Trajectory& traj) {
    for (const Transition& t : traj.steps)
      if (!membership(t.state)) return false;
    return true;
  };
  Vec phi(env.feature_dim());
  FeatVec first = FeatVec::Zero(env.feature_dim());
  for (const Trajectory& traj : clone_rollouts)
    if (inside(traj)) first += discounted_sum(env, traj, gamma, phi);
  if (!clone_rollouts.empty()) first /= static_cast<double>(clone_rollouts.size());
  FeatVec second = FeatVec::Zero(env.feature_dim());
  for (const Trajectory& traj : held_out)
    if (!inside(traj)) second += discounted_sum(env, traj, gamma, phi);
  second /= static_cast<double>(held_out.size());
  return (1.0 - gamma) * (first + second);
}

// ---------------------------------------------------------------------------
// Behavioral cloning
// ---------------------------------------------------------------------------

SoftmaxLinearPolicy::SoftmaxLinearPolicy(EnvPtr env, WeightVec theta) : env_(std::move(env)), theta_(std::move(theta)) {
  require(env_ != nullptr, "policy needs an environment");
  require(theta_.size() == env_->feature_dim(), "parameter dimension does not match features");
}

void SoftmaxLinearPolicy::distribution(const State& s, int, std::span<double> out) const {
  Vec phi(env_->feature_dim());
  for (int a = 0; a < env_->num_actions(); ++a) {
    env_->features_into(s, a, phi);
    out[static_cast<std::size_t>(a)] = -phi.dot(theta_);
  }
  softmax_inplace(out);
}

int SoftmaxLinearPolicy::greedy_action(const State& s) const {
  const auto p = Policy::distribution(s, 0);
  std::vector<double> neg(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) neg[i] = -p[i];
  return argmin_lowest(neg);
}

CloningResult behavioral_cloning(EnvPtr env, const ExpertDataset& ds, int steps, double lr) {
  require(env != nullptr, "null environment");
  require(ds.transitions() > 0, "behavioral cloning needs a non-empty dataset");
  require(steps >= 0 && lr > 0.0, "steps must be non-negative and the learning rate positive");
  const int d = env->feature_dim();
  const int n_actions = env->num_actions();
  std::vector<Mat> blocks;
  std::vector<int> labels;
  for (const Trajectory& traj : ds.trajectories) {
    for (const Transition& t : traj.steps) {
      blocks.push_back(env->feature_block(t.state));
      labels.push_back(t.action);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(blocks.size());

  auto evaluate = [&](const WeightVec& theta, WeightVec* grad) {
    double loss = 0.0;
    if (grad) grad->setZero(d);
    Vec scores(n_actions);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      scores = -(blocks[i] * theta);
      const double m = scores.maxCoeff();
      const Vec e = (scores.array() - m).exp();
      const double z = e.sum();
      loss += -(scores[labels[i]] - m - std::log(z));
      if (grad) {
        const Vec p = e / z;
        *grad += blocks[i].row(labels[i]).transpose() - blocks[i].transpose() * p;
      }
    }
    if (grad) *grad *= inv_n;
    return loss * inv_n;
  };

  CloningResult result;
  WeightVec theta = WeightVec::Zero(d);
  WeightVec grad(d);
  for (int step = 0; step < steps; ++step) {
    result.loss.push_back(evaluate(theta, &grad));
    theta -= lr * grad;
  }
  result.loss.push_back(evaluate(theta, nullptr));
  result.policy = std::make_shared<const SoftmaxLinearPolicy>(env, theta);
  return result;
}

}  // namespace advil
