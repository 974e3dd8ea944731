#include "advil/adversarial.hpp"

#include <algorithm>
#include <cmath>

namespace advil {

using kernels::Exec;

// ---------------------------------------------------------------------------
// FunctionalQ / QStack
// ---------------------------------------------------------------------------

double FunctionalQ::eval(const Eigen::Ref<const Vec>& phi) const {
  return advil::clip(phi.dot(linear()) - bonus_at(phi), clip);
}

Vec FunctionalQ::eval_block(const Mat& phi_block) const {
  const Vec lin = linear();
  Vec out(phi_block.rows());
  for (Eigen::Index r = 0; r < phi_block.rows(); ++r) {
    const auto phi = phi_block.row(r).transpose();
    out[r] = advil::clip(phi.dot(lin) - bonus(phi, *cov, beta), clip);
  }
  return out;
}

QStack::QStack(std::shared_ptr<const CovStats> cov, double beta, ClipRange clip, Mat linear)
    : cov_(std::move(cov)), beta_(beta), clip_(clip), linear_(std::move(linear)) {
  require(cov_ != nullptr, "Q stack needs a covariance");
  require(linear_.cols() >= 1, "Q stack needs at least one member");
  require(linear_.rows() == cov_->dim(), "Q stack dimension does not match covariance");
  require(beta_ >= 0.0, "bonus scale must be non-negative");
}

QStack QStack::from(std::span<const FunctionalQ> members) {
  require(!members.empty(), "Q stack needs at least one member");
  const FunctionalQ& first = members.front();
  Mat linear(first.cost_w.size(), static_cast<Eigen::Index>(members.size()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const FunctionalQ& q = members[i];
    require(q.cov == first.cov && q.beta == first.beta && q.clip == first.clip,
            "Q stack members must share covariance, bonus scale and clip range");
    linear.col(static_cast<Eigen::Index>(i)) = q.linear();
  }
  return QStack(first.cov, first.beta, first.clip, std::move(linear));
}

void QStack::mean_into(const Mat& phi_block, Eigen::Ref<Vec> out) const {
  const Mat scores = phi_block * linear_;
  const Mat projected = phi_block * cov_->inverse();
  const double inv_n = 1.0 / static_cast<double>(linear_.cols());
  for (Eigen::Index a = 0; a < phi_block.rows(); ++a) {
    const double b = beta_ * std::sqrt(std::max(0.0, projected.row(a).dot(phi_block.row(a))));
    double total = 0.0;
    for (Eigen::Index i = 0; i < linear_.cols(); ++i) total += advil::clip(scores(a, i) - b, clip_);
    out[a] = total * inv_n;
  }
}

Vec QStack::mean(const Mat& phi_block) const {
  Vec out(phi_block.rows());
  mean_into(phi_block, out);
  return out;
}

// ---------------------------------------------------------------------------
// ExpWeightsPolicy
// ---------------------------------------------------------------------------

ExpWeightsPolicy::ExpWeightsPolicy(EnvPtr env, double eta, int stages)
    : env_(std::move(env)), eta_(eta), stages_(stages) {
  require(env_ != nullptr, "policy needs an environment");
  require(eta >= 0.0 && std::isfinite(eta), "step size must be finite and non-negative");
  require(stages >= 1, "policy needs at least one stage");
}

std::shared_ptr<const ExpWeightsPolicy> ExpWeightsPolicy::extended(std::vector<QStackPtr> per_stage) const {
  require(static_cast<int>(per_stage.size()) == stages_, "one Q stack per stage required");
  for (const QStackPtr& q : per_stage) {
    require(q != nullptr, "null Q stack");
    require(q->linear().rows() == env_->feature_dim(), "Q stack dimension does not match the environment");
  }
  auto next = std::make_shared<ExpWeightsPolicy>(*this);
  next->epochs_.push_back(std::move(per_stage));
  return next;
}

Vec ExpWeightsPolicy::cumulative_loss(const State& s, int stage) const {
  const int h = stages_ == 1 ? 0 : stage;
  if (h < 0 || h >= stages_) throw InvalidInput("policy stage out of range");
  Vec total = Vec::Zero(env_->num_actions());
  if (epochs_.empty()) return total;
  const Mat block = env_->feature_block(s);
  Vec scratch(block.rows());
  for (const auto& epoch : epochs_) {
    epoch[static_cast<std::size_t>(h)]->mean_into(block, scratch);
    total += scratch;
  }
  return total;
}

void ExpWeightsPolicy::distribution(const State& s, int stage, std::span<double> out) const {
  const Vec loss = cumulative_loss(s, stage);
  for (Eigen::Index a = 0; a < loss.size(); ++a) out[static_cast<std::size_t>(a)] = -eta_ * loss[a];
  softmax_inplace(out);
}

// ---------------------------------------------------------------------------
// CostStream
// ---------------------------------------------------------------------------

CostStream::CostStream(Kind kind, std::vector<std::vector<WeightVec>> weights)
    : kind_(kind), weights_(std::move(weights)) {}

CostStream CostStream::fixed(const WeightVec& w, int rounds, int stages) {
  require(rounds >= 1 && stages >= 1, "cost stream needs positive rounds and stages");
  require(w.norm() <= 1.0 + 1e-12, "cost weights must lie in the unit ball");
  return CostStream(Kind::fixed,
                    std::vector<std::vector<WeightVec>>(static_cast<std::size_t>(rounds),
                                                        std::vector<WeightVec>(static_cast<std::size_t>(stages), w)));
}

CostStream CostStream::random_walk(const WeightVec& start, double step, int rounds, int stages, std::uint64_t seed) {
  require(rounds >= 1 && stages >= 1, "cost stream needs positive rounds and stages");
  require(step >= 0.0, "random-walk step must be non-negative");
  const Eigen::Index d = start.size();
  require(d >= 1, "cost dimension must be positive");
  Rng rng(derive_seed(seed, "cost_stream"));
  const double scale = step / std::sqrt(static_cast<double>(d));
  std::vector<std::vector<WeightVec>> weights(static_cast<std::size_t>(rounds));
  std::vector<WeightVec> current(static_cast<std::size_t>(stages), project_l2_ball(start));
  for (int k = 0; k < rounds; ++k) {
    if (k > 0) {
      for (WeightVec& w : current) {
        WeightVec moved = w;
        for (Eigen::Index i = 0; i < d; ++i) moved[i] += scale * rng.normal();
        w = project_l2_ball(moved);
      }
    }
    weights[static_cast<std::size_t>(k)] = current;
  }
  return CostStream(Kind::random_walk, std::move(weights));
}

CostStream CostStream::scripted(std::vector<std::vector<WeightVec>> weights) {
  require(!weights.empty() && !weights.front().empty(), "scripted cost stream must be non-empty");
  const std::size_t stages = weights.front().size();
  const Eigen::Index d = weights.front().front().size();
  for (const auto& round : weights) {
    require(round.size() == stages, "every round needs the same number of stages");
    for (const WeightVec& w : round) {
      require(w.size() == d, "cost weights must share a dimension");
      require(w.norm() <= 1.0 + 1e-12, "cost weights must lie in the unit ball");
    }
  }
  return CostStream(Kind::scripted, std::move(weights));
}

int CostStream::dim() const { return weights_.empty() ? 0 : static_cast<int>(weights_.front().front().size()); }

const std::vector<WeightVec>& CostStream::round(int k) const {
  if (k < 0 || k >= rounds()) throw InvalidInput("cost stream round out of range");
  return weights_[static_cast<std::size_t>(k)];
}

const WeightVec& CostStream::weights(int round_index, int stage) const {
  const auto& r = round(round_index);
  if (stage < 0 || stage >= static_cast<int>(r.size())) throw InvalidInput("cost stream stage out of range");
  return r[static_cast<std::size_t>(stage)];
}

// ---------------------------------------------------------------------------
// Samples and models
// ---------------------------------------------------------------------------

StageSamples::StageSamples(int dim, int num_actions, bool with_next)
    : phi_(0, dim), next_phi_(0, dim), num_actions_(num_actions), with_next_(with_next) {
  require(dim >= 1 && num_actions >= 1, "sample buffer needs positive dimension and action count");
}

void StageSamples::reserve(int rows) {
  if (rows <= phi_.rows()) return;
  const Eigen::Index capacity = std::max<Eigen::Index>(rows, std::max<Eigen::Index>(16, 2 * phi_.rows()));
  phi_.conservativeResize(capacity, Eigen::NoChange);
  if (with_next_) next_phi_.conservativeResize(capacity * num_actions_, Eigen::NoChange);
}

StageSamples StageSamples::from(const Environment& env, std::span<const Transition> steps, bool with_next) {
  StageSamples out(env.feature_dim(), env.num_actions(), with_next);
  out.reserve(static_cast<int>(steps.size()));
  for (const Transition& t : steps) out.append(env, t);
  return out;
}

void StageSamples::append(const Environment& env, const Transition& step) {
  require(env.feature_dim() == phi_.cols() && env.num_actions() == num_actions_,
          "environment does not match the sample buffer");
  reserve(count_ + 1);
  Vec scratch(phi_.cols());
  env.features_into(step.state, step.action, scratch);
  phi_.row(count_) = scratch.transpose();
  if (with_next_) {
    for (int a = 0; a < num_actions_; ++a) {
      env.features_into(step.next, a, scratch);
      next_phi_.row(static_cast<Eigen::Index>(count_) * num_actions_ + a) = scratch.transpose();
    }
  }
  next_states_.push_back(step.next);
  ++count_;
}

Vec policy_probs(const Policy& policy, std::span<const State> states, int stage, Exec exec) {
  const int n_actions = policy.num_actions();
  Vec out(static_cast<Eigen::Index>(states.size()) * n_actions);
  kernels::for_each_index(
      static_cast<std::int64_t>(states.size()),
      [&](std::int64_t i) {
        policy.distribution(states[static_cast<std::size_t>(i)], stage,
                            std::span<double>(out.data() + i * n_actions, static_cast<std::size_t>(n_actions)));
      },
      exec);
  return out;
}

std::vector<StageModel> make_stage_models(std::vector<std::shared_ptr<const StageSamples>> samples,
                                          std::vector<std::shared_ptr<const CovStats>> covs, const Policy* policy,
                                          double beta, Exec exec) {
  const std::size_t horizon = samples.size();
  require(horizon >= 1, "need at least one stage");
  require(covs.empty() || covs.size() == horizon, "one covariance per stage required");
  std::vector<StageModel> models(horizon);
  for (std::size_t h = 0; h < horizon; ++h) {
    require(samples[h] != nullptr, "null stage samples");
    models[h].samples = samples[h];
    models[h].cov = covs.empty() ? std::make_shared<const CovStats>(CovStats::build_rows(samples[h]->phi())) : covs[h];
  }
  for (std::size_t h = 0; h + 1 < horizon; ++h) {
    const StageSamples& s = *samples[h];
    require(s.with_next(), "non-terminal stages need next-state features");
    models[h].next_bonus = kernels::row_bonus(s.next_phi(), *models[h + 1].cov, beta, exec);
    if (policy != nullptr) models[h].next_probs = policy_probs(*policy, s.next_states(), static_cast<int>(h) + 1, exec);
  }
  return models;
}

std::vector<FunctionalQ> lsvi_finite(const std::vector<StageModel>& stages, std::span<const WeightVec> cost_w,
                                     double beta, Exec exec) {
  const int horizon = static_cast<int>(stages.size());
  require(horizon >= 1, "need at least one stage");
  require(static_cast<int>(cost_w.size()) == horizon, "one cost vector per stage required");
  std::vector<FunctionalQ> q(static_cast<std::size_t>(horizon));
  for (int h = horizon - 1; h >= 0; --h) {
    const StageModel& m = stages[static_cast<std::size_t>(h)];
    const int d = m.cov->dim();
    require(cost_w[static_cast<std::size_t>(h)].size() == d, "cost dimension does not match features");
    WeightVec v = WeightVec::Zero(d);
    if (h + 1 < horizon && m.samples->size() > 0) {
      const FunctionalQ& next = q[static_cast<std::size_t>(h) + 1];
      const Vec values = kernels::stage_values(m.samples->next_phi(), next.linear(), m.next_bonus,
                                               m.next_probs.size() > 0 ? &m.next_probs : nullptr, next.clip,
                                               m.samples->num_actions(), exec);
      v = m.cov->solve(kernels::weighted_row_sum(m.samples->phi(), std::span<const double>(values.data(), values.size()), exec));
    }
    q[static_cast<std::size_t>(h)] =
        FunctionalQ{cost_w[static_cast<std::size_t>(h)], std::move(v), 1.0, m.cov, beta, ClipRange::finite_stage(horizon, h + 1)};
  }
  return q;
}

// ---------------------------------------------------------------------------
// DiscountedBatch
// ---------------------------------------------------------------------------

DiscountedBatch::DiscountedBatch(const Environment& env, std::span<const Transition> samples, const Policy& policy,
                                 double beta, double gamma, Exec exec)
    : env_(env),
      samples_(StageSamples::from(env, samples, true)),
      beta_(beta),
      gamma_(gamma),
      exec_(exec) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(beta >= 0.0, "bonus scale must be non-negative");
  cov_ = std::make_shared<const CovStats>(CovStats::build_rows(samples_.phi()));
  next_bonus_ = kernels::row_bonus(samples_.next_phi(), *cov_, beta, exec);
  next_probs_ = policy_probs(policy, samples_.next_states(), 0, exec);
}

Vec DiscountedBatch::carried_values(const FunctionalQ* previous, const Policy* previous_policy) const {
  const int n = samples_.size();
  if (previous == nullptr) return Vec::Zero(n);
  require(previous_policy != nullptr, "carried values need the producing policy");
  const int n_actions = samples_.num_actions();
  const Eigen::Ref<const Mat> next_phi = samples_.next_phi();
  const Vec lin = previous->linear();
  Vec out(n);
  kernels::for_each_index(
      n,
      [&](std::int64_t i) {
        std::vector<double> probs(static_cast<std::size_t>(n_actions));
        previous_policy->distribution(samples_.next_states()[static_cast<std::size_t>(i)], 0, probs);
        double total = 0.0;
        for (int a = 0; a < n_actions; ++a) {
          const auto phi = next_phi.row(i * n_actions + a).transpose();
          total += probs[static_cast<std::size_t>(a)] *
                   advil::clip(phi.dot(lin) - bonus(phi, *previous->cov, previous->beta), previous->clip);
        }
        out[i] = total;
      },
      exec_);
  return out;
}

FunctionalQ DiscountedBatch::step(const WeightVec& cost_w, const Vec& next_values) const {
  require(cost_w.size() == cov_->dim(), "cost dimension does not match features");
  require(next_values.size() == samples_.size(), "one next-state value per sample required");
  WeightVec v = cov_->solve(
      kernels::weighted_row_sum(samples_.phi(), std::span<const double>(next_values.data(), next_values.size()), exec_));
  return FunctionalQ{cost_w, std::move(v), gamma_, cov_, beta_, ClipRange::discounted(gamma_)};
}

Vec DiscountedBatch::values(const FunctionalQ& q) const {
  require(q.cov == cov_, "Q must come from this batch");
  return kernels::stage_values(samples_.next_phi(), q.linear(), next_bonus_, &next_probs_, q.clip,
                               samples_.num_actions(), exec_);
}

FeatVec DiscountedBatch::mean_feature() const {
  require(samples_.size() > 0, "empty batch has no mean feature");
  return samples_.phi().colwise().mean().transpose();
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

void check_options(const Environment& env, const CostStream& costs, const MdpeOptions& o) {
  require(o.rounds >= 1 && o.tau >= 1, "rounds and batch size must be positive");
  require(o.tau <= o.rounds, "batch size cannot exceed the number of rounds");
  require(o.beta >= 0.0 && o.eta >= 0.0, "bonus scale and step size must be non-negative");
  require(costs.rounds() >= o.rounds, "cost stream is shorter than the number of rounds");
  require(costs.dim() == env.feature_dim(), "cost dimension does not match features");
}

double mean_bonus(const Eigen::Ref<const Mat>& phi, const CovStats& cov, double beta, Exec exec) {
  if (phi.rows() == 0) return 0.0;
  return kernels::row_bonus(phi, cov, beta, exec).mean();
}

}  // namespace

MdpeResult mdpe_finite_run(EnvPtr env, const CostStream& costs, int horizon, const MdpeOptions& options,
                           std::uint64_t seed, const RoundObserver& observer) {
  require(env != nullptr, "null environment");
  require(horizon >= 1, "horizon must be positive");
  check_options(*env, costs, options);
  require(costs.stages() == horizon || costs.stages() == 1, "cost stream stages must match the horizon");
  const int batches = options.rounds / options.tau;
  const int d = env->feature_dim();

  MdpeResult result;
  auto policy = std::make_shared<const ExpWeightsPolicy>(env, options.eta, horizon);
  result.batch_policies.push_back(policy);

  for (int j = 0; j < batches; ++j) {
    const auto trajectories = kernels::rollouts(*env, *policy, HorizonSpec::finite(horizon), options.tau,
                                                derive_seed(seed, "batch", static_cast<std::uint64_t>(j)), options.exec);
    std::vector<std::shared_ptr<const StageSamples>> samples;
    for (int h = 0; h < horizon; ++h) {
      auto s = std::make_shared<StageSamples>(d, env->num_actions(), h + 1 < horizon);
      for (const Trajectory& traj : trajectories) s->append(*env, traj.steps[static_cast<std::size_t>(h)]);
      samples.push_back(std::move(s));
    }
    const auto models = make_stage_models(samples, {}, policy.get(), options.beta, options.exec);
    double bonus_mass = 0.0;
    for (const StageModel& m : models) bonus_mass += mean_bonus(m.samples->phi(), *m.cov, options.beta, options.exec);

    std::vector<Mat> linear(static_cast<std::size_t>(horizon), Mat(d, options.tau));
    std::vector<WeightVec> stage_costs(static_cast<std::size_t>(horizon));
    for (int t = 0; t < options.tau; ++t) {
      const int k = j * options.tau + t;
      for (int h = 0; h < horizon; ++h)
        stage_costs[static_cast<std::size_t>(h)] = costs.weights(k, costs.stages() == 1 ? 0 : h);
      const auto q = lsvi_finite(models, stage_costs, options.beta, options.exec);
      if (observer) {
        RoundView view;
        view.round = k;
        view.batch = j;
        view.q = q;
        view.policy = policy.get();
        view.cost_w = stage_costs;
        observer(view);
      }
      for (int h = 0; h < horizon; ++h) linear[static_cast<std::size_t>(h)].col(t) = q[static_cast<std::size_t>(h)].linear();
      result.round_policies.push_back(policy);
      result.trace.add(k, "bonus_mass", bonus_mass);
    }
    std::vector<QStackPtr> stacks;
    for (int h = 0; h < horizon; ++h) {
      const StageModel& m = models[static_cast<std::size_t>(h)];
      stacks.push_back(std::make_shared<const QStack>(m.cov, options.beta, ClipRange::finite_stage(horizon, h + 1),
                                                      std::move(linear[static_cast<std::size_t>(h)])));
    }
    policy = policy->extended(std::move(stacks));
    result.batch_policies.push_back(policy);
  }
  return result;
}

MdpeResult mdpe_infinite_run(EnvPtr env, const CostStream& costs, double gamma, int max_len,
                             const MdpeOptions& options, std::uint64_t seed, const RoundObserver& observer) {
  require(env != nullptr, "null environment");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  check_options(*env, costs, options);
  if (max_len <= 0) max_len = HorizonSpec::default_max_len(gamma);
  const int batches = options.rounds / options.tau;
  const int d = env->feature_dim();

  MdpeResult result;
  auto policy = std::make_shared<const ExpWeightsPolicy>(env, options.eta, 1);
  result.batch_policies.push_back(policy);
  std::optional<FunctionalQ> previous;
  PolicyPtr previous_policy;

  for (int j = 0; j < batches; ++j) {
    const auto samples = kernels::occupancy_samples(*env, *policy, gamma, max_len, options.tau,
                                                    derive_seed(seed, "batch", static_cast<std::uint64_t>(j)),
                                                    options.exec);
    const DiscountedBatch batch(*env, samples, *policy, options.beta, gamma, options.exec);
    const double bonus_mass = mean_bonus(batch.samples().phi(), *batch.cov(), options.beta, options.exec);
    Vec values = batch.carried_values(previous ? &*previous : nullptr, previous_policy.get());
    Mat linear(d, options.tau);
    for (int t = 0; t < options.tau; ++t) {
      const int k = j * options.tau + t;
      FunctionalQ q = batch.step(costs.weights(k, 0), values);
      if (observer) {
        RoundView view;
        view.round = k;
        view.batch = j;
        view.q = std::span<const FunctionalQ>(&q, 1);
        view.previous_q = previous ? &*previous : nullptr;
        view.previous_policy = previous_policy.get();
        view.policy = policy.get();
        view.cost_w = costs.round(k);
        observer(view);
      }
      linear.col(t) = q.linear();
      values = batch.values(q);
      previous = std::move(q);
      previous_policy = policy;
      result.round_policies.push_back(policy);
      result.trace.add(k, "bonus_mass", bonus_mass);
    }
    policy = policy->extended(
        {std::make_shared<const QStack>(batch.cov(), options.beta, ClipRange::discounted(gamma), std::move(linear))});
    result.batch_policies.push_back(policy);
  }
  return result;
}

}  // namespace advil
