#include "advil/imitation.hpp"

#include <cmath>

namespace advil {

using kernels::Exec;

WeightVec ogd_cost_update(const WeightVec& w, const FeatVec& expert_feat, const FeatVec& learner_feat, double alpha,
                          CostSet set) {
  require(w.size() == expert_feat.size() && w.size() == learner_feat.size(), "cost update dimensions differ");
  require(alpha >= 0.0, "step size must be non-negative");
  const WeightVec moved = w - alpha * (expert_feat - learner_feat);
  return set == CostSet::ball ? project_l2_ball(moved) : project_box(moved, 0.0, 1.0);
}

FeatVec estimate_learner_feat(const Environment& env, std::span<const Transition> batch) {
  require(!batch.empty(), "learner feature estimate needs a non-empty batch");
  FeatVec total = FeatVec::Zero(env.feature_dim());
  Vec phi(env.feature_dim());
  for (const Transition& t : batch) {
    env.features_into(t.state, t.action, phi);
    total += phi;
  }
  return total / static_cast<double>(batch.size());
}

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

Theorem parse_theorem(const std::string& name) {
  if (name == "thm3") return Theorem::thm3;
  if (name == "thm4") return Theorem::thm4;
  if (name == "thm5") return Theorem::thm5;
  if (name == "thmBR") return Theorem::thmBR;
  if (name == "expert_conc") return Theorem::expert_conc;
  throw InvalidInput("unknown schedule '" + name + "' (expected thm3, thm4, thm5, thmBR or expert_conc)");
}

std::string theorem_name(Theorem which) {
  switch (which) {
    case Theorem::thm3: return "thm3";
    case Theorem::thm4: return "thm4";
    case Theorem::thm5: return "thm5";
    case Theorem::thmBR: return "thmBR";
    case Theorem::expert_conc: return "expert_conc";
  }
  throw InternalError("unhandled schedule");
}

namespace {

void positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string("schedule input '") + name + "' must be positive");
}

void discount(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidInput("schedule input 'gamma' must lie in (0, 1)");
}

int round_tau(double tau) { return std::max(1, static_cast<int>(std::llround(tau))); }

// Shared by the discounted theorems: tau = beta (1 - gamma) sqrt(d K) log(2 d K / delta) / sqrt(log |A|).
void discounted_batch(ScheduleParams& p, const ScheduleInputs& in) {
  const double K = in.rounds, d = in.dim, g = in.gamma, logA = std::log(static_cast<double>(in.num_actions));
  p.beta = in.beta_multiplier * d / (1.0 - g);
  p.tau_exact = p.beta * (1.0 - g) * std::sqrt(d * K) * std::log(2.0 * d * K / in.delta) / std::sqrt(logA);
  p.tau = round_tau(p.tau_exact);
  p.eta = std::sqrt(p.tau * logA * (1.0 - g) * (1.0 - g) / K);
  p.formulas["beta"] = "c * d / (1 - gamma)";
  p.formulas["tau"] = "beta (1 - gamma) sqrt(d K) log(2 d K / delta) / sqrt(log |A|)";
  p.formulas["eta"] = "sqrt(tau log |A| (1 - gamma)^2 / K)";
}

}  // namespace

ScheduleParams schedule_from_theorems(Theorem which, const ScheduleInputs& in) {
  ScheduleParams p;
  p.which = which;
  p.rounds = in.rounds;
  positive(in.beta_multiplier, "beta_multiplier");
  switch (which) {
    case Theorem::thm3: {
      positive(in.rounds, "rounds");
      positive(in.dim, "dim");
      positive(in.horizon, "horizon");
      if (in.num_actions < 2) throw InvalidInput("schedule input 'num_actions' must be at least 2");
      const double K = in.rounds, d = in.dim, H = in.horizon, logA = std::log(static_cast<double>(in.num_actions));
      p.beta = in.beta_multiplier * d * H;
      p.tau_exact = 2.5 * p.beta * std::sqrt(K * d / logA);
      p.tau = round_tau(p.tau_exact);
      p.eta = std::sqrt(p.tau * logA / (K * H * H));
      p.formulas["beta"] = "c * d * H";
      p.formulas["tau"] = "(5 beta / 2) sqrt(K d / log |A|)";
      p.formulas["eta"] = "sqrt(tau log |A| / (K H^2))";
      break;
    }
    case Theorem::thm4:
    case Theorem::thm5: {
      positive(in.rounds, "rounds");
      positive(in.dim, "dim");
      discount(in.gamma);
      positive(in.delta, "delta");
      if (in.num_actions < 2) throw InvalidInput("schedule input 'num_actions' must be at least 2");
      discounted_batch(p, in);
      if (which == Theorem::thm5) {
        positive(in.epsilon, "epsilon");
        const double d = in.dim, g = in.gamma, e = in.epsilon;
        p.alpha = 1.0 / std::sqrt(2.0 * in.rounds);
        p.tau_expert = 8.0 * d * std::log(d / in.delta) / ((1.0 - g) * (1.0 - g) * e * e);
        p.n_expert = std::max(1, static_cast<int>(std::ceil(p.tau_expert)));
        p.formulas["alpha"] = "1 / sqrt(2 K)";
        p.formulas["tau_expert"] = "8 d log(d / delta) / ((1 - gamma)^2 eps^2)";
      }
      break;
    }
    case Theorem::thmBR: {
      positive(in.rounds, "rounds");
      positive(in.dim, "dim");
      positive(in.horizon, "horizon");
      positive(in.delta, "delta");
      positive(in.epsilon, "epsilon");
      const double d = in.dim, H = in.horizon, e = in.epsilon;
      p.beta = in.beta_multiplier * d * H;
      p.alpha = std::sqrt(1.0 / (2.0 * in.rounds));
      p.tau_expert = 2.0 * H * H * d * std::log(2.0 * d / in.delta) / (e * e);
      p.n_expert = std::max(1, static_cast<int>(std::ceil(p.tau_expert)));
      p.formulas["beta"] = "c * d * H";
      p.formulas["alpha"] = "sqrt(1 / (2 K))";
      p.formulas["tau_expert"] = "2 H^2 d log(2 d / delta) / eps^2";
      break;
    }
    case Theorem::expert_conc: {
      positive(in.dim, "dim");
      positive(in.delta, "delta");
      positive(in.epsilon, "epsilon");
      const double d = in.dim, e = in.epsilon;
      p.tau_expert = 2.0 * std::log(2.0 * d / in.delta) / (e * e);
      p.n_expert = std::max(1, static_cast<int>(std::ceil(p.tau_expert)));
      p.formulas["n_expert"] = "ceil(2 log(2 d / delta) / eps^2)";
      if (in.gamma > 0.0) {
        discount(in.gamma);
        p.min_horizon = std::log(1.0 / e) / (1.0 - in.gamma);
        p.formulas["min_horizon"] = "log(1 / eps) / (1 - gamma)";
      }
      break;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

int draw_output(std::uint64_t seed, int rounds) {
  require(rounds >= 1, "output draw needs at least one round");
  Rng rng(derive_seed(seed, "output"));
  return std::min(rounds - 1, static_cast<int>(rng.uniform() * rounds));
}

RunResult ilarl_run(EnvPtr env, const ExpertDataset& expert, const IlarlOptions& o, std::uint64_t seed) {
  require(env != nullptr, "null environment");
  require(o.rounds >= 1 && o.tau >= 1, "rounds and batch size must be positive");
  require(o.tau <= o.rounds, "batch size cannot exceed the number of rounds");
  require(o.beta >= 0.0 && o.eta >= 0.0 && o.alpha >= 0.0, "hyperparameters must be non-negative");
  require(o.gamma >= 0.0 && o.gamma < 1.0, "gamma must lie in [0, 1)");
  require(!expert.horizon.is_finite(), "ILARL needs a discounted expert dataset");
  const int max_len = o.max_len > 0 ? o.max_len : HorizonSpec::default_max_len(o.gamma);
  const int batches = o.rounds / o.tau;
  const int d = env->feature_dim();

  RunResult result;
  const FeatVec expert_feat = feat_exp_discounted(*env, expert, o.gamma);
  result.expert_feat = {expert_feat};

  auto policy = std::make_shared<const ExpWeightsPolicy>(env, o.eta, 1);
  WeightVec w = WeightVec::Zero(d);
  std::optional<FunctionalQ> previous;
  PolicyPtr previous_policy;

  for (int j = 0; j < batches; ++j) {
    const auto samples = kernels::occupancy_samples(*env, *policy, o.gamma, max_len, o.tau,
                                                    derive_seed(seed, "batch", static_cast<std::uint64_t>(j)), o.exec);
    result.trajectories += o.tau;
    const DiscountedBatch batch(*env, samples, *policy, o.beta, o.gamma, o.exec);
    const FeatVec learner_feat = batch.mean_feature();
    Vec values = batch.carried_values(previous ? &*previous : nullptr, previous_policy.get());
    Mat linear(d, o.tau);
    for (int t = 0; t < o.tau; ++t) {
      const int k = j * o.tau + t;
      const WeightVec w_next = ogd_cost_update(w, expert_feat, learner_feat, o.alpha, CostSet::ball);
      FunctionalQ q = batch.step(w, values);
      linear.col(t) = q.linear();
      values = batch.values(q);
      result.round_policies.push_back(policy);
      result.round_weights.push_back({w});
      result.trace.add(k, "cost_norm", w.norm());
      previous = std::move(q);
      previous_policy = policy;
      w = w_next;
    }
    result.trace.add((j + 1) * o.tau - 1, "feature_gap", (expert_feat - learner_feat).lpNorm<Eigen::Infinity>());
    policy = policy->extended(
        {std::make_shared<const QStack>(batch.cov(), o.beta, ClipRange::discounted(o.gamma), std::move(linear))});
  }
  result.output_index = draw_output(seed, result.rounds());
  return result;
}

RunResult brig_run(EnvPtr env, const ExpertDataset& expert, const BrigOptions& o, std::uint64_t seed) {
  require(env != nullptr, "null environment");
  require(o.rounds >= 1 && o.horizon >= 1, "rounds and horizon must be positive");
  require(o.beta >= 0.0 && o.alpha >= 0.0, "hyperparameters must be non-negative");
  require(expert.horizon.is_finite(), "BRIG needs a finite-horizon expert dataset");
  const int horizon = o.horizon;
  const int d = env->feature_dim();

  RunResult result;
  result.expert_feat = feat_exp_per_stage(*env, expert, horizon);

  std::vector<std::shared_ptr<StageSamples>> samples;
  std::vector<IncrementalCov> covs;
  for (int h = 0; h < horizon; ++h) {
    samples.push_back(std::make_shared<StageSamples>(d, env->num_actions(), h + 1 < horizon));
    covs.emplace_back(d);
  }
  std::vector<WeightVec> w(static_cast<std::size_t>(horizon), WeightVec::Zero(d));
  PolicyPtr policy = std::make_shared<const UniformPolicy>(env->num_actions());
  Vec phi(d);

  for (int k = 0; k < o.rounds; ++k) {
    Rng rng(derive_seed(seed, "episode", static_cast<std::uint64_t>(k)));
    const Trajectory traj = sample_episode_finite(*env, *policy, horizon, rng);
    ++result.trajectories;
    result.round_policies.push_back(policy);
    result.round_weights.push_back(w);
    for (int h = 0; h < horizon; ++h) {
      const Transition& step = traj.steps[static_cast<std::size_t>(h)];
      samples[static_cast<std::size_t>(h)]->append(*env, step);
      env->features_into(step.state, step.action, phi);
      covs[static_cast<std::size_t>(h)].add(phi);
      w[static_cast<std::size_t>(h)] =
          ogd_cost_update(w[static_cast<std::size_t>(h)], result.expert_feat[static_cast<std::size_t>(h)], phi, o.alpha,
                          CostSet::box);
    }
    std::vector<std::shared_ptr<const StageSamples>> views(samples.begin(), samples.end());
    std::vector<std::shared_ptr<const CovStats>> snapshots;
    for (const IncrementalCov& c : covs) snapshots.push_back(std::make_shared<const CovStats>(c.snapshot()));
    const auto models = make_stage_models(std::move(views), std::move(snapshots), nullptr, o.beta, o.exec);
    policy = std::make_shared<const GreedyPolicy>(env, lsvi_finite(models, w, o.beta, o.exec));
    double norm = 0.0;
    for (const WeightVec& wh : w) norm = std::max(norm, wh.norm());
    result.trace.add(k, "cost_norm", norm);
  }
  result.output_index = draw_output(seed, result.rounds());
  return result;
}

}  // namespace advil
