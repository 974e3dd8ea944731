#include "advil/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

namespace advil {

namespace {

using json = nlohmann::ordered_json;

bool discounted_algorithm(const std::string& kind) {
  return kind == "ilarl" || kind == "mdpe_infinite" || kind == "bc";
}

int expert_length(const ExperimentConfig& c) {
  if (c.expert.length > 0) return c.expert.length;
  if (c.env.gamma == 0.0) return 1;
  return HorizonSpec::default_max_len(c.env.gamma);
}

/// Stable merge by round; rows of equal round keep the order of `parts`.
MetricTrace merge_traces(const std::vector<const MetricTrace*>& parts) {
  std::vector<MetricRow> rows;
  for (const MetricTrace* t : parts) rows.insert(rows.end(), t->rows().begin(), t->rows().end());
  std::stable_sort(rows.begin(), rows.end(), [](const MetricRow& a, const MetricRow& b) { return a.round < b.round; });
  MetricTrace out;
  for (MetricRow& r : rows) out.add(r.round, std::move(r.metric), r.value, r.stderr_);
  return out;
}

const TabularEnv& as_tabular(const EnvPtr& env) {
  const auto* t = dynamic_cast<const TabularEnv*>(env.get());
  require(t != nullptr, "tabular environment required");
  return *t;
}

std::shared_ptr<const TabularEnv> tabular_ptr(const EnvPtr& env) {
  auto t = std::dynamic_pointer_cast<const TabularEnv>(env);
  require(t != nullptr, "tabular environment required");
  return t;
}

// ------------------------------------------------------------------ schedules

struct Resolved {
  int rounds = 0;
  int tau = 1;
  double beta = 0.0;
  double eta = 0.0;
  double alpha = 0.0;
  json schedule;
};

Resolved resolve(const ExperimentConfig& c, const Environment& env, int rounds) {
  const AlgorithmConfig& a = c.algorithm;
  Resolved r;
  r.rounds = rounds;
  if (a.schedule == "manual") {
    r.tau = a.tau;
    r.beta = a.beta;
    r.eta = a.eta;
    r.alpha = a.alpha > 0.0 ? a.alpha : 1.0 / std::sqrt(2.0 * rounds);
    r.schedule = {{"which", "manual"}, {"rounds", rounds}, {"tau", r.tau}, {"beta", r.beta}, {"eta", r.eta}};
    if (a.kind == "ilarl" || a.kind == "brig") r.schedule["alpha"] = r.alpha;
  } else {
    ScheduleInputs in;
    in.rounds = rounds;
    in.dim = env.feature_dim();
    in.horizon = c.env.horizon;
    in.gamma = c.env.gamma;
    in.num_actions = env.num_actions();
    in.delta = a.delta;
    in.epsilon = a.epsilon;
    in.beta_multiplier = a.beta_multiplier;
    const ScheduleParams p = schedule_from_theorems(parse_theorem(a.schedule), in);
    r.beta = p.beta;
    r.tau = p.which == Theorem::thmBR ? 1 : p.tau;
    r.eta = p.eta;
    r.alpha = p.alpha;
    r.schedule = {{"which", a.schedule}, {"rounds", rounds}, {"beta", r.beta}, {"beta_multiplier", a.beta_multiplier}};
    if (p.which != Theorem::thmBR) {
      r.schedule["tau"] = r.tau;
      r.schedule["tau_exact"] = p.tau_exact;
      r.schedule["eta"] = r.eta;
    }
    if (p.which == Theorem::thm5 || p.which == Theorem::thmBR) {
      r.schedule["alpha"] = r.alpha;
      r.schedule["tau_expert"] = p.tau_expert;
    }
    json formulas = json::object();
    for (const auto& [k, v] : p.formulas) formulas[k] = v;
    r.schedule["formulas"] = formulas;
    if (r.tau > rounds)
      throw InvalidInput("schedule " + a.schedule + " gives tau = " + std::to_string(r.tau) + " > K = " +
                         std::to_string(rounds) + "; lower algorithm.beta_multiplier or raise K");
  }
  return r;
}

// ------------------------------------------------------------ evaluation

struct Evaluations {
  MetricTrace trace;
  std::vector<std::pair<int, double>> scores;
  double tail = 0.0;
};

Evaluations evaluate_rounds(const std::vector<PolicyPtr>& policies, const ReturnScale& scale, int cadence,
                            double tail_fraction, const std::string& metric) {
  Evaluations out;
  const int K = static_cast<int>(policies.size());
  const int tail_start = K - static_cast<int>(std::floor(tail_fraction * K));
  std::map<const Policy*, Estimate> cache;
  const double span = std::abs(scale.expert_cost() - scale.uniform_cost());
  double tail_sum = 0.0;
  int tail_n = 0;
  for (int k = 0; k < K; k += cadence) {
    const Policy* p = policies[static_cast<std::size_t>(k)].get();
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, scale.cost(*p)).first;
    const double score = scale.normalized_cost(it->second.mean);
    out.trace.add(k, metric, score, it->second.stderr_ / span);
    out.scores.emplace_back(k, score);
    if (k >= tail_start) {
      tail_sum += score;
      ++tail_n;
    }
  }
  out.tail = tail_n > 0 ? tail_sum / tail_n : out.scores.back().second;
  return out;
}

int cadence_for(const ExperimentConfig& c, int tau, int rounds) {
  if (c.eval.cadence > 0) return c.eval.cadence;
  if (c.algorithm.kind == "brig") return std::max(1, rounds / 20);
  return tau;
}

void add_policy_diagnostics(ExperimentResult& r, const Evaluations& ev, const std::string& prefix) {
  double best = ev.scores.front().second;
  for (const auto& [k, s] : ev.scores) best = std::max(best, s);
  r.diagnostics.emplace_back(prefix + "last_evaluated_normalized_return", ev.scores.back().second);
  r.diagnostics.emplace_back(prefix + "best_evaluated_normalized_return", best);
  r.diagnostics.emplace_back(prefix + "tail_normalized_return", ev.tail);
}

ExpertDataset expert_data(const ExperimentConfig& c, const Environment& env, const Policy& expert,
                          const HorizonSpec& horizon) {
  if (!c.expert.dataset.empty()) {
    ExpertDataset ds = load_dataset(c.expert.dataset);
    if (ds.horizon.is_finite() != horizon.is_finite())
      throw InvalidInput("expert dataset horizon mode does not match the algorithm");
    return ds;
  }
  return collect_expert_dataset(env, expert, c.expert.trajectories, horizon, derive_seed(c.seed, "expert"));
}

double mean_suboptimality(const std::vector<PolicyPtr>& policies, const ReturnScale& scale, MetricTrace* trace,
                          const std::string& metric) {
  std::map<const Policy*, double> cache;
  double total = 0.0;
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const Policy* p = policies[k].get();
    auto it = cache.find(p);
    if (it == cache.end()) it = cache.emplace(p, scale.cost(*p).mean).first;
    const double gap = it->second - scale.expert_cost();
    total += gap;
    if (trace != nullptr) trace->add(static_cast<long>(k), metric, gap);
  }
  return total / static_cast<double>(policies.size());
}

// ------------------------------------------------------------------ runs

void run_ilarl(const ExperimentConfig& c, const EnvPtr& env, ExperimentResult& r) {
  const PolicyPtr expert = make_expert(c, env, c.seed);
  const HorizonSpec horizon = expert_horizon(c);
  const ExpertDataset ds = expert_data(c, *env, *expert, horizon);
  const ReturnScale scale(env, expert, horizon, c.eval.n_eval, derive_seed(c.seed, "evaluation"));
  const Resolved s = resolve(c, *env, c.algorithm.rounds);
  IlarlOptions o;
  o.rounds = s.rounds;
  o.tau = s.tau;
  o.beta = s.beta;
  o.eta = s.eta;
  o.alpha = s.alpha;
  o.gamma = c.env.gamma;
  o.max_len = horizon.max_len;
  const RunResult run = ilarl_run(env, ds, o, derive_seed(c.seed, "algorithm"));
  const Evaluations ev = evaluate_rounds(run.round_policies, scale, cadence_for(c, s.tau, s.rounds),
                                         c.eval.tail_fraction, "normalized_return");
  MetricTrace extra;
  const long last = run.rounds() - 1;
  extra.add(last, "tail_normalized_return", ev.tail);
  r.normalized_return_out = scale.normalized(*run.output_policy());
  extra.add(last, "output_normalized_return", *r.normalized_return_out);
  if (c.eval.baseline == "bc") {
    const CloningResult bc = behavioral_cloning(env, ds, c.algorithm.bc_steps, c.algorithm.bc_lr);
    const Estimate e = scale.cost(*bc.policy);
    extra.add(last, "bc_normalized_return", scale.normalized_cost(e.mean),
              e.stderr_ / std::abs(scale.expert_cost() - scale.uniform_cost()));
  }
  r.trace = merge_traces({&run.trace, &ev.trace, &extra});
  r.schedule_json = s.schedule.dump();
  add_policy_diagnostics(r, ev, "");
  r.diagnostics.emplace_back("mdp_trajectories", run.trajectories);
}

void run_bc(const ExperimentConfig& c, const EnvPtr& env, ExperimentResult& r) {
  const PolicyPtr expert = make_expert(c, env, c.seed);
  const HorizonSpec horizon = expert_horizon(c);
  const ExpertDataset ds = expert_data(c, *env, *expert, horizon);
  const ReturnScale scale(env, expert, horizon, c.eval.n_eval, derive_seed(c.seed, "evaluation"));
  const CloningResult bc = behavioral_cloning(env, ds, c.algorithm.bc_steps, c.algorithm.bc_lr);
  for (std::size_t i = 0; i < bc.loss.size(); ++i) r.trace.add(static_cast<long>(i), "bc_loss", bc.loss[i]);
  const Estimate e = scale.cost(*bc.policy);
  r.normalized_return_out = scale.normalized_cost(e.mean);
  r.trace.add(c.algorithm.bc_steps, "normalized_return", *r.normalized_return_out,
              e.stderr_ / std::abs(scale.expert_cost() - scale.uniform_cost()));
  r.schedule_json =
      json{{"which", "manual"}, {"bc_steps", c.algorithm.bc_steps}, {"bc_lr", c.algorithm.bc_lr}}.dump();
}

void run_brig(const ExperimentConfig& c, const EnvPtr& env, ExperimentResult& r) {
  const PolicyPtr expert = make_expert(c, env, c.seed);
  const HorizonSpec horizon = expert_horizon(c);
  const ExpertDataset ds = expert_data(c, *env, *expert, horizon);
  const ReturnScale scale(env, expert, horizon, c.eval.n_eval, derive_seed(c.seed, "evaluation"));
  const Resolved s = resolve(c, *env, c.algorithm.rounds);
  BrigOptions o;
  o.rounds = s.rounds;
  o.horizon = c.env.horizon;
  o.beta = s.beta;
  o.alpha = s.alpha;
  const RunResult run = brig_run(env, ds, o, derive_seed(c.seed, "algorithm"));
  const Evaluations ev = evaluate_rounds(run.round_policies, scale, cadence_for(c, s.tau, s.rounds),
                                         c.eval.tail_fraction, "normalized_return");
  MetricTrace extra;
  const long last = run.rounds() - 1;
  const bool bandit = c.env.kind == "bandit";
  if (bandit) extra.add(last, "avg_suboptimality", mean_suboptimality(run.round_policies, scale, &extra, "suboptimality"));
  extra.add(last, "tail_normalized_return", ev.tail);
  r.normalized_return_out = scale.normalized(*run.output_policy());
  extra.add(last, "output_normalized_return", *r.normalized_return_out);
  json schedule = s.schedule;
  if (c.eval.baseline == "ilarl") {
    ExpertDataset discounted = ds;
    discounted.horizon = HorizonSpec::truncated(c.env.gamma, c.env.horizon);
    IlarlOptions io;
    io.rounds = s.rounds;
    io.tau = std::min(c.algorithm.tau, s.rounds);
    io.beta = c.algorithm.beta;
    io.eta = c.algorithm.eta;
    io.alpha = s.alpha;
    io.gamma = c.env.gamma;
    const RunResult base = ilarl_run(env, discounted, io, derive_seed(c.seed, "baseline"));
    if (bandit) {
      MetricTrace per_round;
      extra.add(last, "ilarl_avg_suboptimality", mean_suboptimality(base.round_policies, scale, nullptr, ""));
    }
    extra.add(last, "ilarl_output_normalized_return", scale.normalized(*base.output_policy()));
    schedule["baseline"] = {{"algorithm", "ilarl"}, {"tau", io.tau}, {"beta", io.beta}, {"eta", io.eta}, {"alpha", io.alpha}};
  }
  if (c.eval.baseline == "bc") {
    ExpertDataset discounted = ds;
    discounted.horizon = HorizonSpec::truncated(c.env.gamma, c.env.horizon);
    const CloningResult bc = behavioral_cloning(env, discounted, c.algorithm.bc_steps, c.algorithm.bc_lr);
    extra.add(last, "bc_normalized_return", scale.normalized(*bc.policy));
  }
  r.trace = merge_traces({&run.trace, &ev.trace, &extra});
  r.schedule_json = schedule.dump();
  add_policy_diagnostics(r, ev, "");
}

CostStream make_costs(const ExperimentConfig& c, std::uint64_t seed, int dim, int rounds, int stages) {
  Rng rng(derive_seed(seed, "cost_stream"));
  WeightVec start(dim);
  for (int i = 0; i < dim; ++i) start[i] = rng.normal() / std::sqrt(static_cast<double>(dim));
  start = project_l2_ball(start);
  if (c.algorithm.cost_stream == "fixed") return CostStream::fixed(start, rounds, stages);
  return CostStream::random_walk(start, c.algorithm.cost_step, rounds, stages, derive_seed(seed, "cost_walk"));
}

std::uint64_t replicate_seed(std::uint64_t seed, int replicate) {
  return replicate == 0 ? seed : derive_seed(seed, "repeat", static_cast<std::uint64_t>(replicate));
}

void run_mdpe(const ExperimentConfig& c, const EnvPtr& env, ExperimentResult& r) {
  const bool finite = c.algorithm.kind == "mdpe_finite";
  const auto tab = tabular_ptr(env);
  const TabularOracle oracle(tab);
  const int H = c.env.horizon;
  const double gamma = c.env.gamma;
  const PolicyPtr reference = make_expert(c, env, c.seed);
  const HorizonSpec horizon = finite ? HorizonSpec::finite(H) : HorizonSpec::discounted(gamma);
  const ReturnScale scale(env, reference, horizon, c.eval.n_eval, derive_seed(c.seed, "evaluation"));

  const std::vector<int> Ks = c.algorithm.sweep.empty() ? std::vector<int>{c.algorithm.rounds} : c.algorithm.sweep;
  const bool single = Ks.size() == 1;
  const int R = c.algorithm.repeats;
  std::vector<std::pair<double, double>> points;
  json per_k = json::array();
  json schedule;
  MetricTrace trace;
  long total_violations = 0, total_checked = 0;
  for (int K : Ks) {
    const Resolved s = resolve(c, *env, K);
    schedule = s.schedule;
    MdpeOptions o;
    o.rounds = K;
    o.tau = s.tau;
    o.beta = s.beta;
    o.eta = s.eta;
    std::vector<double> totals, per_round;
    double bonus = 0.0;
    long k_violations = 0;
    for (int rep = 0; rep < R; ++rep) {
      const std::uint64_t rep_seed = replicate_seed(c.seed, rep);
      const CostStream costs = make_costs(c, rep_seed, env->feature_dim(), K, finite ? H : 1);
      std::vector<long> violations;
      RoundObserver observer;
      if (c.algorithm.optimism_check) {
        observer = [&](const RoundView& view) {
          const SandwichCount count =
              finite ? sandwich_finite(oracle, view) : sandwich_discounted(oracle, view, gamma);
          violations.push_back(count.violations);
          k_violations += count.violations;
          total_violations += count.violations;
          total_checked += count.checked;
        };
      }
      const std::uint64_t run_seed = derive_seed(rep_seed, "algorithm", static_cast<std::uint64_t>(K));
      const MdpeResult run = finite ? mdpe_finite_run(env, costs, H, o, run_seed, observer)
                                    : mdpe_infinite_run(env, costs, gamma, 0, o, run_seed, observer);
      const int played = static_cast<int>(run.round_policies.size());
      RegretTrace regret;
      if (finite) {
        const auto comparator = best_fixed_finite(oracle, costs, played, H);
        regret = exact_regret_finite(oracle, run.round_policies, costs, comparator, H);
      } else {
        const Mat comparator = best_fixed_discounted(oracle, costs, played, gamma);
        regret = exact_regret_discounted(oracle, run.round_policies, costs, comparator, gamma);
      }
      if (single) {
        MetricTrace rows;
        for (int k = 0; k < played; ++k) {
          rows.add(k, "regret_cumulative", regret.cumulative[static_cast<std::size_t>(k)]);
          if (c.algorithm.optimism_check) rows.add(k, "sandwich_violations", static_cast<double>(violations[static_cast<std::size_t>(k)]));
        }
        trace = merge_traces({&run.trace, &rows});
      }
      for (double b : run.trace.values("bonus_mass")) bonus += b / std::max(1, played);
      totals.push_back(regret.total());
      per_round.push_back(played > 0 ? regret.total() / played : 0.0);
      if (rep == 0 && played > 0) {
        const int out = draw_output(run_seed, played);
        r.normalized_return_out = scale.normalized(*run.round_policies[static_cast<std::size_t>(out)]);
      }
    }
    const Estimate total = mean_stderr(totals);
    if (!single) {
      const Estimate rate = mean_stderr(per_round);
      trace.add(K, "regret", total.mean, R > 1 ? total.stderr_ : 0.0);
      trace.add(K, "regret_per_round", rate.mean, R > 1 ? rate.stderr_ : 0.0);
      trace.add(K, "bonus_mass_mean", bonus / R);
      if (c.algorithm.optimism_check) trace.add(K, "sandwich_violations", static_cast<double>(k_violations));
      per_k.push_back({{"rounds", K}, {"tau", s.tau}, {"eta", s.eta}, {"beta", s.beta}});
    }
    if (total.mean > 0.0) points.emplace_back(K, total.mean);
    r.regret_final = total.mean;
  }
  if (!single && points.size() >= 2) trace.add(Ks.back(), "loglog_slope", loglog_slope(points));
  if (!single) schedule["sweep"] = per_k;
  if (R > 1) schedule["repeats"] = R;
  if (c.algorithm.optimism_check) {
    r.diagnostics.emplace_back("sandwich_violations", static_cast<double>(total_violations));
    r.diagnostics.emplace_back("sandwich_checked", static_cast<double>(total_checked));
  }
  r.trace = std::move(trace);
  r.schedule_json = schedule.dump();
}

json config_object(const ExperimentConfig& c) {
  json sweep = json::array();
  for (int k : c.algorithm.sweep) sweep.push_back(k);
  return {
      {"experiment", c.experiment},
      {"seed", c.seed},
      {"out", c.out},
      {"env",
       {{"kind", c.env.kind},
        {"sigma", c.env.sigma},
        {"scale", c.env.scale},
        {"gamma", c.env.gamma},
        {"horizon", c.env.horizon},
        {"states", c.env.states},
        {"actions", c.env.actions},
        {"dim", c.env.dim},
        {"branching", c.env.branching}}},
      {"expert",
       {{"kind", c.expert.kind},
        {"mix", c.expert.mix},
        {"temperature", c.expert.temperature},
        {"trajectories", c.expert.trajectories},
        {"length", c.expert.length},
        {"train_episodes", c.expert.train_episodes},
        {"train_horizon", c.expert.train_horizon},
        {"train_beta", c.expert.train_beta},
        {"dataset", c.expert.dataset}}},
      {"algorithm",
       {{"kind", c.algorithm.kind},
        {"schedule", c.algorithm.schedule},
        {"rounds", c.algorithm.rounds},
        {"tau", c.algorithm.tau},
        {"beta", c.algorithm.beta},
        {"beta_multiplier", c.algorithm.beta_multiplier},
        {"eta", c.algorithm.eta},
        {"alpha", c.algorithm.alpha},
        {"delta", c.algorithm.delta},
        {"epsilon", c.algorithm.epsilon},
        {"cost_stream", c.algorithm.cost_stream},
        {"cost_step", c.algorithm.cost_step},
        {"bc_steps", c.algorithm.bc_steps},
        {"bc_lr", c.algorithm.bc_lr},
        {"sweep", sweep},
        {"repeats", c.algorithm.repeats},
        {"optimism_check", c.algorithm.optimism_check}}},
      {"eval",
       {{"n_eval", c.eval.n_eval},
        {"cadence", c.eval.cadence},
        {"baseline", c.eval.baseline},
        {"tail_fraction", c.eval.tail_fraction}}},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InvalidInput("failed writing '" + path.string() + "'");
}

}  // namespace

// ------------------------------------------------------------ building blocks

EnvPtr make_environment(const EnvConfig& e, std::uint64_t seed) {
  if (e.kind == "gridworld") return std::make_shared<const Gridworld>(GridworldParams{e.sigma, e.scale});
  Rng rng(derive_seed(seed, "environment"));
  if (e.kind == "bandit")
    return std::make_shared<const LinearBandit>(LinearBandit::gaussian_features(e.actions, e.dim, rng),
                                                LinearBandit::alternating_weights(e.dim));
  if (e.kind == "tabular") return TabularEnv::random(e.states, e.actions, e.branching, rng);
  throw InvalidInput("unknown environment kind '" + e.kind + "'");
}

HorizonSpec expert_horizon(const ExperimentConfig& c) {
  if (!discounted_algorithm(c.algorithm.kind)) return HorizonSpec::finite(c.env.horizon);
  return HorizonSpec::truncated(c.env.gamma, expert_length(c));
}

PolicyPtr make_expert(const ExperimentConfig& c, const EnvPtr& env, std::uint64_t seed) {
  const std::string& kind = c.expert.kind;
  if (kind == "stochastic" || kind == "deterministic") {
    ExpertTraining tr;
    tr.horizon = c.expert.train_horizon;
    tr.episodes = c.expert.train_episodes;
    tr.beta = c.expert.train_beta;
    tr.final_beta = 0.0;
    PolicyPtr det = train_expert_lsvi_ucb(env, tr, derive_seed(seed, "expert_training"))->stationary(0);
    return kind == "stochastic" ? make_stochastic_expert(det, c.expert.mix) : det;
  }
  if (kind == "softmax") {
    const int A = env->num_actions();
    std::vector<double> scores(static_cast<std::size_t>(A));
    for (int a = 0; a < A; ++a) scores[static_cast<std::size_t>(a)] = -env->cost(State{}, a) / c.expert.temperature;
    softmax_inplace(scores);
    Mat table(1, A);
    for (int a = 0; a < A; ++a) table(0, a) = scores[static_cast<std::size_t>(a)];
    return std::make_shared<const TablePolicy>(table);
  }
  // "optimal", and the reference policy of adversarial runs ("none").
  const TabularEnv& tab = as_tabular(env);
  const TabularOracle oracle(tabular_ptr(env));
  if (discounted_algorithm(c.algorithm.kind))
    return std::make_shared<const TablePolicy>(oracle.optimal_policy(tab.cost_table(), c.env.gamma));
  return std::make_shared<const TablePolicy>(
      oracle.optimal_policy_finite(std::vector<Mat>(static_cast<std::size_t>(c.env.horizon), tab.cost_table())));
}

ReturnScale::ReturnScale(EnvPtr env, PolicyPtr expert, HorizonSpec horizon, int n_eval, std::uint64_t seed)
    : env_(std::move(env)), horizon_(horizon), n_eval_(n_eval), seed_(seed) {
  require(expert != nullptr, "return scale needs an expert");
  expert_cost_ = cost(*expert).mean;
  uniform_cost_ = cost(UniformPolicy(env_->num_actions())).mean;
  require(expert_cost_ != uniform_cost_, "expert and uniform policy have equal cost; normalized return undefined");
}

Estimate ReturnScale::cost(const Policy& policy) const {
  if (dynamic_cast<const LinearBandit*>(env_.get()) != nullptr) {
    const std::vector<double> p = policy.distribution(State{}, 0);
    double total = 0.0;
    for (int a = 0; a < env_->num_actions(); ++a) total += p[static_cast<std::size_t>(a)] * env_->cost(State{}, a);
    return {total, 0.0};
  }
  if (auto tab = std::dynamic_pointer_cast<const TabularEnv>(env_)) {
    const TabularOracle oracle(tab);
    if (horizon_.is_finite()) {
      const std::vector<Mat> costs(static_cast<std::size_t>(horizon_.horizon), tab->cost_table());
      return {oracle.initial_value_finite(oracle.policy_tables(policy, horizon_.horizon), costs), 0.0};
    }
    return {oracle.initial_value(oracle.policy_table(policy, 0), tab->cost_table(), horizon_.gamma), 0.0};
  }
  return mc_value(*env_, policy, horizon_, n_eval_, seed_, {}, McEstimator::fixed_horizon);
}

double ReturnScale::normalized_cost(double c) const { return normalized_return(-c, -expert_cost_, -uniform_cost_); }

double ReturnScale::normalized(const Policy& policy) const { return normalized_cost(cost(policy).mean); }

// ------------------------------------------------------------------ runner

ExperimentResult execute_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  const EnvPtr env = make_environment(config.env, config.seed);
  const std::string& kind = config.algorithm.kind;
  if (kind == "ilarl") {
    run_ilarl(config, env, r);
  } else if (kind == "brig") {
    run_brig(config, env, r);
  } else if (kind == "bc") {
    run_bc(config, env, r);
  } else {
    run_mdpe(config, env, r);
  }
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate_config(config);
  const std::filesystem::path dir = std::filesystem::path(config.out) / ("seed" + std::to_string(config.seed));
  std::filesystem::create_directories(dir);
  write_text(dir / "config.json", config_json(config));
  ExperimentResult r = execute_experiment(config);
  r.directory = dir;
  write_text(dir / "metrics.csv", r.trace.to_csv());
  write_text(dir / "summary.json", summary_json(config, r));
  return r;
}

std::string config_json(const ExperimentConfig& config) { return config_object(config).dump(2) + "\n"; }

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& r) {
  json out;
  out["experiment"] = config.experiment;
  out["seed"] = config.seed;
  out["schedule"] = r.schedule_json.empty() ? json(nullptr) : json::parse(r.schedule_json);
  out["normalized_return_out"] = r.normalized_return_out ? json(*r.normalized_return_out) : json(nullptr);
  out["regret_final"] = r.regret_final ? json(*r.regret_final) : json(nullptr);
  out["wall_time_s"] = r.wall_time_s;
  json diag = json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  out["non_canonical_diagnostics"] = diag;
  return out.dump(2) + "\n";
}

}  // namespace advil
