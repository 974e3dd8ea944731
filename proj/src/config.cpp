#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "advil/experiment.hpp"

namespace advil {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  throw InvalidInput("config key '" + key + "': expected " + expected + ", got '" + value + "'");
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) bad_value(key, v, "a 32-bit integer");
  return static_cast<int>(x);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) bad_value(key, v, "a finite number");
    return x;
  } catch (const std::logic_error&) {
    bad_value(key, v, "a finite number");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad_value(key, v, "true or false");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (v.empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
  if (v.back() == ',') bad_value(key, v, "a comma-separated integer list");
  return out;
}

std::string join(const std::vector<int>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + std::to_string(xs[i]);
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define ADVIL_STR(name, member) \
  Field { name, [](const ExperimentConfig& c) { return c.member; }, [](ExperimentConfig& c, const std::string& v) { c.member = v; } }
#define ADVIL_INT(name, member)                                                      \
  Field {                                                                            \
    name, [](const ExperimentConfig& c) { return std::to_string(c.member); },        \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_int(name, v); } \
  }
#define ADVIL_DBL(name, member)                                                         \
  Field {                                                                               \
    name, [](const ExperimentConfig& c) { return format_number(c.member); },            \
        [](ExperimentConfig& c, const std::string& v) { c.member = to_double(name, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      ADVIL_STR("experiment", experiment),
      Field{"seed", [](const ExperimentConfig& c) { return std::to_string(c.seed); },
            [](ExperimentConfig& c, const std::string& v) {
              std::uint64_t out = 0;
              const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
              if (ec != std::errc() || end != v.data() + v.size()) bad_value("seed", v, "a non-negative integer");
              c.seed = out;
            }},
      ADVIL_STR("out", out),
      ADVIL_STR("env.kind", env.kind),
      ADVIL_DBL("env.sigma", env.sigma),
      ADVIL_DBL("env.scale", env.scale),
      ADVIL_DBL("env.gamma", env.gamma),
      ADVIL_INT("env.horizon", env.horizon),
      ADVIL_INT("env.states", env.states),
      ADVIL_INT("env.actions", env.actions),
      ADVIL_INT("env.dim", env.dim),
      ADVIL_INT("env.branching", env.branching),
      ADVIL_STR("expert.kind", expert.kind),
      ADVIL_DBL("expert.mix", expert.mix),
      ADVIL_DBL("expert.temperature", expert.temperature),
      ADVIL_INT("expert.trajectories", expert.trajectories),
      ADVIL_INT("expert.length", expert.length),
      ADVIL_INT("expert.train_episodes", expert.train_episodes),
      ADVIL_INT("expert.train_horizon", expert.train_horizon),
      ADVIL_DBL("expert.train_beta", expert.train_beta),
      ADVIL_STR("expert.dataset", expert.dataset),
      ADVIL_STR("algorithm.kind", algorithm.kind),
      ADVIL_STR("algorithm.schedule", algorithm.schedule),
      ADVIL_INT("algorithm.rounds", algorithm.rounds),
      ADVIL_INT("algorithm.tau", algorithm.tau),
      ADVIL_DBL("algorithm.beta", algorithm.beta),
      ADVIL_DBL("algorithm.beta_multiplier", algorithm.beta_multiplier),
      ADVIL_DBL("algorithm.eta", algorithm.eta),
      ADVIL_DBL("algorithm.alpha", algorithm.alpha),
      ADVIL_DBL("algorithm.delta", algorithm.delta),
      ADVIL_DBL("algorithm.epsilon", algorithm.epsilon),
      ADVIL_STR("algorithm.cost_stream", algorithm.cost_stream),
      ADVIL_DBL("algorithm.cost_step", algorithm.cost_step),
      ADVIL_INT("algorithm.bc_steps", algorithm.bc_steps),
      ADVIL_DBL("algorithm.bc_lr", algorithm.bc_lr),
      Field{"algorithm.sweep", [](const ExperimentConfig& c) { return join(c.algorithm.sweep); },
            [](ExperimentConfig& c, const std::string& v) { c.algorithm.sweep = to_int_list("algorithm.sweep", v); }},
      ADVIL_INT("algorithm.repeats", algorithm.repeats),
      Field{"algorithm.optimism_check",
            [](const ExperimentConfig& c) { return std::string(c.algorithm.optimism_check ? "true" : "false"); },
            [](ExperimentConfig& c, const std::string& v) {
              c.algorithm.optimism_check = to_bool("algorithm.optimism_check", v);
            }},
      ADVIL_INT("eval.n_eval", eval.n_eval),
      ADVIL_INT("eval.cadence", eval.cadence),
      ADVIL_STR("eval.baseline", eval.baseline),
      ADVIL_DBL("eval.tail_fraction", eval.tail_fraction),
  };
  return table;
}

#undef ADVIL_STR
#undef ADVIL_INT
#undef ADVIL_DBL

void one_of(const std::string& key, const std::string& value, std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return;
    list += (list.empty() ? "" : ", ") + std::string(a);
  }
  throw InvalidInput("config key '" + key + "': '" + value + "' is not one of " + list);
}

void check(bool ok, const std::string& message) {
  if (!ok) throw InvalidInput(message);
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig config;
  std::map<std::string, const Field*> by_key;
  for (const Field& f : fields()) by_key[f.key] = &f;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) throw InvalidInput("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw InvalidInput("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    it->second->set(config, value);
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string emit_config(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string prefix = dot == std::string::npos ? "" : f.key.substr(0, dot);
    if (prefix != section) {
      out += '\n';
      section = prefix;
    }
    const std::string value = f.get(config);
    out += f.key + " =" + (value.empty() ? "" : " " + value) + '\n';
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  check(!c.experiment.empty(), "experiment name must not be empty");
  check(c.experiment.find_first_of(" \t\"\\/") == std::string::npos,
        "experiment name must not contain spaces, quotes or slashes");
  one_of("env.kind", c.env.kind, {"gridworld", "bandit", "tabular"});
  one_of("expert.kind", c.expert.kind, {"stochastic", "deterministic", "softmax", "optimal", "none"});
  one_of("algorithm.kind", c.algorithm.kind, {"ilarl", "brig", "mdpe_finite", "mdpe_infinite", "bc"});
  one_of("algorithm.schedule", c.algorithm.schedule, {"manual", "thm3", "thm4", "thm5", "thmBR"});
  one_of("algorithm.cost_stream", c.algorithm.cost_stream, {"random_walk", "fixed"});
  one_of("eval.baseline", c.eval.baseline, {"none", "bc", "ilarl"});

  check(c.env.sigma >= 0.0 && c.env.sigma <= 1.0, "env.sigma must lie in [0, 1]");
  check(c.env.scale > 0.0, "env.scale must be positive");
  check(c.env.gamma >= 0.0 && c.env.gamma < 1.0, "env.gamma must lie in [0, 1)");
  check(c.env.horizon >= 1, "env.horizon must be at least 1");
  check(c.env.states >= 1, "env.states must be at least 1");
  check(c.env.actions >= 2, "env.actions must be at least 2");
  check(c.env.dim >= 1, "env.dim must be at least 1");
  check(c.env.branching >= 1 && c.env.branching <= c.env.states, "env.branching must lie in [1, env.states]");

  check(c.expert.mix >= 0.0 && c.expert.mix <= 1.0, "expert.mix must lie in [0, 1]");
  check(c.expert.temperature > 0.0, "expert.temperature must be positive");
  check(c.expert.trajectories >= 1, "expert.trajectories must be at least 1");
  check(c.expert.length >= 0, "expert.length must be non-negative");
  check(c.expert.train_episodes >= 1 && c.expert.train_horizon >= 1, "expert training budget must be positive");
  check(c.expert.train_beta >= 0.0, "expert.train_beta must be non-negative");

  const AlgorithmConfig& a = c.algorithm;
  check(a.rounds >= 1, "algorithm.rounds must be at least 1");
  check(a.tau >= 1, "algorithm.tau must be at least 1");
  check(a.schedule != "manual" || a.tau <= a.rounds, "algorithm.tau cannot exceed algorithm.rounds");
  check(a.beta >= 0.0 && a.eta >= 0.0 && a.alpha >= 0.0, "algorithm.beta, eta and alpha must be non-negative");
  check(a.beta_multiplier > 0.0, "algorithm.beta_multiplier must be positive");
  check(a.delta > 0.0 && a.delta <= 1.0, "algorithm.delta must lie in (0, 1]");
  check(a.epsilon > 0.0, "algorithm.epsilon must be positive");
  check(a.cost_step >= 0.0, "algorithm.cost_step must be non-negative");
  check(a.bc_steps >= 0 && a.bc_lr > 0.0, "algorithm.bc_steps must be non-negative and bc_lr positive");
  for (int k : a.sweep) check(k >= 1, "algorithm.sweep entries must be positive");
  check(std::is_sorted(a.sweep.begin(), a.sweep.end()), "algorithm.sweep must be ascending");
  check(a.repeats >= 1, "algorithm.repeats must be at least 1");
  check(a.repeats == 1 || a.sweep.size() >= 2, "algorithm.repeats > 1 needs a sweep of at least two K");

  check(c.eval.n_eval >= 1, "eval.n_eval must be at least 1");
  check(c.eval.cadence >= 0, "eval.cadence must be non-negative");
  check(c.eval.tail_fraction > 0.0 && c.eval.tail_fraction <= 1.0, "eval.tail_fraction must lie in (0, 1]");

  const bool discounted_alg = a.kind == "ilarl" || a.kind == "mdpe_infinite" || a.kind == "bc";
  const bool adversarial = a.kind == "mdpe_finite" || a.kind == "mdpe_infinite";
  const bool imitation = !adversarial;
  if (discounted_alg) check(c.env.gamma > 0.0 || c.env.kind == "bandit", "discounted algorithms need env.gamma > 0");
  if (imitation) check(c.expert.kind != "none", "imitation runs need an expert");
  if (adversarial) check(c.env.kind == "tabular", "adversarial runs need env.kind = tabular");
  if (a.optimism_check) check(adversarial, "algorithm.optimism_check applies to adversarial runs only");
  if (!a.sweep.empty()) check(adversarial, "algorithm.sweep applies to adversarial runs only");
  if (c.expert.kind == "optimal") check(c.env.kind == "tabular", "expert.kind = optimal needs a tabular env");
  if (c.expert.kind == "softmax") check(c.env.kind == "bandit", "expert.kind = softmax needs a bandit env");
  if (c.expert.kind == "stochastic" || c.expert.kind == "deterministic")
    check(c.env.kind == "gridworld", "trained experts need a gridworld env");
  if (c.env.kind == "bandit") check(c.env.horizon == 1, "bandit runs have env.horizon = 1");
  if (a.schedule == "thm3") check(a.kind == "mdpe_finite", "schedule thm3 drives mdpe_finite");
  if (a.schedule == "thm4") check(a.kind == "mdpe_infinite", "schedule thm4 drives mdpe_infinite");
  if (a.schedule == "thm5") check(a.kind == "ilarl", "schedule thm5 drives ilarl");
  if (a.schedule == "thmBR") check(a.kind == "brig", "schedule thmBR drives brig");
  if (c.eval.baseline == "ilarl") check(a.kind == "brig", "eval.baseline = ilarl compares against brig runs");
  if (c.eval.baseline == "bc") check(a.kind == "ilarl" || a.kind == "brig", "eval.baseline = bc needs an imitation run");
}

}  // namespace advil
