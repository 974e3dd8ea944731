#include "advil/policy.hpp"

#include <algorithm>

namespace advil {

std::vector<double> Policy::distribution(const State& s, int stage) const {
  std::vector<double> out(static_cast<std::size_t>(num_actions()));
  distribution(s, stage, out);
  return out;
}

int Policy::sample(const State& s, int stage, Rng& rng) const {
  // Small action sets only; a stack buffer keeps sampling allocation free.
  constexpr int kMaxStack = 64;
  const int n = num_actions();
  if (n <= kMaxStack) {
    double buf[kMaxStack];
    std::span<double> probs(buf, static_cast<std::size_t>(n));
    distribution(s, stage, probs);
    return rng.categorical(probs);
  }
  const auto probs = distribution(s, stage);
  return rng.categorical(probs);
}

UniformPolicy::UniformPolicy(int num_actions) : num_actions_(num_actions) {
  require(num_actions >= 1, "policy needs at least one action");
}

void UniformPolicy::distribution(const State&, int, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 1.0 / num_actions_);
}

DeterministicPolicy::DeterministicPolicy(int num_actions, Rule rule)
    : num_actions_(num_actions), rule_(std::move(rule)) {
  require(num_actions >= 1, "policy needs at least one action");
}

void DeterministicPolicy::distribution(const State& s, int stage, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  out[static_cast<std::size_t>(rule_(s, stage))] = 1.0;
}

TablePolicy::TablePolicy(std::vector<Mat> tables) : tables_(std::move(tables)) {
  require(!tables_.empty(), "table policy needs at least one stage");
  for (const Mat& t : tables_) {
    require(t.rows() == tables_.front().rows() && t.cols() == tables_.front().cols(),
            "table policy stages must share a shape");
  }
}

const Mat& TablePolicy::table(int stage) const {
  if (tables_.size() == 1) return tables_.front();
  if (stage < 0 || stage >= stages()) throw InvalidInput("table policy stage out of range");
  return tables_[static_cast<std::size_t>(stage)];
}

void TablePolicy::distribution(const State& s, int stage, std::span<double> out) const {
  const Mat& t = table(stage);
  if (s.id < 0 || s.id >= t.rows()) throw InvalidInput("table policy state out of range");
  for (int a = 0; a < t.cols(); ++a) out[static_cast<std::size_t>(a)] = t(s.id, a);
}

MixturePolicy::MixturePolicy(PolicyPtr base, double mix) : base_(std::move(base)), mix_(mix) {
  require(base_ != nullptr, "mixture needs a base policy");
  require(mix >= 0.0 && mix <= 1.0, "mixture weight must lie in [0, 1]");
}

void MixturePolicy::distribution(const State& s, int stage, std::span<double> out) const {
  base_->distribution(s, stage, out);
  const double uniform = mix_ / static_cast<double>(out.size());
  for (double& p : out) p = (1.0 - mix_) * p + uniform;
}

}  // namespace advil
