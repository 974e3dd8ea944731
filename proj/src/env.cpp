#include "advil/env.hpp"

#include <cmath>

namespace advil {

CostNormalizer CostNormalizer::from_range(double lo, double hi) {
  require(hi > lo, "cost range must be non-degenerate");
  return {0.5 * (hi + lo), 0.5 * (hi - lo)};
}

HorizonSpec HorizonSpec::finite(int horizon) {
  require(horizon >= 1, "finite horizon requires H >= 1");
  HorizonSpec spec;
  spec.mode = Mode::finite;
  spec.horizon = horizon;
  spec.max_len = horizon;
  return spec;
}

HorizonSpec HorizonSpec::discounted(double gamma, int max_len) {
  require(gamma >= 0.0 && gamma < 1.0, "discount factor must lie in [0, 1)");
  HorizonSpec spec;
  spec.mode = Mode::discounted;
  spec.gamma = gamma;
  spec.max_len = max_len > 0 ? max_len : default_max_len(gamma);
  return spec;
}

HorizonSpec HorizonSpec::truncated(double gamma, int length) {
  require(length >= 1, "truncation length must be positive");
  HorizonSpec spec = discounted(gamma, length);
  spec.restart = false;
  return spec;
}

int HorizonSpec::default_max_len(double gamma) {
  return static_cast<int>(std::ceil(10.0 / (1.0 - gamma)));
}

FeatVec Environment::features(const State& s, int action) const {
  FeatVec phi(feature_dim());
  features_into(s, action, phi);
  return phi;
}

Mat Environment::feature_block(const State& s) const {
  Mat block;
  feature_block_into(s, block);
  return block;
}

void Environment::feature_block_into(const State& s, Mat& out) const {
  const int n_actions = num_actions();
  const int dim = feature_dim();
  out.resize(n_actions, dim);
  Vec phi(dim);
  for (int a = 0; a < n_actions; ++a) {
    features_into(s, a, phi);
    out.row(a) = phi.transpose();
  }
}

void Environment::check_action(int action) const {
  if (action < 0 || action >= num_actions()) throw InvalidInput("action index out of range");
}

}  // namespace advil
