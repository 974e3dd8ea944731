#pragma once

#include <cmath>
#include <memory>

#include "advil/envs.hpp"
#include "advil/rng.hpp"

namespace advil::test {

inline Mat random_policy_table(int states, int actions, Rng& rng) {
  Mat pi(states, actions);
  for (int s = 0; s < states; ++s) {
    for (int a = 0; a < actions; ++a) pi(s, a) = 0.05 + rng.uniform();
    pi.row(s) /= pi.row(s).sum();
  }
  return pi;
}

inline WeightVec random_unit_ball(int dim, Rng& rng) {
  WeightVec w(dim);
  for (int i = 0; i < dim; ++i) w[i] = rng.normal();
  return w * (std::pow(rng.uniform(), 1.0 / dim) / w.norm());
}

inline std::shared_ptr<TabularEnv> random_tabular(int states, int actions, int branching, std::uint64_t seed) {
  Rng rng(seed);
  return TabularEnv::random(states, actions, branching, rng);
}

/// Two-state chain that restarts uniformly: every (s, a) moves to either state w.p. 1/2.
inline std::shared_ptr<TabularEnv> symmetric_chain() {
  Mat p = Mat::Constant(4, 2, 0.5);
  Mat c(2, 2);
  c << 0.1, -0.2, 0.3, 0.4;
  Vec init(2);
  init << 0.5, 0.5;
  return std::make_shared<TabularEnv>(2, 2, p, c, init);
}

/// Total-variation distance between two S x A measures.
inline double tv(const Mat& a, const Mat& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

}  // namespace advil::test
