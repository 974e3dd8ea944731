#include "advil/core.hpp"

#include <algorithm>
#include <cmath>

namespace advil {

ClipRange::ClipRange(double lo_, double hi_) : lo(lo_), hi(hi_) {
  require(std::isfinite(lo_) && std::isfinite(hi_) && lo_ <= hi_, "clip range requires finite lo <= hi");
}

ClipRange ClipRange::finite_stage(int horizon, int stage) {
  require(horizon >= 1 && stage >= 1 && stage <= horizon, "stage must lie in [1, H]");
  const double width = horizon - stage + 1;
  return {-width, width};
}

ClipRange ClipRange::discounted(double gamma) {
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  const double width = 1.0 / (1.0 - gamma);
  return {-width, width};
}

WeightVec project_l2_ball(const WeightVec& w) {
  const double norm = w.norm();
  if (norm <= 1.0) return w;
  return w / norm;
}

WeightVec project_box(const WeightVec& w, double lo, double hi) {
  return w.cwiseMax(lo).cwiseMin(hi);
}

void softmax_inplace(std::span<double> scores) {
  if (scores.empty()) return;
  const double top = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - top);
    total += s;
  }
  for (double& s : scores) s /= total;
}

std::vector<double> softmax_dist(std::span<const double> scores) {
  std::vector<double> out(scores.begin(), scores.end());
  softmax_inplace(out);
  return out;
}

int argmin_lowest(std::span<const double> values) {
  require(!values.empty(), "argmin of empty range");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

void require(bool condition, const std::string& message) {
  if (!condition) throw InvalidInput(message);
}

}  // namespace advil
