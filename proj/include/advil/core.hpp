#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace advil {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// d-dimensional feature vector phi(s, a).
using FeatVec = Vec;
/// Linear weight vector (cost or value parameters) in feature space.
using WeightVec = Vec;

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Closed truncation interval [lo, hi] applied to Q estimates.
struct ClipRange {
  double lo = 0.0;
  double hi = 0.0;

  ClipRange() = default;
  ClipRange(double lo_, double hi_);

  /// Stage h (1-based) of an H-stage problem: [-(H-h+1), H-h+1].
  static ClipRange finite_stage(int horizon, int stage);
  /// Discounted problems: [-1/(1-gamma), 1/(1-gamma)].
  static ClipRange discounted(double gamma);

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool operator==(const ClipRange&) const = default;
};

inline double clip(double x, const ClipRange& r) { return x < r.lo ? r.lo : (x > r.hi ? r.hi : x); }

/// Euclidean projection onto the unit ball.
WeightVec project_l2_ball(const WeightVec& w);
/// Coordinate-wise clamp onto [lo, hi]^d.
WeightVec project_box(const WeightVec& w, double lo, double hi);

/// Softmax of already-scaled scores (max-subtracted, shift invariant).
std::vector<double> softmax_dist(std::span<const double> scores);
void softmax_inplace(std::span<double> scores);

/// Index of the smallest entry; ties resolve to the lowest index.
int argmin_lowest(std::span<const double> values);

void require(bool condition, const std::string& message);

}  // namespace advil
