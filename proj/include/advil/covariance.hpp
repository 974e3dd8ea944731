#pragma once

#include <span>

#include "advil/core.hpp"

namespace advil {

/// Ridge covariance Lambda = I + sum phi phi^T with a cached inverse.
/// Immutable once built; the inverse comes from a Cholesky factorization.
class CovStats {
 public:
  explicit CovStats(int dim);

  static CovStats build(std::span<const FeatVec> features, int dim);
  /// Rows of `rows` are feature vectors.
  static CovStats build_rows(const Eigen::Ref<const Mat>& rows);
  /// Adopts an accumulated Lambda; factorizes it.
  static CovStats from_lambda(Mat lambda, int count);
  /// Adopts Lambda together with an already-known inverse (incremental path).
  static CovStats from_parts(Mat lambda, Mat inverse, int count);

  int dim() const { return static_cast<int>(lambda_.rows()); }
  int count() const { return count_; }
  const Mat& lambda() const { return lambda_; }
  const Mat& inverse() const { return inverse_; }

  Vec solve(const Vec& rhs) const;
  /// phi^T Lambda^{-1} phi
  double quad_inv(const Eigen::Ref<const Vec>& phi) const;

 private:
  CovStats(Mat lambda, Mat inverse, int count);

  Mat lambda_;
  Mat inverse_;
  int count_ = 0;
};

/// beta * ||phi||_{Lambda^{-1}}
double bonus(const Eigen::Ref<const Vec>& phi, const CovStats& cov, double beta);

/// Monotonically growing covariance with a Sherman-Morrison inverse update.
class IncrementalCov {
 public:
  explicit IncrementalCov(int dim);

  void add(const Eigen::Ref<const Vec>& phi);

  int dim() const { return static_cast<int>(lambda_.rows()); }
  int count() const { return count_; }
  const Mat& lambda() const { return lambda_; }
  const Mat& inverse() const { return inverse_; }
  double quad_inv(const Eigen::Ref<const Vec>& phi) const { return phi.dot(inverse_ * phi); }

  CovStats snapshot() const { return CovStats::from_parts(lambda_, inverse_, count_); }

 private:
  Mat lambda_;
  Mat inverse_;
  int count_ = 0;
};

}  // namespace advil
