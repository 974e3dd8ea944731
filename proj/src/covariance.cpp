#include "advil/covariance.hpp"

#include <cmath>

#include "advil/kernels.hpp"

namespace advil {

CovStats::CovStats(int dim) : CovStats(Mat::Identity(dim, dim), Mat::Identity(dim, dim), 0) {
  require(dim >= 1, "covariance dimension must be positive");
}

CovStats::CovStats(Mat lambda, Mat inverse, int count)
    : lambda_(std::move(lambda)), inverse_(std::move(inverse)), count_(count) {}

CovStats CovStats::build(std::span<const FeatVec> features, int dim) {
  Mat rows(static_cast<Eigen::Index>(features.size()), dim);
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].size() != dim) throw InvalidInput("feature dimension mismatch in covariance build");
    rows.row(static_cast<Eigen::Index>(i)) = features[i].transpose();
  }
  return build_rows(rows);
}

CovStats CovStats::build_rows(const Eigen::Ref<const Mat>& rows) {
  require(rows.cols() >= 1, "covariance dimension must be positive");
  return from_lambda(kernels::gram_plus_identity(rows), static_cast<int>(rows.rows()));
}

CovStats CovStats::from_lambda(Mat lambda, int count) {
  require(lambda.rows() == lambda.cols(), "lambda must be square");
  Eigen::LLT<Mat> llt(lambda);
  if (llt.info() != Eigen::Success) throw InternalError("covariance is not positive definite");
  Mat inverse = llt.solve(Mat::Identity(lambda.rows(), lambda.cols()));
  inverse = 0.5 * (inverse + inverse.transpose());
  return CovStats(std::move(lambda), std::move(inverse), count);
}

CovStats CovStats::from_parts(Mat lambda, Mat inverse, int count) {
  require(lambda.rows() == inverse.rows() && lambda.cols() == inverse.cols(), "lambda/inverse shape mismatch");
  return CovStats(std::move(lambda), std::move(inverse), count);
}

Vec CovStats::solve(const Vec& rhs) const {
  if (rhs.size() != dim()) throw InvalidInput("dimension mismatch in covariance solve");
  return inverse_ * rhs;
}

double CovStats::quad_inv(const Eigen::Ref<const Vec>& phi) const {
  if (phi.size() != dim()) throw InvalidInput("dimension mismatch in covariance quadratic form");
  return std::max(0.0, phi.dot(inverse_ * phi));
}

double bonus(const Eigen::Ref<const Vec>& phi, const CovStats& cov, double beta) {
  require(beta >= 0.0, "bonus scale beta must be non-negative");
  return beta * std::sqrt(cov.quad_inv(phi));
}

IncrementalCov::IncrementalCov(int dim) : lambda_(Mat::Identity(dim, dim)), inverse_(Mat::Identity(dim, dim)) {
  require(dim >= 1, "covariance dimension must be positive");
}

void IncrementalCov::add(const Eigen::Ref<const Vec>& phi) {
  if (phi.size() != dim()) throw InvalidInput("dimension mismatch in covariance update");
  lambda_.noalias() += phi * phi.transpose();
  const Vec u = inverse_ * phi;
  inverse_.noalias() -= (u * u.transpose()) / (1.0 + phi.dot(u));
  ++count_;
}

}  // namespace advil
