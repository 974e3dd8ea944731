#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "advil/core.hpp"
#include "advil/covariance.hpp"
#include "advil/rng.hpp"
#include "support.hpp"

namespace advil {
namespace {

FeatVec v2(double a, double b) {
  FeatVec f(2);
  f << a, b;
  return f;
}

TEST(CovBuild, EmptySequenceIsIdentity) {
  const CovStats c = CovStats::build({}, 2);
  EXPECT_TRUE(c.lambda().isApprox(Mat::Identity(2, 2)));
  EXPECT_EQ(c.count(), 0);
}

TEST(CovBuild, SingleFeatureAddsRankOne) {
  const std::vector<FeatVec> f = {v2(1, 0)};
  const CovStats c = CovStats::build(f, 2);
  Mat expected(2, 2);
  expected << 2, 0, 0, 1;
  EXPECT_TRUE(c.lambda().isApprox(expected));
  EXPECT_EQ(c.count(), 1);
}

TEST(CovBuild, TwoOrthogonalFeaturesGiveTwiceIdentity) {
  const std::vector<FeatVec> f = {v2(1, 0), v2(0, 1)};
  const CovStats c = CovStats::build(f, 2);
  EXPECT_TRUE(c.lambda().isApprox(2.0 * Mat::Identity(2, 2)));
  EXPECT_EQ(c.count(), 2);
}

TEST(CovBuild, DimensionMismatchIsRejected) {
  FeatVec three(3);
  three.setOnes();
  const std::vector<FeatVec> f = {v2(1, 0), three};
  EXPECT_THROW(CovStats::build(f, 2), InvalidInput);
}

TEST(CovBuild, InverseMatchesDirectSolve) {
  Rng rng(3);
  std::vector<FeatVec> f;
  for (int i = 0; i < 30; ++i) f.push_back(test::random_unit_ball(6, rng));
  const CovStats c = CovStats::build(f, 6);
  const Vec rhs = test::random_unit_ball(6, rng);
  const Vec direct = c.lambda().fullPivLu().solve(rhs);
  EXPECT_LE((c.inverse() * rhs - direct).norm() / direct.norm(), 1e-10);
  EXPECT_LE((c.solve(rhs) - direct).norm() / direct.norm(), 1e-10);
  Eigen::SelfAdjointEigenSolver<Mat> eig(c.lambda());
  EXPECT_GE(eig.eigenvalues().minCoeff(), 1.0 - 1e-12);
  EXPECT_TRUE(c.lambda().isApprox(c.lambda().transpose()));
}

TEST(Bonus, IdentityCovarianceUnitFeature) {
  EXPECT_DOUBLE_EQ(bonus(v2(1, 0), CovStats(2), 8.0), 8.0);
}

TEST(Bonus, ZeroFeatureHasNoBonus) {
  const std::vector<FeatVec> f = {v2(0.3, 0.7), v2(1, 1)};
  EXPECT_DOUBLE_EQ(bonus(v2(0, 0), CovStats::build(f, 2), 8.0), 0.0);
}

TEST(Bonus, DiagonalCovariance) {
  const std::vector<FeatVec> f = {v2(1, 0)};
  EXPECT_NEAR(bonus(v2(1, 0), CovStats::build(f, 2), 8.0), 8.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(bonus(v2(1, 0), CovStats::build(f, 2), 8.0), 5.6569, 1e-4);
}

TEST(Bonus, NegativeBetaIsRejected) { EXPECT_THROW(bonus(v2(1, 0), CovStats(2), -1.0), InvalidInput); }

TEST(BonusProperty, MatchesDenseSolveOracle) {
  Rng rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int d = 1 + static_cast<int>(rng.uniform() * 20);
    const int n = static_cast<int>(rng.uniform() * 50);
    std::vector<FeatVec> f;
    for (int i = 0; i < n; ++i) f.push_back(test::random_unit_ball(d, rng));
    const CovStats c = CovStats::build(f, d);
    Mat lambda = Mat::Identity(d, d);
    for (const FeatVec& x : f) lambda += x * x.transpose();
    const FeatVec phi = test::random_unit_ball(d, rng);
    const double beta = 10.0 * rng.uniform();
    const double oracle = beta * std::sqrt(phi.dot(lambda.fullPivLu().solve(phi)));
    EXPECT_LE(std::abs(bonus(phi, c, beta) - oracle), 1e-8 * std::max(1.0, oracle));
  }
}

TEST(BonusProperty, NeverIncreasesWithMoreData) {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 5;
    std::vector<FeatVec> f;
    const FeatVec probe = test::random_unit_ball(d, rng);
    double previous = bonus(probe, CovStats::build(f, d), 1.0);
    for (int i = 0; i < 25; ++i) {
      f.push_back(test::random_unit_ball(d, rng));
      const double now = bonus(probe, CovStats::build(f, d), 1.0);
      EXPECT_LE(now, previous + 1e-12);
      previous = now;
    }
  }
}

TEST(IncrementalCov, MatchesRebuiltCovariance) {
  Rng rng(29);
  IncrementalCov inc(7);
  std::vector<FeatVec> f;
  for (int i = 0; i < 200; ++i) {
    f.push_back(test::random_unit_ball(7, rng));
    inc.add(f.back());
  }
  const CovStats direct = CovStats::build(f, 7);
  EXPECT_LE((inc.lambda() - direct.lambda()).norm(), 1e-9);
  EXPECT_LE((inc.inverse() - direct.inverse()).norm() / direct.inverse().norm(), 1e-9);
  EXPECT_EQ(inc.count(), 200);
}

TEST(Clip, Examples) {
  const ClipRange r(-2, 2);
  EXPECT_DOUBLE_EQ(clip(5, r), 2);
  EXPECT_DOUBLE_EQ(clip(-5, r), -2);
  EXPECT_DOUBLE_EQ(clip(0.5, r), 0.5);
}

TEST(Clip, RangesFollowHorizonAndDiscount) {
  EXPECT_EQ(ClipRange::finite_stage(5, 1), ClipRange(-5, 5));
  EXPECT_EQ(ClipRange::finite_stage(5, 5), ClipRange(-1, 1));
  const ClipRange d = ClipRange::discounted(0.9);
  EXPECT_NEAR(d.hi, 10.0, 1e-12);
  EXPECT_NEAR(d.lo, -10.0, 1e-12);
  EXPECT_THROW(ClipRange(1, 0), InvalidInput);
  EXPECT_THROW(ClipRange::finite_stage(3, 4), InvalidInput);
  EXPECT_THROW(ClipRange::discounted(1.0), InvalidInput);
}

TEST(ClipProperty, Idempotent) {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    const double a = 10 * rng.normal(), b = 10 * rng.normal();
    const ClipRange r(std::min(a, b), std::max(a, b));
    const double x = 20 * rng.normal();
    EXPECT_EQ(clip(clip(x, r), r), clip(x, r));
    EXPECT_TRUE(r.contains(clip(x, r)));
  }
}

TEST(ProjectBall, Examples) {
  EXPECT_TRUE(project_l2_ball(v2(3, 4)).isApprox(v2(0.6, 0.8)));
  EXPECT_EQ(project_l2_ball(v2(0.3, 0.4)), v2(0.3, 0.4));
  EXPECT_EQ(project_l2_ball(v2(0, 0)), v2(0, 0));
}

TEST(ProjectBallProperty, IdempotentAndNonExpansive) {
  Rng rng(37);
  for (int i = 0; i < 200; ++i) {
    WeightVec a(4), b(4);
    for (int j = 0; j < 4; ++j) {
      a[j] = 2 * rng.normal();
      b[j] = 2 * rng.normal();
    }
    const WeightVec pa = project_l2_ball(a), pb = project_l2_ball(b);
    EXPECT_LE(pa.norm(), 1.0 + 1e-12);
    EXPECT_TRUE(project_l2_ball(pa).isApprox(pa));
    EXPECT_LE((pa - pb).norm(), (a - b).norm() + 1e-12);
  }
}

TEST(ProjectBox, ClampsEachCoordinate) {
  EXPECT_EQ(project_box(v2(-0.5, 1.5), 0, 1), v2(0, 1));
  EXPECT_EQ(project_box(v2(0.25, 0.75), 0, 1), v2(0.25, 0.75));
}

TEST(Softmax, Examples) {
  const std::vector<double> equal = {0, 0};
  const auto p = softmax_dist(equal);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);

  const std::vector<double> ratio = {0, -std::log(2.0)};
  const auto q = softmax_dist(ratio);
  EXPECT_NEAR(q[0], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(q[1], 1.0 / 3.0, 1e-12);

  const std::vector<double> large = {1000, 1000};
  const auto r = softmax_dist(large);
  EXPECT_DOUBLE_EQ(r[0], 0.5);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
}

TEST(SoftmaxProperty, DistributionShiftInvariantArgmaxPreserved) {
  Rng rng(41);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(5), shifted(5);
    const double c = 100 * rng.normal();
    for (int j = 0; j < 5; ++j) {
      x[static_cast<std::size_t>(j)] = 5 * rng.normal();
      shifted[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)] + c;
    }
    const auto p = softmax_dist(x), ps = softmax_dist(shifted);
    double sum = 0.0;
    for (int j = 0; j < 5; ++j) {
      EXPECT_GE(p[static_cast<std::size_t>(j)], 0.0);
      EXPECT_NEAR(p[static_cast<std::size_t>(j)], ps[static_cast<std::size_t>(j)], 1e-12);
      sum += p[static_cast<std::size_t>(j)];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    EXPECT_EQ(std::max_element(p.begin(), p.end()) - p.begin(), std::max_element(x.begin(), x.end()) - x.begin());
  }
}

TEST(Argmin, LowestIndexOnTies) {
  const std::vector<double> v = {3, 1, 1, 2};
  EXPECT_EQ(argmin_lowest(v), 1);
}

TEST(Seeds, DerivedSeedsAreStableAndDistinct) {
  EXPECT_EQ(derive_seed(5, "env", 2), derive_seed(5, "env", 2));
  EXPECT_NE(derive_seed(5, "env", 2), derive_seed(5, "env", 3));
  EXPECT_NE(derive_seed(5, "env", 2), derive_seed(5, "expert", 2));
  EXPECT_NE(derive_seed(5, "env", 2), derive_seed(6, "env", 2));
}

TEST(Seeds, IdenticalSeedsGiveIdenticalStreams) {
  Rng a(99), b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  Rng c(99);
  const Rng sub1 = c.substream("x", 1);
  c.uniform();
  const Rng sub2 = c.substream("x", 1);
  EXPECT_EQ(sub1.seed(), sub2.seed());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng rng(7);
  double su = 0, sn = 0, sn2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

}  // namespace
}  // namespace advil
