#include <gtest/gtest.h>

#include <random>

#include "cmlab/calg.hpp"

using namespace cmlab;

namespace {
CMat m1(double v) { return CMat::Constant(1, 1, cplx(v, 0)); }
}  // namespace

TEST(Modulus, PureHermitian) {
  auto c = modulus_of_convexity(QuadraticGauge::make(m1(1), m1(0)), MetricForm::identity(1));
  EXPECT_TRUE(c.convex);
  EXPECT_NEAR(c.value, 1.0, 1e-12);
}

TEST(Modulus, ScalarHolomorphicPart) {
  auto c = modulus_of_convexity(QuadraticGauge::make(m1(1), m1(0.5)), MetricForm::identity(1));
  EXPECT_NEAR(c.value, 0.5, 1e-12);
}

TEST(Modulus, OffDiagonalHolomorphicPart) {
  CMat B(2, 2);
  B << 0, 1, 1, 0;
  auto c = modulus_of_convexity(QuadraticGauge::make(2.0 * CMat::Identity(2, 2), B), MetricForm::identity(2));
  EXPECT_NEAR(c.value, 1.0, 1e-12);
  // Dense sampling of P on the unit sphere.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  double best = 1e9;
  for (int k = 0; k < 20000; ++k) {
    CVec z(2);
    z << cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng));
    z.normalize();
    best = std::min(best, QuadraticGauge::make(2.0 * CMat::Identity(2, 2), B).eval(z));
  }
  EXPECT_NEAR(best, 1.0, 2e-2);
}

TEST(Modulus, NonconvexMarker) {
  auto c = modulus_of_convexity(QuadraticGauge::make(m1(1), m1(1.1)), MetricForm::identity(1));
  EXPECT_FALSE(c.convex);
}

TEST(Degree, MatchesModulusExamples) {
  EXPECT_NEAR(degree_of_convexity(QuadraticGauge::make(m1(1), m1(0)), MetricForm::identity(1)), 1.0, 1e-3);
  EXPECT_NEAR(degree_of_convexity(QuadraticGauge::make(m1(1), m1(0.5)), MetricForm::identity(1)), 0.5, 1e-3);
  EXPECT_NEAR(degree_of_convexity(QuadraticGauge::make(2.0 * CMat::Identity(2, 2), CMat::Zero(2, 2)),
                                  MetricForm::identity(2)),
              2.0, 2e-3);
}

TEST(Takagi, Examples) {
  Takagi t0 = takagi(CMat::Zero(2, 2));
  EXPECT_NEAR(t0.D.norm(), 0.0, 1e-14);
  CMat B = CMat::Zero(2, 2);
  B(0, 0) = 3;
  B(1, 1) = 2;
  Takagi t1 = takagi(B);
  EXPECT_NEAR(t1.D[0], 3, 1e-12);
  EXPECT_NEAR(t1.D[1], 2, 1e-12);
  EXPECT_NEAR((t1.U * t1.D.cast<cplx>().asDiagonal() * t1.U.transpose() - B).norm(), 0, 1e-12);
  CMat S(2, 2);
  S << 0, 1, 1, 0;
  Takagi t2 = takagi(S);
  EXPECT_NEAR(t2.D[0], 1, 1e-12);
  EXPECT_NEAR(t2.D[1], 1, 1e-12);
  EXPECT_NEAR((t2.U * t2.D.cast<cplx>().asDiagonal() * t2.U.transpose() - S).norm(), 0, 1e-12);
}

TEST(Takagi, RejectsNonSymmetric) {
  CMat B(2, 2);
  B << 0, 1, 2, 0;
  EXPECT_THROW(takagi(B), Error);
}

TEST(Kappa, Examples) {
  auto k1 = kappa(m1(1), m1(0.5));
  EXPECT_NEAR(k1.max_eig(), 0.25, 1e-14);
  EXPECT_NEAR(*k1.sigma, 4.0 / 3.0, 1e-12);
  auto k2 = kappa(2.0 * CMat::Identity(2, 2), CMat::Identity(2, 2));
  EXPECT_NEAR((k2.K - 0.25 * CMat::Identity(2, 2)).norm(), 0, 1e-14);
  EXPECT_NEAR(*k2.sigma, 8.0 / 3.0, 1e-12);
  auto k3 = kappa(m1(0.5), m1(0));
  EXPECT_NEAR(*k3.sigma, 1.0, 1e-14);
  EXPECT_THROW(kappa(m1(-1), m1(0)), Error);
}

TEST(Kappa, SigmaAbsentBeyondOne) {
  auto k = kappa(m1(1), m1(1.5));
  EXPECT_FALSE(k.sigma.has_value());
}

TEST(Conversions, RobustnessToModulus) {
  RobustnessContext ctx;
  ctx.diameter = 10;
  EXPECT_NEAR(robustness_to_modulus(0.2, ctx), 0.005, 1e-15);
  ctx.diameter = 0.1;
  EXPECT_NEAR(robustness_to_modulus(0.3, ctx), 0.3, 1e-15);
  ctx.C = 100;
  EXPECT_NEAR(modulus_to_robustness(0.1, ctx), 1e-4, 1e-16);
  ctx.diameter = -1;
  EXPECT_THROW(robustness_to_modulus(0.3, ctx), Error);
}

TEST(WeightedNorm, UnitaryProduct) {
  CMat W = 0.3 * CMat::Identity(2, 2);
  EXPECT_NEAR(weighted_norm(W, MetricForm::identity(2)), 0.3, 1e-12);
}
