#include <gtest/gtest.h>

#include <cmath>

#include "cmlab/domain.hpp"

using namespace cmlab;

namespace {

Point pt(cplx a, cplx b) {
  Point z(2);
  z << a, b;
  return z;
}

CMat diag2(double a, double b) {
  CMat M = CMat::Zero(2, 2);
  M(0, 0) = a;
  M(1, 1) = b;
  return M;
}

}  // namespace

TEST(BoundaryGraph, UnitBall) {
  SmoothDomain ball = SmoothDomain::ball(CVec::Zero(2), 1.0);
  BoundaryGraph g = ball.boundary_graph(pt(0, 1));
  EXPECT_NEAR((g.frame.adjoint() * g.frame - CMat::Identity(2, 2)).norm(), 0, 1e-10);
  EXPECT_NEAR(g.restricted.A(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(g.restricted.B(0, 0)), 0.0, 1e-12);
  // Reconstructed graph points stay on the sphere to third order.
  for (double s : {1e-2, 1e-3}) {
    CVec w = CVec::Zero(1);
    w[0] = cplx(s, 0.7 * s);
    double t = g.restricted.eval(w);
    CVec v(2);
    v << w[0], t;
    Point q = g.p + g.frame * v;
    EXPECT_LE(std::abs(ball.rho_value(to_real(q))), 10 * std::pow(s, 3));
  }
}

TEST(BoundaryGraph, SphereScaling) {
  double m1 = 0;
  for (double R : {1.0, 2.0, 4.0}) {
    SmoothDomain ball = SmoothDomain::ball(CVec::Zero(2), R);
    Convexity c = modulus_of_convexity(ball.boundary_graph(pt(0, R)).restricted, MetricForm::identity(1));
    if (R == 1.0) m1 = c.value;
    EXPECT_NEAR(c.value, m1 / R, 1e-12);
  }
}

TEST(BoundaryGraph, EllipsoidSymbolic) {
  SmoothDomain e = SmoothDomain::ellipsoid(diag2(1, 4), CVec::Zero(2));
  BoundaryGraph g = e.boundary_graph(pt(0, 0.5));
  // rho(z1, 1/2 - t) = 0 gives t = |z1|^2 / 4 to second order.
  EXPECT_NEAR(g.restricted.A(0, 0).real(), 0.25, 1e-12);
  EXPECT_NEAR(std::abs(g.restricted.B(0, 0)), 0.0, 1e-12);
}

TEST(BoundaryGraph, RejectsOffBoundaryPoint) {
  SmoothDomain ball = SmoothDomain::ball(CVec::Zero(2), 1.0);
  EXPECT_THROW(ball.boundary_graph(pt(0, 0.9)), Error);
}

TEST(CConvexity, BallRotationInvariant) {
  SmoothDomain ball = SmoothDomain::ball(CVec::Zero(2), 1.0);
  double lo = 1e9, hi = 0;
  for (const auto& s : ball.sample_boundary(500)) {
    double m = modulus_of_convexity(ball.boundary_graph(from_real(s.x)).restricted, MetricForm::identity(1)).value;
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  EXPECT_GT(lo, 0);
  EXPECT_LE(hi - lo, 0.01 * hi);
  EXPECT_NEAR(cconvexity_modulus(ball, 500).modulus.value, lo, 1e-12);
}

TEST(CConvexity, DecreasesWithRadius) {
  double prev = 1e9;
  for (double R : {1.0, 2.0, 4.0}) {
    DomainModulus m = cconvexity_modulus(SmoothDomain::ball(CVec::Zero(2), R), 200);
    EXPECT_TRUE(m.modulus.convex);
    EXPECT_LT(m.modulus.value, prev);
    prev = m.modulus.value;
  }
}

TEST(CConvexity, AspectFourBelowBall) {
  double ball = cconvexity_modulus(SmoothDomain::ball(CVec::Zero(2), 1.0), 500).modulus.value;
  DomainModulus e = cconvexity_modulus(SmoothDomain::ellipsoid(diag2(1, 16), CVec::Zero(2)), 500);
  EXPECT_TRUE(e.modulus.convex);
  EXPECT_LT(e.modulus.value, ball);
}

TEST(CConvexity, DumbbellNonconvex) {
  DomainModulus m = cconvexity_modulus(SmoothDomain::dumbbell(1.0, 1.05), 2000);
  EXPECT_FALSE(m.modulus.convex);
  EXPECT_EQ(m.witness.size(), 4);
}

TEST(Ring, ThicknessOfConcentricBalls) {
  RingDomain ring(SmoothDomain::ball(CVec::Zero(2), 1.0), SmoothDomain::ball(CVec::Zero(2), 3.0), 400);
  EXPECT_NEAR(ring.thickness(), 1.0, 1e-6);
  EXPECT_NEAR(ring.diameter(), 6.0, 0.05);
  EXPECT_TRUE(ring.is_centered_ball_ring());
}

TEST(Ring, RejectsNonNested) {
  EXPECT_THROW(RingDomain(SmoothDomain::ball(CVec::Zero(2), 2.0), SmoothDomain::ball(CVec::Zero(2), 1.0), 100),
               Error);
}

TEST(Deformation, Endpoints) {
  RingDomain ring(SmoothDomain::ellipsoid(diag2(1, 4), CVec::Zero(2)),
                  SmoothDomain::ellipsoid(diag2(0.25, 1), CVec::Zero(2)), 200);
  RingDomain r1 = deformation_family(ring, 1.0);
  EXPECT_NEAR((r1.omega0().H() - ring.omega0().H()).norm(), 0, 0);
  DeformationOptions opt;
  opt.r = 0.2;
  opt.R = 0.45;
  RingDomain r0 = deformation_family(ring, 0.0, opt);
  EXPECT_EQ(r0.omega0().kind(), SmoothDomain::Kind::ball);
  EXPECT_NEAR(r0.omega0().radius(), 0.2, 1e-15);
  EXPECT_NEAR(r0.omega1().radius(), 0.45, 1e-15);
  RingDomain rh = deformation_family(ring, 0.5, opt);
  EXPECT_TRUE(cconvexity_modulus(rh.omega0(), 200).modulus.convex);
  EXPECT_TRUE(cconvexity_modulus(rh.omega1(), 200).modulus.convex);
}

TEST(Deformation, NestingAlongFamily) {
  RingDomain ring(SmoothDomain::ellipsoid(diag2(1, 4), CVec::Zero(2)),
                  SmoothDomain::ellipsoid(diag2(0.25, 1), CVec::Zero(2)), 200);
  std::vector<RingDomain> fam;
  for (int k = 0; k <= 20; ++k) fam.push_back(deformation_family(ring, k / 20.0));
  for (int s = 0; s < 20; ++s)
    for (int t = s + 1; t <= 20; t += 5)
      for (const auto& b : fam[s].omega0().sample_boundary(100))
        EXPECT_TRUE(fam[t].omega0().inside(b.x)) << "s=" << s << " t=" << t;
}

TEST(Deformation, RejectsCallbackDomains) {
  RingDomain ring(SmoothDomain::ball(CVec::Zero(2), 0.3), SmoothDomain::dumbbell(1.0, 1.2), 200);
  EXPECT_THROW(deformation_family(ring, 0.5), Error);
}

TEST(Subsolution, BallRing) {
  RingDomain ring(SmoothDomain::ball(CVec::Zero(2), 1.0), SmoothDomain::ball(CVec::Zero(2), 3.0), 500);
  SubsolutionOptions opt;
  opt.samples = 300;
  Subsolution psi(ring, MetricForm::identity(2), opt);
  EXPECT_GT(psi.sigma(), 0.0);
  EXPECT_LE(psi.boundary_error0(), 1e-6);
  EXPECT_LE(psi.boundary_error1(), 1e-6);
  EXPECT_GE(psi.min_normal_derivative0(), psi.sigma());
  EXPECT_TRUE(psi.ordering().ok());
}

TEST(Subsolution, LargeConstantRejected) {
  RingDomain ring(SmoothDomain::ball(CVec::Zero(2), 1.0), SmoothDomain::ball(CVec::Zero(2), 3.0), 500);
  SubsolutionOptions opt;
  opt.c = 0.9;
  try {
    Subsolution psi(ring, MetricForm::identity(2), opt);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("ordering"), std::string::npos);
  }
}

TEST(Subsolution, EllipsoidRing) {
  RingDomain ring(SmoothDomain::ellipsoid(diag2(1, 4), CVec::Zero(2)),
                  SmoothDomain::ellipsoid(diag2(0.25, 1), CVec::Zero(2)), 500);
  SubsolutionOptions opt;
  opt.samples = 300;
  Subsolution psi(ring, MetricForm::identity(2), opt);
  EXPECT_GT(psi.sigma(), 0.0);
}
