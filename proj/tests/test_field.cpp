#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cmlab/field.hpp"

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

RingDomain ball_ring(double r, double R, int samples = 400) {
  return RingDomain(SmoothDomain::ball(CVec::Zero(2), r), SmoothDomain::ball(CVec::Zero(2), R), samples);
}

}  // namespace

TEST(Jet, SquaredNorm) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), CMat::Zero(2, 2));
  Jet j = f->jet(pt(0, 1));
  EXPECT_NEAR((j.grad - pt(0, 1)).norm(), 0, 1e-15);
  EXPECT_NEAR((j.herm - CMat::Identity(2, 2)).norm(), 0, 1e-15);
  EXPECT_NEAR(j.hol.norm(), 0, 1e-15);
}

TEST(Jet, LogModulus) {
  auto f = AnalyticField::log_hermitian(CMat::Identity(2, 2), 0.5);
  Jet j = f->jet(pt(0, 1));
  EXPECT_NEAR((j.grad - pt(0, 0.5)).norm(), 0, 1e-15);
  EXPECT_NEAR((j.herm - diag2(0.5, 0)).norm(), 0, 1e-15);
  EXPECT_NEAR(std::abs(j.hol(1, 1) + 0.5), 0, 1e-15);
}

TEST(Jet, RealCallbackMatchesClosedForm) {
  // Phi = Re(z1 z2) + |z|^2 through the real-coordinate path.
  auto cb = [](const RVec& x) {
    RealJet r;
    r.value = x[0] * x[2] - x[1] * x[3] + x.squaredNorm();
    r.grad = 2 * x;
    r.grad[0] += x[2];
    r.grad[2] += x[0];
    r.grad[1] -= x[3];
    r.grad[3] -= x[1];
    r.hess = 2 * RMat::Identity(4, 4);
    r.hess(0, 2) = r.hess(2, 0) = 1;
    r.hess(1, 3) = r.hess(3, 1) = -1;
    return r;
  };
  auto f = AnalyticField::from_real(2, cb, "test");
  CMat B(2, 2);
  B << 0, 0.5, 0.5, 0;
  auto g = AnalyticField::quadratic(CMat::Identity(2, 2), B);
  Point z = pt(cplx(0.3, -0.2), cplx(0.7, 0.4));
  Jet a = f->jet(z), b = g->jet(z);
  EXPECT_NEAR(a.value, b.value, 1e-14);
  EXPECT_NEAR((a.grad - b.grad).norm(), 0, 1e-14);
  EXPECT_NEAR((a.herm - b.herm).norm(), 0, 1e-14);
  EXPECT_NEAR((a.hol - b.hol).norm(), 0, 1e-14);
}

TEST(TangentGauge, LogModulus) {
  auto f = AnalyticField::log_hermitian(CMat::Identity(2, 2), 0.5);
  TangentGauge g = tangent_gauge(f->jet(pt(0, 1)), MetricForm::identity(2), 0.1);
  EXPECT_NEAR(g.A(0, 0).real(), 0.5, 1e-12);
  EXPECT_NEAR(std::abs(g.B(0, 0)), 0.0, 1e-12);
  ASSERT_TRUE(g.kappa.has_value());
  EXPECT_NEAR(g.sigma(), 1.0, 1e-12);
  EXPECT_FALSE(g.S.has_value());  // log|z| has a degenerate complex Hessian
}

TEST(TangentGauge, HolomorphicPerturbation) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), diag2(0.5, 0));
  TangentGauge g = tangent_gauge(f->jet(pt(0, 1)), MetricForm::identity(2), 0.1);
  EXPECT_NEAR(g.A(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(g.B(0, 0)), 0.5, 1e-12);
  EXPECT_NEAR(g.kappa->max_eig(), 0.25, 1e-12);
  EXPECT_NEAR(g.sigma(), 4.0 / 3.0, 1e-12);
}

TEST(TangentGauge, RotatedPoint) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), CMat::Zero(2, 2));
  TangentGauge g = tangent_gauge(f->jet(pt(1, 1) / std::sqrt(2.0)), MetricForm::identity(2), 0.1);
  EXPECT_NEAR(g.A(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(g.B(0, 0)), 0.0, 1e-12);
}

TEST(TangentGauge, FrameInvariance) {
  CMat B(2, 2);
  B << 0.3, cplx(0.1, 0.2), cplx(0.1, 0.2), -0.2;
  CMat A(2, 2);
  A << 1.5, cplx(0.2, -0.1), cplx(0.2, 0.1), 0.8;
  auto f = AnalyticField::quadratic(A, B, pt(0.3, cplx(0, 0.5)));
  Point z = pt(cplx(0.4, 0.1), cplx(-0.2, 0.6));
  Jet j = f->jet(z);
  MetricForm G = MetricForm::identity(2);
  TangentGauge g0 = tangent_gauge(j, G, 0.1);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 20; ++k) {
    CMat M(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) M(a, b) = cplx(nd(rng), nd(rng));
    TangentGauge g1 = tangent_gauge(transform_jet(j, M), transform_metric(G, M), 0.1);
    EXPECT_NEAR(g1.sigma(), g0.sigma(), 1e-6);
    EXPECT_NEAR(g1.kappa->max_eig(), g0.kappa->max_eig(), 1e-6);
  }
}

TEST(TangentGauge, GradientDomination) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 50; ++k) {
    CMat X(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) X(a, b) = cplx(nd(rng), nd(rng));
    CMat A = X * X.adjoint() + 0.1 * CMat::Identity(2, 2);
    auto f = AnalyticField::quadratic(A, CMat::Zero(2, 2));
    Jet j = f->jet(pt(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))));
    double eps = 1.0 / A.inverse().trace().real();  // tr(H^-1) = 1/eps
    TangentGauge g = tangent_gauge(j, MetricForm::identity(2), eps);
    ASSERT_TRUE(g.S.has_value());
    double gn = gradient_norm(j, MetricForm::identity(2));
    EXPECT_LE(*g.S, gn * gn + 1e-9);
  }
}

TEST(QcModulus, Examples) {
  auto log = AnalyticField::log_hermitian(CMat::Identity(2, 2), 0.5);
  Convexity c = qc_modulus(log->jet(pt(0, 1)), MetricForm::identity(2));
  EXPECT_TRUE(c.convex);
  EXPECT_NEAR(c.value, 0.5, 1e-12);
  auto f99 = AnalyticField::quadratic(CMat::Identity(2, 2), diag2(0.99, 0));
  c = qc_modulus(f99->jet(pt(0, 1)), MetricForm::identity(2));
  EXPECT_TRUE(c.convex);
  EXPECT_NEAR(c.value, 0.01, 1e-10);
  auto f11 = AnalyticField::quadratic(CMat::Identity(2, 2), diag2(1.1, 0));
  EXPECT_FALSE(qc_modulus(f11->jet(pt(0, 1)), MetricForm::identity(2)).convex);
}

TEST(LevelsetModulus, SphereScaling) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), CMat::Zero(2, 2));
  for (double R : {0.5, 1.0, 2.0}) {
    Convexity c = levelset_modulus(f->jet(pt(0, R)), MetricForm::identity(2));
    EXPECT_NEAR(c.value, 1.0 / (2 * R), 1e-12);
  }
}

TEST(Plurisubharmonicity, IndefiniteHessianFlag) {
  auto f = AnalyticField::quadratic(diag2(1, -1), CMat::Zero(2, 2));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 20; ++k) {
    Jet j = f->jet(pt(cplx(nd(rng), nd(rng)), cplx(nd(rng), nd(rng))));
    Eigen::SelfAdjointEigenSolver<CMat> es(j.herm);
    EXPECT_LT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Robustness, SquaredNormOnBallRing) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), CMat::Zero(2, 2));
  f->set_ring(ball_ring(1, 2));
  SampleOptions opt;
  opt.interior = 100;
  opt.stride = 8;
  RobustnessResult r = robustness_probe(*f, MetricForm::identity(2), 0.5, 10, opt);
  EXPECT_GT(r.eps, 0.0);
  EXPECT_LE(r.eps, r.min_gradient + 1e-9);
}

TEST(Robustness, NearlyDegenerateKappa) {
  auto f = AnalyticField::quadratic(CMat::Identity(2, 2), diag2(0.99, 0));
  f->set_ring(ball_ring(1, 2));
  SampleOptions opt;
  opt.interior = 100;
  opt.stride = 8;
  RobustnessResult r = robustness_probe(*f, MetricForm::identity(2), 0.5, 10, opt);
  EXPECT_LT(r.eps, 0.05);
}

TEST(RadialField, ProfileJetMatchesAnalyticLog) {
  const int N = 401;
  std::vector<double> v(N);
  for (int k = 0; k < N; ++k) v[k] = double(k) / (N - 1);
  RadialField rf(2, 1.0, std::exp(1.0), v);
  auto an = AnalyticField::radial_log(2, 1.0, std::exp(1.0));
  for (double rho : {1.0, 1.3, 1.6487212707, 2.5}) {
    Point z = pt(cplx(0.6 * rho, 0), cplx(0, 0.8 * rho));
    Jet a = rf.jet(z), b = an->jet(z);
    EXPECT_NEAR(a.value, b.value, 1e-12);
    EXPECT_NEAR((a.grad - b.grad).norm(), 0, 1e-10);
    EXPECT_NEAR((a.herm - b.herm).norm(), 0, 1e-8);
    EXPECT_NEAR((a.hol - b.hol).norm(), 0, 1e-8);
  }
}

TEST(ReinhardtField, JetMatchesAnalytic) {
  // Phi = |z1|^2 + 2|z2|^2 + 0.3 |z1|^2 |z2|^2 on a grid between two ellipsoids.
  auto u = [](double x, double y) { return x + 2 * y + 0.3 * x * y; };
  auto cb = [](const RVec& r) {
    double x = r[0] * r[0] + r[1] * r[1], y = r[2] * r[2] + r[3] * r[3];
    RealJet j;
    j.value = x + 2 * y + 0.3 * x * y;
    double ux = 1 + 0.3 * y, uy = 2 + 0.3 * x;
    RVec gx(4), gy(4);
    gx << 2 * r[0], 2 * r[1], 0, 0;
    gy << 0, 0, 2 * r[2], 2 * r[3];
    j.grad = ux * gx + uy * gy;
    RMat hx = RMat::Zero(4, 4), hy = RMat::Zero(4, 4);
    hx(0, 0) = hx(1, 1) = 2;
    hy(2, 2) = hy(3, 3) = 2;
    j.hess = ux * hx + uy * hy + 0.3 * (gx * gy.transpose() + gy * gx.transpose());
    return j;
  };
  auto an = AnalyticField::from_real(2, cb, "poly");
  // Stencils are exact for this field (degree <= 2 in each grid variable).
  ReinhardtGrid g(1.0, 0.25, 4.0, 1.0, 33, 33);
  std::vector<double> U(g.size());
  for (int i = 0; i < 33; ++i)
    for (int j = 0; j < 33; ++j) {
      auto p = g.xy(i, j);
      U[g.index(i, j)] = u(p[0], p[1]);
    }
  ReinhardtField rf(g, U);
  for (int i = 0; i < 33; i += 4)
    for (int j = 0; j < 33; j += 4) {
      Point z = rf.node_point(i, j);
      Jet a = rf.jet(z), b = an->jet(z);
      EXPECT_NEAR((a.herm - b.herm).norm() + (a.hol - b.hol).norm() + (a.grad - b.grad).norm(), 0, 1e-9);
    }
}

TEST(ReinhardtField, SecondOrderConvergence) {
  auto u = [](double x, double y) { return std::log(1 + x + 2 * y); };
  std::vector<double> errs;
  for (int N : {33, 65, 129}) {
    ReinhardtGrid g(1.0, 0.25, 4.0, 1.0, N, N);
    std::vector<double> U(g.size());
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        auto p = g.xy(i, j);
        U[g.index(i, j)] = u(p[0], p[1]);
      }
    double err = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        auto p = g.xy(i, j);
        double s = 1 + p[0] + 2 * p[1];
        auto d = g.derivs(U, i, j);
        double ex[5] = {1 / s, 2 / s, -1 / (s * s), -2 / (s * s), -4 / (s * s)};
        for (int m = 0; m < 5; ++m) err = std::max(err, std::abs(d[m + 1] - ex[m]));
      }
    errs.push_back(err);
  }
  EXPECT_GE(std::log2(errs[0] / errs[1]), 1.8);
  EXPECT_GE(std::log2(errs[1] / errs[2]), 1.8);
}

TEST(FullGrid, SecondOrderConvergence) {
  RingDomain ring = ball_ring(0.5, 1.5, 400);
  auto phi = [](const RVec& x) { return std::exp(0.5 * x[0]) * std::cos(0.3 * x[1]) + x[2] * x[3] * x[0]; };
  auto exact = [](const RVec& x) {
    RealJet j;
    double e = std::exp(0.5 * x[0]), c = std::cos(0.3 * x[1]), s = std::sin(0.3 * x[1]);
    j.grad = RVec::Zero(4);
    j.grad << 0.5 * e * c + x[2] * x[3], -0.3 * e * s, x[3] * x[0], x[2] * x[0];
    j.hess = RMat::Zero(4, 4);
    j.hess(0, 0) = 0.25 * e * c;
    j.hess(0, 1) = j.hess(1, 0) = -0.15 * e * s;
    j.hess(1, 1) = -0.09 * e * c;
    j.hess(0, 2) = j.hess(2, 0) = x[3];
    j.hess(0, 3) = j.hess(3, 0) = x[2];
    j.hess(2, 3) = j.hess(3, 2) = x[0];
    return j;
  };
  std::vector<double> errs, hs;
  for (int N : {9, 17}) {
    FullGrid g(ring, N);
    std::vector<double> U(g.size());
    for (int i = 0; i < g.size(); ++i) U[i] = phi(g.point(i));
    double err = 0;
    for (int idx : g.interior_nodes()) {
      bool clean = true;
      for (int d = 0; d < FullGrid::kDirs && clean; ++d)
        clean = g.arm(idx, d, 1).node >= 0 && g.arm(idx, d, -1).node >= 0;
      if (!clean) continue;
      RVec x = g.point(idx);
      if (x.norm() > 1.1) continue;
      RealJet a = g.real_jet(U, idx), b = exact(x);
      err = std::max(err, (a.hess - b.hess).cwiseAbs().maxCoeff() + (a.grad - b.grad).cwiseAbs().maxCoeff());
    }
    errs.push_back(err);
    hs.push_back(g.h());
  }
  double order = std::log(errs[0] / errs[1]) / std::log(hs[0] / hs[1]);
  EXPECT_GE(order, 1.8);
}
