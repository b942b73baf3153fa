#include <gtest/gtest.h>

#include <cmath>

#include "cmlab/solver.hpp"

using namespace cmlab;

namespace {

const double kE = std::exp(1.0);

RingDomain ball_ring(double r = 1.0, double R = kE) {
  return RingDomain(SmoothDomain::ball(Point::Zero(2), r), SmoothDomain::ball(Point::Zero(2), R), 400);
}

RingDomain ellipsoid_ring() {
  CMat H0 = CMat::Zero(2, 2);
  H0(0, 0) = 1.0;
  H0(1, 1) = 4.0;
  return RingDomain(SmoothDomain::ellipsoid(H0, Point::Zero(2)), SmoothDomain::ellipsoid(H0 / 4.0, Point::Zero(2)), 400);
}

SolveConfig config(double eps, int resolution) {
  SolveConfig cfg;
  cfg.eps = eps;
  cfg.resolution = resolution;
  return cfg;
}

// Independent shooting oracle for the radial profile: f(log r) = 0, f(log R) = 1,
// f'' = 4 / (e^{-2s}/eps - 2(n-1)/f').
double shoot(int n, double r, double R, double eps, double slope, int steps, std::vector<double>* path) {
  const double s0 = std::log(r), h = (std::log(R) - s0) / steps;
  auto rhs = [&](double s, double p) {
    double den = std::exp(-2 * s) / eps - 2.0 * (n - 1) / p;
    return den > 0 ? 4.0 / den : std::numeric_limits<double>::infinity();
  };
  double f = 0.0, p = slope;
  if (path) path->assign(1, 0.0);
  for (int k = 0; k < steps; ++k) {
    double s = s0 + k * h;
    double k1 = rhs(s, p), k2 = rhs(s + h / 2, p + h / 2 * k1), k3 = rhs(s + h / 2, p + h / 2 * k2),
           k4 = rhs(s + h, p + h * k3);
    double l1 = p, l2 = p + h / 2 * k1, l3 = p + h / 2 * k2, l4 = p + h * k3;
    p += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    f += h / 6 * (l1 + 2 * l2 + 2 * l3 + l4);
    if (!std::isfinite(p)) return std::numeric_limits<double>::infinity();
    if (path) path->push_back(f);
  }
  return f;
}

std::vector<double> shooting_profile(int n, double r, double R, double eps, int steps) {
  double lo = 1e-6, hi = 1.0;
  while (shoot(n, r, R, eps, hi, steps, nullptr) < 1.0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (shoot(n, r, R, eps, mid, steps, nullptr) < 1.0 ? lo : hi) = mid;
  }
  std::vector<double> path;
  shoot(n, r, R, eps, 0.5 * (lo + hi), steps, &path);
  return path;
}

double log_profile(const Point& z, double r, double R) {
  return (std::log(z.norm()) - std::log(r)) / (std::log(R) - std::log(r));
}

}  // namespace

TEST(SolveConfig, Validation) {
  SolveConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.eps = -1;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SolveConfig{};
  cfg.eps_schedule = {0.05, 0.1};
  EXPECT_THROW(cfg.validate(), Error);
  cfg.eps_schedule = {0.2, 0.05};
  EXPECT_THROW(cfg.validate(), Error);  // last entry must equal eps
  cfg.eps = 0.05;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.schedule().size(), 2u);
}

TEST(Radial, FeasibilityLimitMatchesShooting) {
  // Reference value from an adaptive ODE integration of the scaled slope equation.
  EXPECT_NEAR(radial_eps_limit(2, 1.0, kE), 0.0814648, 2e-6);
  EXPECT_THROW(solve_radial(2, 1.0, kE, config(0.1, 400)), Error);
}

TEST(Radial, QuadraticProfileIsExact) {
  const int n = 2;
  const double r = 1.0, R = 2.0, eps = 1.0 / (n * (R * R - r * r));
  // The continuous profile solves the equation exactly.
  Jet j;
  j.herm = CMat::Identity(n, n) / (R * R - r * r);
  EXPECT_NEAR(quotient_residual(j, MetricForm::identity(n), eps), 0.0, 1e-12);
  // The grid in log|z| does not represent |z|^2 exactly: second-order agreement only.
  SolveReport rep = solve_radial(n, r, R, config(eps, 200));
  ASSERT_TRUE(rep.converged) << rep.message;
  for (auto& [z, v] : rep.field->node_values())
    EXPECT_NEAR(v, (z.squaredNorm() - r * r) / (R * R - r * r), 1e-5);
  EXPECT_LE(rep.residual_inf, 1e-6);
}

TEST(Radial, MatchesShootingOracle) {
  const double eps = 0.05;
  SolveReport rep = solve_radial(2, 1.0, kE, config(eps, 401));
  ASSERT_TRUE(rep.converged) << rep.message;
  std::vector<double> oracle = shooting_profile(2, 1.0, kE, eps, 4000);
  const auto& f = static_cast<const RadialField&>(*rep.field).values();
  double worst = 0.0;
  for (int k = 0; k < 401; ++k) worst = std::max(worst, std::abs(f[k] - oracle[10 * k]));
  EXPECT_LE(worst, 1e-4);
}

TEST(Radial, CoarseMatchesFineGrid) {
  SolveReport coarse = solve_radial(2, 1.0, kE, config(0.05, 400));
  SolveReport fine = solve_radial(2, 1.0, kE, config(0.05, 1597));
  ASSERT_TRUE(coarse.converged && fine.converged);
  double worst = 0.0;
  for (auto& [z, v] : coarse.field->node_values()) worst = std::max(worst, std::abs(v - fine.field->value(z)));
  EXPECT_LE(worst, 1e-4);
}

TEST(Radial, AuditAndSandwich) {
  RingDomain ring = ball_ring();
  SolveReport rep = solve_radial(2, 1.0, kE, config(0.05, 400));
  AuditResult a = audit_residual(rep);
  EXPECT_GT(a.nodes, 50);
  EXPECT_LE(a.max_disagreement, 1e-8);
  EXPECT_LE(rep.residual_inf, 1e-6);
  EXPECT_GT(rep.psd_margin, 0.0);

  auto nodes = rep.field->node_values();
  std::vector<double> U = harmonic_majorant(*rep.field);
  ASSERT_EQ(U.size(), nodes.size());
  Subsolution psi(ring, MetricForm::identity(2), {});
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    EXPECT_LE(nodes[k].second, U[k] + 1e-6);
    EXPECT_GE(nodes[k].second, psi.eval(to_real(nodes[k].first)).value - 1e-6);
  }
}

TEST(Radial, MajorantMatchesNewtonianPotential) {
  SolveReport rep = solve_radial(2, 1.0, kE, config(0.05, 400));
  auto nodes = rep.field->node_values();
  std::vector<double> U = harmonic_majorant(*rep.field);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double x = nodes[k].first.squaredNorm();
    EXPECT_NEAR(U[k], (1.0 - 1.0 / x) / (1.0 - std::exp(-2.0)), 1e-4);
  }
}

TEST(Reinhardt, BallRingMatchesRadial) {
  RingDomain ring = ball_ring();
  SolveReport rep = solve_reinhardt(ring, MetricForm::identity(2), config(0.05, 65));
  ASSERT_TRUE(rep.converged) << rep.message;
  SolveReport rad = solve_radial(2, 1.0, kE, config(0.05, 4001));
  double worst = 0.0;
  for (auto& [z, v] : rep.field->node_values()) worst = std::max(worst, std::abs(v - rad.field->value(z)));
  EXPECT_LE(worst, 1e-4);
}

TEST(Reinhardt, EllipsoidBenchmark) {
  RingDomain ring = ellipsoid_ring();
  SolveReport rep = solve_reinhardt(ring, MetricForm::identity(2), config(0.1, 65));
  ASSERT_TRUE(rep.converged) << rep.message;
  EXPECT_LE(rep.residual_inf, 1e-6);
  EXPECT_GT(rep.psd_margin, 0.0);
  AuditResult a = audit_residual(rep);
  EXPECT_LE(a.max_disagreement, 1e-8);
  EXPECT_LE(a.max_residual, 1e-6);

  double b0 = 0.0, b1 = 0.0;
  for (const auto& s : ring.samples0()) b0 = std::max(b0, std::abs(rep.field->value(from_real(s.x))));
  for (const auto& s : ring.samples1()) b1 = std::max(b1, std::abs(rep.field->value(from_real(s.x)) - 1.0));
  EXPECT_LE(b0, 1e-8);
  EXPECT_LE(b1, 1e-8);

  auto nodes = rep.field->node_values();
  std::vector<double> U = harmonic_majorant(*rep.field);
  Subsolution psi(ring, MetricForm::identity(2), {});
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    EXPECT_LE(nodes[k].second, U[k] + 1e-6);
    EXPECT_GE(nodes[k].second, psi.eval(to_real(nodes[k].first)).value - 1e-6);
  }
}

TEST(Reinhardt, RejectsNonReinhardtRing) {
  RingDomain ring(SmoothDomain::ball(Point::Zero(2), 1.0), SmoothDomain::ball(Point::Constant(2, 0.1), 3.0), 200);
  EXPECT_THROW(solve_reinhardt(ring, MetricForm::identity(2), config(0.05, 33)), Error);
}

TEST(Full, BallRingMatchesRadialAndStarts) {
  RingDomain ring = ball_ring();
  SolveConfig cfg = config(0.05, 16);
  SolveReport harm = solve_full(ring, MetricForm::identity(2), cfg);
  FullOptions sub;
  sub.start = InitialGuess::subsolution;
  SolveReport low = solve_full(ring, MetricForm::identity(2), cfg, sub);
  ASSERT_TRUE(harm.converged) << harm.message;
  ASSERT_TRUE(low.converged) << low.message;
  EXPECT_GT(harm.psd_margin, 0.0);
  EXPECT_LE(harm.residual_inf * cfg.eps, 1e-3);

  SolveReport rad = solve_radial(2, 1.0, kE, config(0.05, 4001));
  auto hn = harm.field->node_values(), ln = low.field->node_values();
  double worst = 0.0, spread = 0.0;
  for (std::size_t k = 0; k < hn.size(); ++k) {
    worst = std::max(worst, std::abs(hn[k].second - rad.field->value(hn[k].first)));
    spread = std::max(spread, std::abs(hn[k].second - ln[k].second));
  }
  EXPECT_LE(worst, 0.02);
  EXPECT_LE(spread, 1e-5);
  // Sweep counts of the two starts, for the record.
  RecordProperty("harmonic_sweeps", harm.iterations);
  RecordProperty("subsolution_sweeps", low.iterations);

  AuditResult a = audit_residual(harm);
  EXPECT_LE(a.max_disagreement, 1e-8);

  std::vector<double> U = harmonic_majorant(*harm.field);
  Subsolution psi(ring, MetricForm::identity(2), {});
  for (std::size_t k = 0; k < hn.size(); ++k) {
    EXPECT_LE(hn[k].second, U[k] + 1e-6);
    EXPECT_GE(hn[k].second, psi.eval(to_real(hn[k].first)).value - 1e-6);
  }
}

TEST(Full, EllipsoidRingMatchesReinhardt) {
  RingDomain ring = ellipsoid_ring();
  SolveReport rein = solve_reinhardt(ring, MetricForm::identity(2), config(0.1, 129));
  SolveReport full = solve_full(ring, MetricForm::identity(2), config(0.1, 16));
  ASSERT_TRUE(full.converged) << full.message;
  double worst = 0.0;
  for (auto& [z, v] : full.field->node_values()) worst = std::max(worst, std::abs(v - rein.field->value(z)));
  EXPECT_LE(worst, 0.02);
}

TEST(Full, MemoryGuard) {
  EXPECT_THROW(solve_full(ball_ring(), MetricForm::identity(2), config(0.05, 25)), Error);
}

TEST(Continuation, RadialTrend) {
  SolveConfig cfg = config(0.01, 400);
  cfg.eps_schedule = {0.08, 0.05, 0.025, 0.01};
  ContinuationResult c = continuation(ball_ring(), MetricForm::identity(2), cfg);
  ASSERT_TRUE(c.ok) << c.failure;
  ASSERT_EQ(c.stages.size(), 4u);
  double prev_dev = std::numeric_limits<double>::infinity(), prev_inc = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < c.stages.size(); ++k) {
    const auto& st = c.stages[k];
    double dev = 0.0;
    for (auto& [z, v] : st.field->node_values()) dev = std::max(dev, std::abs(v - log_profile(z, 1.0, kE)));
    EXPECT_LT(dev, prev_dev);
    prev_dev = dev;
    EXPECT_GT(st.psd_margin, 0.0);
    if (k > 0) {
      double inc = st.eps_trace.front().increment;
      EXPECT_LT(inc, prev_inc);
      prev_inc = inc;
    }
  }
}

TEST(Continuation, InfeasibleStageIsReported) {
  SolveConfig cfg = config(0.025, 400);
  cfg.eps_schedule = {0.2, 0.1, 0.05, 0.025};
  ContinuationResult c = continuation(ball_ring(), MetricForm::identity(2), cfg);
  EXPECT_FALSE(c.ok);
  EXPECT_TRUE(c.stages.empty());
  EXPECT_NE(c.failure.find("eps=0.2"), std::string::npos);
}

TEST(Tier, Selection) {
  EXPECT_EQ(select_tier(ball_ring(), MetricForm::identity(2)), Tier::radial);
  EXPECT_EQ(select_tier(ellipsoid_ring(), MetricForm::identity(2)), Tier::reinhardt);
}
