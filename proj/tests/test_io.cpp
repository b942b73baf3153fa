#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "cmlab/io.hpp"

using namespace cmlab;

namespace {

CMat diag2(double a, double b) {
  CMat M = CMat::Zero(2, 2);
  M(0, 0) = a;
  M(1, 1) = b;
  return M;
}

RingDomain ellipsoid_ring(int samples = 400) {
  CMat H0 = diag2(1, 4);
  return RingDomain(SmoothDomain::ellipsoid(H0, Point::Zero(2)), SmoothDomain::ellipsoid(H0 / 4.0, Point::Zero(2)),
                    samples);
}

// Largest gauge difference over ring points between two fields.
double gauge_gap(const ScalarField& a, const ScalarField& b, const RingDomain& ring, double eps) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3, 3);
  double gap = 0.0;
  int hits = 0;
  while (hits < 40) {
    RVec x(4);
    for (int k = 0; k < 4; ++k) x(k) = u(rng);
    if (!ring.interior(x)) continue;
    ++hits;
    Point z = from_real(x);
    Jet ja = a.jet(z), jb = b.jet(z);
    gap = std::max({gap, std::abs(ja.value - jb.value), (ja.grad - jb.grad).norm(), (ja.herm - jb.herm).norm(),
                    (ja.hol - jb.hol).norm()});
    TangentGauge ga = tangent_gauge(ja, a.metric(), eps), gb = tangent_gauge(jb, b.metric(), eps);
    gap = std::max({gap, (ga.A - gb.A).norm(), (ga.B - gb.B).norm(), std::abs(ga.W - gb.W), std::abs(ga.V - gb.V)});
    if (ga.S && gb.S) gap = std::max(gap, std::abs(*ga.S - *gb.S));
  }
  return gap;
}

}  // namespace

TEST(RingJson, RoundTrip) {
  for (const RingDomain& ring :
       {ellipsoid_ring(), RingDomain(SmoothDomain::ball(Point::Zero(2), 1.0), SmoothDomain::dumbbell(1.0, 2.0), 300)}) {
    RingDomain back = ring_from_json(ring_to_json(ring));
    EXPECT_EQ(back.n(), ring.n());
    EXPECT_EQ(back.sample_count(), ring.sample_count());
    EXPECT_EQ(back.thickness(), ring.thickness());
    EXPECT_EQ(ring_to_json(back), ring_to_json(ring));
  }
}

TEST(RingJson, DocumentedShape) {
  RingDomain r = ring_from_json(R"({"n": 2, "omega0": {"kind": "ball", "params": {"radius": 1}},
                                    "omega1": {"kind": "ellipsoid", "params": {"H": [[0.1, 0], [0, 0.2]]}}})");
  EXPECT_EQ(r.sample_count(), 2000);
  EXPECT_TRUE(r.is_reinhardt() || !r.is_centered_ball_ring());
}

TEST(RingJson, SchemaErrors) {
  auto status = [](const std::string& text) {
    try {
      ring_from_json(text);
    } catch (const Error& e) {
      return e.status();
    }
    return Status::ok;
  };
  EXPECT_EQ(status("{"), Status::format_error);
  EXPECT_EQ(status(R"({"n": 2, "omega0": {"kind": "ball", "params": {"radius": 1}}})"), Status::format_error);
  EXPECT_EQ(status(R"({"n": 2, "extra": 1, "omega0": {"kind": "ball", "params": {"radius": 1}},
                       "omega1": {"kind": "ball", "params": {"radius": 2}}})"),
            Status::format_error);
  EXPECT_EQ(status(R"({"n": 2, "omega0": {"kind": "torus", "params": {}},
                       "omega1": {"kind": "ball", "params": {"radius": 2}}})"),
            Status::format_error);
}

TEST(FieldJson, RadialRoundTrip) {
  SolveConfig cfg;
  cfg.eps = 0.05;
  cfg.resolution = 200;
  auto rep = solve_radial(2, 1.0, std::exp(1.0), cfg);
  std::string text = field_to_json(*rep.field);
  FieldPtr back = field_from_json(text);
  EXPECT_EQ(back->rep(), ScalarField::Rep::radial);
  EXPECT_EQ(back->eps(), 0.05);
  RingDomain ring(SmoothDomain::ball(Point::Zero(2), 1.0), SmoothDomain::ball(Point::Zero(2), std::exp(1.0)), 100);
  EXPECT_LE(gauge_gap(*rep.field, *back, ring, 0.05), 1e-12);
  EXPECT_EQ(field_to_json(*back), text);
}

TEST(FieldJson, ReinhardtRoundTrip) {
  SolveConfig cfg;
  cfg.eps = 0.1;
  cfg.resolution = 33;
  auto rep = solve_reinhardt(ellipsoid_ring(), MetricForm::identity(2), cfg);
  FieldPtr back = field_from_json(field_to_json(*rep.field));
  ASSERT_NE(back->ring(), nullptr);
  EXPECT_LE(gauge_gap(*rep.field, *back, ellipsoid_ring(), 0.1), 1e-12);
}

TEST(FieldJson, FullRoundTrip) {
  SolveConfig cfg;
  cfg.eps = 0.1;
  cfg.resolution = 9;
  RingDomain ring(SmoothDomain::ball(Point::Zero(2), 1.0), SmoothDomain::ball(Point::Zero(2), 2.0), 200);
  auto rep = solve_full(ring, MetricForm::identity(2), cfg);
  FieldPtr back = field_from_json(field_to_json(*rep.field));
  auto a = rep.field->node_values(), b = back->node_values();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].second, b[k].second);
  EXPECT_LE(gauge_gap(*rep.field, *back, ring, 0.1), 1e-12);
}

TEST(FieldJson, AnalyticRoundTripAndMetric) {
  CMat G(2, 2);
  G << 2.0, cplx(0.3, 0.4), cplx(0.3, -0.4), 1.0;
  CMat B = CMat::Zero(2, 2);
  B(0, 1) = B(1, 0) = cplx(0.1, 0.2);
  auto q = AnalyticField::quadratic(CMat::Identity(2, 2), B);
  q->set_metric(MetricForm::make(G));
  auto l = AnalyticField::log_hermitian(diag2(1, 4), 0.5, 0.25);
  for (FieldPtr f : {FieldPtr(q), FieldPtr(l)}) {
    FieldPtr back = field_from_json(field_to_json(*f));
    EXPECT_LE((back->metric().G - f->metric().G).norm(), 0.0);
    EXPECT_LE(gauge_gap(*f, *back, ellipsoid_ring(), 0.1), 1e-12);
  }
  auto cb = AnalyticField::from_real(2, [](const RVec&) { return RealJet(); }, "x");
  EXPECT_THROW(field_to_json(*cb), Error);
}

TEST(FieldJson, FileRoundTrip) {
  auto f = AnalyticField::log_hermitian(diag2(1, 4), 0.5);
  auto path = (std::filesystem::temp_directory_path() / "cmlab_io_test_field.json").string();
  write_field(*f, path);
  FieldPtr back = read_field(path);
  EXPECT_EQ(field_to_json(*back), field_to_json(*f));
  std::filesystem::remove(path);
  EXPECT_THROW(read_field(path), Error);
}

TEST(FieldJson, RejectsMalformed) {
  EXPECT_THROW(field_from_json(R"({"format": "other", "version": 1, "rep": "radial"})"), Error);
  EXPECT_THROW(field_from_json(R"({"format": "cmlab-field", "version": 1, "rep": "radial", "n": 2, "r": 1,
                                   "R": 2, "values": [0, 0.5, 1]})"),
               Error);
  EXPECT_THROW(field_from_json(R"({"format": "cmlab-field", "version": 1, "rep": "reinhardt",
                                   "grid": {"a0": 1, "b0": 0.25, "a1": 4, "b1": 1, "nt": 5, "nq": 5},
                                   "values": [1, 2]})"),
               Error);
}

TEST(ConfigJson, RoundTripAndValidation) {
  SolveConfig c;
  c.eps = 0.025;
  c.eps_schedule = {0.05, 0.025};
  c.resolution = 400;
  SolveConfig back = config_from_json(config_to_json(c));
  EXPECT_EQ(back.eps, c.eps);
  EXPECT_EQ(back.eps_schedule, c.eps_schedule);
  EXPECT_EQ(back.resolution, 400);
  EXPECT_THROW(config_from_json(R"({"eps": -1})"), Error);
  EXPECT_THROW(config_from_json(R"({"epsilon": 0.1})"), Error);
  EXPECT_THROW(config_from_json(R"({"resolution": 1.5})"), Error);
}

TEST(ExperimentJson, Parse) {
  ExperimentSpec s = experiment_from_json(R"({
    "domain": {"n": 2, "omega0": {"kind": "ball", "params": {"radius": 1}},
               "omega1": {"kind": "ball", "params": {"radius": 2.718281828459045}}},
    "solve": {"eps": 0.05, "resolution": 400},
    "checks": ["gradient_floor", "level_sets"],
    "output": "out", "seed": 3})");
  ASSERT_TRUE(s.ring.has_value());
  EXPECT_TRUE(s.ring->is_centered_ball_ring());
  EXPECT_EQ(s.solve.eps, 0.05);
  EXPECT_EQ(s.checks.size(), 2u);
  EXPECT_EQ(s.seed, 3u);
  EXPECT_THROW(experiment_from_json(R"({"domain": "missing.json"})", "/nonexistent"), Error);
  EXPECT_THROW(experiment_from_json(R"({"domain": {"n": 2, "omega0": {"kind": "ball", "params": {"radius": 1}},
                                       "omega1": {"kind": "ball", "params": {"radius": 2}}}, "checks": ["nope"]})"),
               Error);
}

TEST(ReportJson, ChecksAreDeterministic) {
  CheckReport r;
  r.id = "x";
  r.margin = std::numeric_limits<double>::quiet_NaN();
  r.parts = {{"b", 1.0}, {"a", 2.0}};
  r.witness = Point::Zero(2);
  std::string a = checks_to_json({r, r}), b = checks_to_json({r, r});
  EXPECT_EQ(a, b);
  EXPECT_NE(a.find("\"margin\": null"), std::string::npos);
}
