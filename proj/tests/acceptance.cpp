// Acceptance run: one PASS/FAIL line per criterion.
// Exit status is 0 when every outcome matches the expectation table below.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cmlab/foliation.hpp"
#include "cmlab/solver.hpp"
#include "cmlab/verify.hpp"

using namespace cmlab;

namespace {

const double kE = std::exp(1.0);

// Criteria known to be unattainable as stated (see README).
const std::set<int> kExpectedFail = {1};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

CMat diag2(double a, double b) {
  CMat M = CMat::Zero(2, 2);
  M(0, 0) = a;
  M(1, 1) = b;
  return M;
}

Point pt(cplx a, cplx b) {
  Point z(2);
  z << a, b;
  return z;
}

RingDomain ball_ring() {
  return RingDomain(SmoothDomain::ball(Point::Zero(2), 1.0), SmoothDomain::ball(Point::Zero(2), kE), 400);
}

// Aspect-2 ellipsoids |z1|^2 + 4|z2|^2 < 1 inside |z1|^2/4 + |z2|^2 < 1.
RingDomain ellipsoid_ring() {
  CMat H0 = diag2(1, 4);
  return RingDomain(SmoothDomain::ellipsoid(H0, Point::Zero(2)), SmoothDomain::ellipsoid(H0 / 4.0, Point::Zero(2)),
                    400);
}

SolveConfig config(double eps, int resolution) {
  SolveConfig c;
  c.eps = eps;
  c.resolution = resolution;
  return c;
}

double log_profile(const Point& z) { return std::log(z.norm()); }  // r = 1, R = e

struct Benchmark {
  std::string name;
  RingDomain ring;
  SolveReport rep;
};

// Solved once, shared by criteria 5-7, 9 and 10.
struct Benchmarks {
  std::vector<Benchmark> all;
  const Benchmark& get(const std::string& name) const {
    for (const auto& b : all)
      if (b.name == name) return b;
    throw Error(Status::invalid_argument, "no benchmark " + name);
  }
};

Benchmarks solve_benchmarks(double& elapsed_ellipsoid) {
  Benchmarks b;
  const MetricForm I = MetricForm::identity(2);
  b.all.push_back({"radial eps=0.05", ball_ring(), solve_radial(2, 1.0, kE, config(0.05, 400))});
  b.all.push_back({"radial eps=0.025", ball_ring(), solve_radial(2, 1.0, kE, config(0.025, 400))});
  b.all.push_back({"reinhardt ball 65", ball_ring(), solve_reinhardt(ball_ring(), I, config(0.05, 65))});
  auto t0 = std::chrono::steady_clock::now();
  b.all.push_back({"reinhardt ellipsoid 129", ellipsoid_ring(), solve_reinhardt(ellipsoid_ring(), I, config(0.1, 129))});
  b.all.push_back({"reinhardt ellipsoid 257", ellipsoid_ring(), solve_reinhardt(ellipsoid_ring(), I, config(0.1, 257))});
  elapsed_ellipsoid = seconds_since(t0);
  b.all.push_back({"full ball 16", ball_ring(), solve_full(ball_ring(), I, config(0.05, 16))});
  b.all.push_back({"full ellipsoid 16", ellipsoid_ring(), solve_full(ellipsoid_ring(), I, config(0.1, 16))});
  for (const auto& x : b.all)
    if (!x.rep.converged) throw Error(Status::solver_failure, x.name + ": " + x.rep.message);
  return b;
}

// ---------------------------------------------------------------------------

Outcome radial_limit() {
  auto t0 = std::chrono::steady_clock::now();
  SolveConfig cfg = config(0.025, 400);
  cfg.eps_schedule = {0.2, 0.1, 0.05, 0.025};
  ContinuationResult c = continuation(ball_ring(), MetricForm::identity(2), cfg, Tier::radial);
  std::vector<double> devs;
  for (const auto& st : c.stages) {
    double d = 0.0;
    for (auto& [z, v] : st.field->node_values()) d = std::max(d, std::abs(v - log_profile(z)));
    devs.push_back(d);
  }
  bool decreasing = c.ok && devs.size() == 4;
  for (std::size_t k = 1; decreasing && k < devs.size(); ++k) decreasing = devs[k] < devs[k - 1];
  const double t = seconds_since(t0);
  Outcome o;
  o.pass = decreasing && devs.back() <= 0.02 && t < 10.0;
  if (!c.ok) {
    // The schedule cannot run; report the reachable part for the record.
    SolveReport last = solve_radial(2, 1.0, kE, config(0.025, 400));
    double d = 0.0;
    for (auto& [z, v] : last.field->node_values()) d = std::max(d, std::abs(v - log_profile(z)));
    o.detail = fmt("schedule stops (%s); eps limit %.6g; sup dev at eps=0.025 alone %.4f vs 0.02", c.failure.c_str(),
                   radial_eps_limit(2, 1.0, kE), d);
  } else {
    o.detail = fmt("sup dev %.4f at eps=0.025, decreasing=%d, %.2fs", devs.back(), decreasing, t);
  }
  return o;
}

Outcome lemma_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  SuiteResult r = run_lemma_suite("modulus_degree_equivalence", 200, 2024);
  const double t = seconds_since(t0);
  return {r.failures == 0 && r.trials == 200 && t < 60.0,
          fmt("%d/%d gauges within 1e-3 + 5%%, worst slack %.3g, %.1fs", r.trials - r.failures, r.trials,
              r.worst_margin, t)};
}

Outcome takagi_check() {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  double worst_rec = 0.0, worst_d = 0.0;
  int bad = 0;
  for (int k = 0; k < 500; ++k) {
    const int m = 1 + k % 6;
    CMat X(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) X(i, j) = cplx(g(rng), g(rng));
    CMat B = X + X.transpose().eval();
    if (k % 5 == 0 && m > 1) {
      CMat Y(m, m - 1);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m - 1; ++j) Y(i, j) = cplx(g(rng), g(rng));
      B = Y * Y.transpose();
    }
    Takagi t = takagi(B);
    const double rec = (B - t.U * t.D.cast<cplx>().asDiagonal() * t.U.transpose()).norm();
    Eigen::JacobiSVD<CMat> svd(B);
    const double d = (t.D - svd.singularValues()).cwiseAbs().maxCoeff();
    worst_rec = std::max(worst_rec, rec / (1 + B.norm()));
    worst_d = std::max(worst_d, d);
    bad += rec > 1e-9 * (1 + B.norm()) || d > 1e-9;
  }
  return {bad == 0, fmt("500 matrices, worst relative reconstruction %.2e, worst singular value gap %.2e", worst_rec,
                        worst_d)};
}

Outcome gauge_truths() {
  const MetricForm I = MetricForm::identity(2);
  TangentGauge lg = tangent_gauge(AnalyticField::log_hermitian(CMat::Identity(2, 2), 0.5)->jet(pt(0, 1)), I, 0.1);
  TangentGauge qg = tangent_gauge(AnalyticField::quadratic(CMat::Identity(2, 2), diag2(0.5, 0))->jet(pt(0, 1)), I, 0.1);
  const double e1 = std::max({std::abs(lg.A(0, 0) - 0.5), std::abs(lg.B(0, 0)), std::abs(lg.sigma() - 1.0)});
  const double e2 = std::max(std::abs(qg.kappa ? qg.kappa->max_eig() - 0.25 : 1.0), std::abs(qg.sigma() - 4.0 / 3.0));
  return {e1 <= 1e-8 && e2 <= 1e-8, fmt("log|z|: worst error %.1e; quadratic: worst error %.1e", e1, e2)};
}

Outcome max_principles(const Benchmarks& b, double solve_time) {
  auto t0 = std::chrono::steady_clock::now();
  const MetricForm I = MetricForm::identity(2);
  std::vector<CheckReport> sig, grad;
  for (const char* name : {"reinhardt ellipsoid 129", "reinhardt ellipsoid 257"}) {
    const auto& f = *b.get(name).rep.field;
    sig.push_back(check_sigma_max_principle(f, I, 0.1));
    grad.push_back(check_gradient_floor(f, I, 0.1));
  }
  const double t = solve_time + seconds_since(t0);
  bool pass = t < 300.0;
  for (const auto& r : sig) pass = pass && r.pass && r.margin > 0;
  for (const auto& r : grad) pass = pass && r.pass && r.margin > 0;
  // Slack is the discretization tolerance each check is allowed.
  const double rs = sig[1].tolerance / sig[0].tolerance, rg = grad[1].tolerance / grad[0].tolerance;
  pass = pass && rs <= 0.75 && rg <= 0.75;
  return {pass, fmt("sigma margin %.4g -> %.4g, slack x%.2f; gradient margin %.4g -> %.4g, slack x%.2f; %.1fs",
                    sig[0].margin, sig[1].margin, rs, grad[0].margin, grad[1].margin, rg, t)};
}

Outcome rank_estimates(const Benchmarks& b) {
  bool pass = true;
  double worst = INFINITY, worst_exp = INFINITY;
  std::string where;
  for (const auto& x : b.all) {
    CheckReport r = check_rank_estimates(*x.rep.field, x.rep.field->metric(), x.rep.eps);
    double exp_eig = INFINITY;
    for (const auto& [k, v] : r.parts)
      if (k == "exp_min_eig") exp_eig = v;
    if (!r.pass && pass) where = x.name;
    pass = pass && r.pass;
    if (r.margin + r.tolerance < worst) worst = r.margin + r.tolerance;
    worst_exp = std::min(worst_exp, exp_eig);
  }
  return {pass, fmt("%zu benchmarks, worst margin+tol %.3g, worst exp min-eig %.3g%s", b.all.size(), worst, worst_exp,
                    where.empty() ? "" : (", fails on " + where).c_str())};
}

Outcome level_sets(const Benchmarks& b) {
  std::vector<double> levels;
  for (int k = 1; k <= 9; ++k) levels.push_back(0.1 * k);
  bool pass = true;
  double worst = INFINITY;
  std::string where;
  for (const auto& x : b.all) {
    CheckReport r = check_level_sets(*x.rep.field, x.rep.field->metric(), levels);
    if (!(r.pass && r.margin > 0) && pass) where = x.name;
    pass = pass && r.pass && r.margin > 0;
    worst = std::min(worst, r.margin);
  }
  return {pass, fmt("%zu benchmarks x 9 levels, smallest modulus %.4g%s", b.all.size(), worst,
                    where.empty() ? "" : (", fails on " + where).c_str())};
}

Outcome foliation() {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(1.2, 2.2);
  std::vector<Point> base;
  for (int k = 0; k < 50; ++k) {
    Point z = pt(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
    base.push_back(z / z.norm() * u(rng));
  }
  const MetricForm I = MetricForm::identity(2);
  bool pass = true;
  double harm = 0.0, cr = 0.0, logS = -INFINITY, invQ = INFINITY;
  for (auto field : {AnalyticField::log_hermitian(CMat::Identity(2, 2), 0.5),
                     AnalyticField::log_hermitian(diag2(1, 4), 1.0)}) {
    std::vector<Leaf> leaves;
    for (const Point& p : base) {
      leaves.push_back(leaf_trace(*field, p, 0.3, 4, {4}));
      harm = std::max(harm, leaf_harmonicity_residual(*field, leaves.back()));
      cr = std::max(cr, leaf_cauchy_riemann_residual(*field, leaves.back()));
    }
    LeafwiseReport ls = leafwise_mp_check(*field, leaves, LeafQuantity::logS, I);
    LeafwiseReport iq = leafwise_mp_check(*field, leaves, LeafQuantity::invQ, I);
    logS = std::max(logS, ls.worst);
    invQ = std::min(invQ, iq.worst);
    pass = pass && ls.checked > 0 && iq.checked > 0;
  }
  pass = pass && harm <= 1e-8 && cr <= 1e-8 && logS <= 1e-6 && invQ >= -1e-6;
  return {pass, fmt("2 fields x 50 leaves: harmonicity %.1e, Cauchy-Riemann %.1e, max (log S)_zz %.1e, "
                    "min (1/(1-Q))_zz %.1e",
                    harm, cr, logS, invQ)};
}

Outcome sandwich(const Benchmarks& b) {
  bool pass = true;
  double below = INFINITY, above = INFINITY;
  for (const auto& x : b.all) {
    const auto& f = *x.rep.field;
    auto nodes = f.node_values();
    std::vector<double> U = harmonic_majorant(f);
    Subsolution psi(x.ring, f.metric(), {});
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      const double v = nodes[k].second;
      below = std::min(below, v - psi.eval(to_real(nodes[k].first)).value);
      above = std::min(above, U[k] - v);
    }
  }
  pass = below >= -1e-6 && above >= -1e-6;
  return {pass, fmt("%zu benchmarks: min(Phi - Psi) %.3g, min(U - Phi) %.3g", b.all.size(), below, above)};
}

double sup_gap(const ScalarField& a, const ScalarField& ref) {
  double w = 0.0;
  for (auto& [z, v] : a.node_values()) w = std::max(w, std::abs(v - ref.value(z)));
  return w;
}

Outcome cross_solver(const Benchmarks& b) {
  SolveReport fine = solve_radial(2, 1.0, kE, config(0.05, 4001));
  const double rr = sup_gap(*b.get("reinhardt ball 65").rep.field, *fine.field);
  const double rf_ball = sup_gap(*b.get("full ball 16").rep.field, *b.get("reinhardt ball 65").rep.field);
  const double rf_ell = sup_gap(*b.get("full ellipsoid 16").rep.field, *b.get("reinhardt ellipsoid 129").rep.field);
  return {rr <= 1e-4 && rf_ball <= 0.02 && rf_ell <= 0.02,
          fmt("radial vs reinhardt %.2e; reinhardt vs full: ball %.2e, ellipsoid %.2e", rr, rf_ball, rf_ell)};
}

}  // namespace

int main() {
  struct Row {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  double ellipsoid_time = 0.0;
  Benchmarks bench;
  std::string bench_error;
  try {
    bench = solve_benchmarks(ellipsoid_time);
  } catch (const std::exception& e) {
    bench_error = e.what();
  }
  auto needs = [&](std::function<Outcome()> f) {
    return [f, &bench_error]() -> Outcome {
      if (!bench_error.empty()) return {false, "benchmarks did not solve: " + bench_error};
      return f();
    };
  };
  std::vector<Row> rows = {
      {1, "radial limit reproduction", radial_limit},
      {2, "modulus/degree equivalence", lemma_equivalence},
      {3, "Takagi factorization", takagi_check},
      {4, "gauge ground truths", gauge_truths},
      {5, "maximum principles on solved fields", needs([&] { return max_principles(bench, ellipsoid_time); })},
      {6, "rank estimates", needs([&] { return rank_estimates(bench); })},
      {7, "level-set strong C-convexity", needs([&] { return level_sets(bench); })},
      {8, "foliation of exact solutions", foliation},
      {9, "ordering sandwich", needs([&] { return sandwich(bench); })},
      {10, "cross-solver agreement", needs([&] { return cross_solver(bench); })},
  };
  int unexpected = 0, passed = 0;
  for (const auto& row : rows) {
    Outcome o;
    try {
      o = row.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool expect_fail = kExpectedFail.count(row.id) > 0;
    passed += o.pass;
    if (o.pass == expect_fail) ++unexpected;
    std::printf("%s %2d %-38s %s%s\n", o.pass ? "PASS" : "FAIL", row.id, row.name, o.detail.c_str(),
                expect_fail ? (o.pass ? " [expected FAIL, now passes]" : " [expected]") : "");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria pass; %d outcome(s) differ from expectation\n", passed, rows.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
