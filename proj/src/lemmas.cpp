#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "cmlab/calg.hpp"
#include "cmlab/domain.hpp"
#include "cmlab/field.hpp"

namespace cmlab {

namespace {

using Rng = std::mt19937_64;

CMat gaussian(Rng& rng, int r, int c) {
  std::normal_distribution<double> nd;
  CMat M(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) M(i, j) = cplx(nd(rng), nd(rng));
  return M;
}

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

CMat random_unitary(Rng& rng, int m) {
  Eigen::HouseholderQR<CMat> qr(gaussian(rng, m, m));
  return qr.householderQ() * CMat::Identity(m, m);
}

// Hermitian positive definite with spectrum in [lo, hi].
CMat random_hpd(Rng& rng, int m, double lo, double hi) {
  CMat U = random_unitary(rng, m);
  RVec d(m);
  for (int i = 0; i < m; ++i) d[i] = uniform(rng, lo, hi);
  CMat A = U * d.cast<cplx>().asDiagonal() * U.adjoint();
  return 0.5 * (A + A.adjoint());
}

CMat random_symmetric(Rng& rng, int m) {
  CMat X = gaussian(rng, m, m);
  return 0.5 * (X + X.transpose());
}

CMat random_hermitian(Rng& rng, int m) {
  CMat X = gaussian(rng, m, m);
  return 0.5 * (X + X.adjoint());
}

// Eigenvalues of the pencil (V, G) for the forms z^T V conj(z), z^T G conj(z).
RVec pencil_eigenvalues(const CMat& V, const CMat& G) {
  Eigen::LLT<CMat> llt(G);
  CMat Li = CMat(llt.matrixL()).inverse();
  CMat M = Li * V * Li.adjoint();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (M + M.adjoint()));
  return es.eigenvalues();
}

double max_abs_entry(const CMat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

double top_real_eigenvalue(const CMat& M) {
  Eigen::ComplexEigenSolver<CMat> es(M);
  double top = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < M.rows(); ++i) top = std::max(top, es.eigenvalues()[i].real());
  return top;
}

// A convex gauge: A with spectrum in [0.1, 5], B shrunk until the form is strongly convex.
QuadraticGauge random_convex_gauge(Rng& rng, int m, const MetricForm& g) {
  CMat A = random_hpd(rng, m, 0.1, 5.0);
  CMat B = random_symmetric(rng, m) * uniform(rng, 0.0, 3.0);
  for (int k = 0; k < 60; ++k) {
    QuadraticGauge q = QuadraticGauge::make(A, B);
    if (modulus_of_convexity(q, g).value > 1e-6) return q;
    B *= 0.7;
  }
  return QuadraticGauge::make(A, CMat::Zero(m, m));
}

// Real quadratic x^T P x + l^T x + c in interleaved coordinates.
struct RealQuadratic {
  RMat P;
  RVec l;
  double c = 0.0;
  RealJet operator()(const RVec& x) const {
    RealJet j;
    j.value = x.dot(P * x) + l.dot(x) + c;
    j.grad = 2.0 * P * x + l;
    j.hess = 2.0 * P;
    return j;
  }
};

RealQuadratic random_real_quadratic(Rng& rng, int n, double lo, double hi, double lin) {
  std::normal_distribution<double> nd;
  RMat X(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int k = 0; k < 2 * n; ++k) X(i, k) = nd(rng);
  Eigen::HouseholderQR<RMat> qr(X);
  RMat Q = qr.householderQ() * RMat::Identity(2 * n, 2 * n);
  RVec d(2 * n);
  for (int i = 0; i < 2 * n; ++i) d[i] = uniform(rng, lo, hi);
  RealQuadratic f;
  f.P = Q * d.asDiagonal() * Q.transpose();
  f.P = 0.5 * (f.P + f.P.transpose()).eval();
  f.l = RVec(2 * n);
  for (int i = 0; i < 2 * n; ++i) f.l[i] = lin * nd(rng);
  return f;
}

Point random_point(Rng& rng, int n, double scale) {
  return gaussian(rng, n, 1).col(0) * scale;
}

// Uniform points in the ball B(p, radius) of C^n.
std::vector<Point> ball_points(Rng& rng, const Point& p, double radius, int count) {
  const int n = static_cast<int>(p.size());
  std::vector<Point> out;
  for (int k = 0; k < count; ++k) {
    CVec u = gaussian(rng, n, 1).col(0).normalized();
    double r = radius * std::pow(uniform(rng, 0.0, 1.0), 1.0 / (2 * n));
    out.push_back(p + r * u);
  }
  for (int k = 0; k < n; ++k) {
    CVec e = CVec::Zero(n);
    e[k] = radius;
    out.push_back(p + e);
    out.push_back(p - e);
  }
  return out;
}

bool strongly_qc(const Jet& j, const MetricForm& G) {
  try {
    Convexity c = qc_modulus(j, G);
    return c.convex && c.value > 0;
  } catch (const Error&) {
    return false;
  }
}

struct PhQuad {
  CVec c;
  CMat d;
};

// Upper bound of |d q| over the ball B(p, radius) for q = Re(c z + z d z), Euclidean metric.
double sup_gradient(const PhQuad& q, const Point& p, double radius) {
  CVec g = 0.5 * q.c + q.d * p;
  Eigen::JacobiSVD<CMat> svd(q.d);
  return g.norm() + svd.singularValues()[0] * radius;
}

// Adversarial and random pluriharmonic quadratics, each scaled to unit sup gradient on the ball.
std::vector<PhQuad> perturbations(Rng& rng, const std::vector<Point>& pts, const std::vector<Jet>& jets,
                                  const Point& p, double radius, int random_count) {
  const int n = static_cast<int>(p.size());
  const MetricForm G = MetricForm::identity(n);
  std::size_t ig = 0, iw = 0;
  double gmin = std::numeric_limits<double>::infinity(), wmin = gmin;
  for (std::size_t k = 0; k < jets.size(); ++k) {
    double gn = gradient_norm(jets[k], G);
    if (gn < gmin) gmin = gn, ig = k;
    double m = qc_modulus(jets[k], G).value;
    if (m < wmin) wmin = m, iw = k;
  }
  std::vector<PhQuad> out;
  out.push_back({2.0 * jets[ig].grad, CMat::Zero(n, n)});
  {
    TangentGauge tg = tangent_gauge(jets[iw], G, 0.0);
    CMat dv = CMat::Zero(n, n);
    double nb = tg.B.norm();
    if (nb > 1e-14)
      dv.topLeftCorner(n - 1, n - 1) = -tg.B / nb;
    else
      dv(0, 0) = -1.0;
    CMat Fi = tg.frame.inverse();
    CMat d = Fi.transpose() * dv * Fi;
    out.push_back({-2.0 * d * pts[iw], d});
  }
  for (int k = 0; k < random_count; ++k) {
    CMat d = random_symmetric(rng, n);
    out.push_back({gaussian(rng, n, 1).col(0), d});
  }
  for (auto& q : out) {
    double s = sup_gradient(q, p, radius);
    if (s > 0) q.c /= s, q.d /= s;
  }
  return out;
}

bool survives(const std::vector<Jet>& jets, const std::vector<PhQuad>& qs, double eps, const MetricForm& G) {
  for (const auto& q : qs)
    for (const auto& j : jets)
      if (!strongly_qc(subtract_pluriharmonic(j, eps * q.c, eps * q.d), G)) return false;
  return true;
}

// Accumulates one suite's outcome.
struct Tally {
  SuiteResult r;
  bool any = false;
  void check(bool ok, double margin, const std::function<std::string()>& witness) {
    ++r.trials;
    if (!any || margin < r.worst_margin) r.worst_margin = margin;
    any = true;
    if (!ok) {
      if (r.failures == 0) r.witness = witness();
      ++r.failures;
    }
  }
  void skip() { ++r.trials; }
  void record(const PredicateResult& p) {
    if (!p.hypothesis) return skip();
    check(p.conclusion, p.margin, [&] { return p.witness; });
  }
};

std::string fmt(const std::vector<std::pair<const char*, double>>& kv) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ", ";
    os << k << "=" << v;
    first = false;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

void suite_modulus_degree(Tally& t, Rng& rng, int trials) {
  DegreeOptions dopt;
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 3);
    MetricForm g = MetricForm::make(random_hpd(rng, m, 0.1, 5.0));
    QuadraticGauge q = random_convex_gauge(rng, m, g);
    dopt.seed = rng();
    double mod = modulus_of_convexity(q, g).value;
    double deg = degree_of_convexity(q, g, dopt);
    double tol = 1e-3 + 0.05 * std::abs(mod);
    double gap = std::abs(mod - deg);

    // Takagi extremal direction: with A = lambda I and G = I the form at i conj(u_1) is lambda - D_1.
    double lam = uniform(rng, 0.5, 3.0);
    CMat B = random_symmetric(rng, m);
    Takagi tk = takagi(B);
    CVec w = cplx(0, 1) * tk.U.col(0).conjugate();
    double form = lam * w.squaredNorm() + cplx(w.transpose() * B * w).real();
    double tgap = std::abs(form - (lam - tk.D[0]));
    double ttol = 1e-9 * (1 + B.norm());

    t.check(gap <= tol && tgap <= ttol, std::min(tol - gap, ttol - tgap), [&] {
      return fmt({{"m", m}, {"modulus", mod}, {"degree", deg}, {"extremal_form", form},
                  {"lambda_minus_D1", lam - tk.D[0]}});
    });
  }
}

void suite_takagi(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 6);
    CMat B = random_symmetric(rng, m);
    if (m > 1 && k % 4 == 0) {
      // rank deficient
      CMat X = gaussian(rng, m, m - 1);
      B = X * X.transpose();
    }
    Takagi tk = takagi(B);
    double nb = B.norm();
    double err = (B - tk.U * tk.D.cast<cplx>().asDiagonal() * tk.U.transpose()).norm();
    Eigen::JacobiSVD<CMat> svd(B);
    double derr = (tk.D - svd.singularValues()).cwiseAbs().maxCoeff();
    double uerr = (tk.U.adjoint() * tk.U - CMat::Identity(m, m)).norm();
    double tol = 1e-9 * (1 + nb);
    t.check(err <= tol && derr <= tol && uerr <= 1e-9, tol - std::max(err, derr), [&] {
      return fmt({{"m", m}, {"reconstruction", err}, {"singular_values", derr}, {"unitarity", uerr}});
    });
  }
}

void suite_kappa_reality(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 4);
    CMat A = random_hpd(rng, m, 0.1, 5.0);
    CMat B = random_symmetric(rng, m) * uniform(rng, 0.1, 3.0);
    KappaSpectrum ks = kappa(A, B);
    double tol = 1e-9 * (1 + ks.K.norm());
    double low = ks.eigenvalues.back();
    t.check(ks.max_imag <= tol && low >= -tol, tol - ks.max_imag,
            [&] { return fmt({{"m", m}, {"max_imag", ks.max_imag}, {"min_eig", low}}); });
  }
}

void suite_half_perturbation(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 3);
    MetricForm g = MetricForm::make(random_hpd(rng, m, 0.1, 5.0));
    QuadraticGauge q = random_convex_gauge(rng, m, g);
    double delta = 0.999 * modulus_of_convexity(q, g).value;
    CMat V = random_hermitian(rng, m);
    double top = pencil_eigenvalues(V, g.G).maxCoeff();
    if (top > 0)
      V *= 0.5 * delta / top;
    else
      V += (0.5 * delta - top) * g.G;
    CMat W = random_symmetric(rng, m);
    W *= 0.5 * delta / weighted_norm(W, g);
    PredicateResult p = predicate_half_perturbation(q, g, delta, V, W);
    t.record(p);
  }
}

// Quadratic field on a ball, sampled, with Euclidean metric.
struct BallInstance {
  Point p;
  double radius = 0.0;
  RealQuadratic f;
  std::vector<Point> pts;
  std::vector<Jet> jets;
};

bool make_ball_instance(Rng& rng, BallInstance& b) {
  const int n = 2;
  double diam = uniform(rng, 0.2, 2.0);
  b.radius = diam / 2;
  b.p = random_point(rng, n, 1.0);
  b.f = random_real_quadratic(rng, n, 0.2, 3.0, 3.0);
  b.pts = ball_points(rng, b.p, b.radius, 24);
  b.jets.clear();
  MetricForm G = MetricForm::identity(n);
  for (const auto& z : b.pts) {
    b.jets.push_back(jet_from_real(z, b.f(to_real(z))));
    if (!strongly_qc(b.jets.back(), G)) return false;
  }
  return true;
}

double min_qc(const std::vector<Jet>& jets, const MetricForm& G) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& j : jets) m = std::min(m, qc_modulus(j, G).value);
  return m;
}

void suite_modulus_to_robustness(Tally& t, Rng& rng, int trials) {
  MetricForm G = MetricForm::identity(2);
  for (int k = 0; k < trials; ++k) {
    BallInstance b;
    if (!make_ball_instance(rng, b)) {
      t.skip();
      continue;
    }
    double m = min_qc(b.jets, G);
    RobustnessContext ctx;
    ctx.c2_norm = 2.0 * Eigen::SelfAdjointEigenSolver<RMat>(b.f.P).eigenvalues().cwiseAbs().maxCoeff();
    ctx.thickness = 2 * b.radius;
    ctx.diameter = 2 * b.radius;
    double rho = modulus_to_robustness(m, ctx);
    auto qs = perturbations(rng, b.pts, b.jets, b.p, b.radius, 20);
    bool ok = survives(b.jets, qs, rho, G);
    t.check(ok, rho, [&] { return fmt({{"modulus", m}, {"rho", rho}, {"diameter", ctx.diameter}}); });
  }
}

void suite_robustness_to_modulus(Tally& t, Rng& rng, int trials) {
  MetricForm G = MetricForm::identity(2);
  for (int k = 0; k < trials; ++k) {
    BallInstance b;
    if (!make_ball_instance(rng, b)) {
      t.skip();
      continue;
    }
    auto qs = perturbations(rng, b.pts, b.jets, b.p, b.radius, 8);
    // The first perturbation cancels the smallest gradient, so robustness never exceeds it.
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& j : b.jets) hi = std::min(hi, gradient_norm(j, G));
    double lo = 0.0;
    for (int it = 0; it < 24; ++it) {
      double mid = 0.5 * (lo + hi);
      (survives(b.jets, qs, mid, G) ? lo : hi) = mid;
    }
    RobustnessContext ctx;
    ctx.diameter = 2 * b.radius;
    double bound = robustness_to_modulus(lo, ctx);
    double m = min_qc(b.jets, G);
    double slack = m - bound * (1 - 1e-6);
    t.check(slack >= -1e-12, slack, [&] {
      return fmt({{"robustness_estimate", lo}, {"diameter", ctx.diameter}, {"bound", bound}, {"modulus", m}});
    });
  }
}

void suite_entry_size(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 5);
    CMat A(m, m), B(m, m);
    double ca = 1.0 / (m * m), cb = 1.0 / std::pow(m, 1.5);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double ra = ca * uniform(rng, 0.0, 0.999), rb = cb * uniform(rng, 0.0, 0.999);
        double pa = uniform(rng, 0, 2 * M_PI), pb = uniform(rng, 0, 2 * M_PI);
        if (i == j) {
          A(i, i) = (uniform(rng, 0, 1) < 0.5 ? -ra : ra);
        } else {
          A(i, j) = std::polar(ra, pa);
          A(j, i) = std::conj(A(i, j));
        }
        B(i, j) = B(j, i) = std::polar(rb, pb);
      }
    t.record(predicate_entry_size(A, B));
  }
}

struct KappaInstance {
  int m;
  MetricForm g;
  QuadraticGauge q;
  double kmax;
};

KappaInstance random_kappa_instance(Rng& rng) {
  const int m = uniform_int(rng, 1, 3);
  MetricForm g = MetricForm::make(random_hpd(rng, m, 0.1, 5.0));
  CMat A = random_hpd(rng, m, 0.1, 5.0);
  CMat B = random_symmetric(rng, m);
  double k0 = kappa(A, B).max_eig();
  if (k0 > 0) B *= std::sqrt(uniform(rng, 0.0, 1.2) / k0);
  QuadraticGauge q = QuadraticGauge::make(A, B);
  return {m, g, q, kappa(q.A, q.B).max_eig()};
}

void suite_metric_kappa_to_modulus(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    KappaInstance in = random_kappa_instance(rng);
    double amin = pencil_eigenvalues(in.q.A, in.g.G).minCoeff();
    double delta = std::min(amin, 1.0 - in.kmax) * (1 - 1e-9);
    t.record(predicate_metric_kappa(in.q, in.g, delta));
  }
}

void suite_modulus_to_kappa_gap(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    KappaInstance in = random_kappa_instance(rng);
    Convexity c = modulus_of_convexity(in.q, in.g);
    t.record(predicate_kappa_gap(in.q, in.g, c.value * (1 - 1e-9)));
  }
}

void suite_kappa_monotone(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 4);
    CMat H = random_hpd(rng, m, 0.1, 5.0);
    CMat K = H + random_hpd(rng, m, 1e-3, 3.0);
    CMat B = random_symmetric(rng, m);
    double big = kappa(K, B).max_eig(), small = kappa(H, B).max_eig();
    double slack = small * (1 + 1e-9) + 1e-12 - big;
    t.check(slack >= 0, slack, [&] { return fmt({{"m", m}, {"kappa_K", big}, {"kappa_H", small}}); });
  }
}

void suite_boundary_conversion(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int n = 2;
    SmoothDomain dom = SmoothDomain::ellipsoid(random_hpd(rng, n, 0.2, 5.0), random_point(rng, n, 0.5));
    double mu = cconvexity_modulus(dom, 200).modulus.value;
    double k1 = uniform(rng, 0.1, 10.0), k2 = uniform(rng, -2.0, 2.0);
    MetricForm G = MetricForm::identity(n);
    double worst = std::numeric_limits<double>::infinity();
    double fn_w = 0, qc_w = 0;
    for (const auto& s : dom.sample_boundary(24)) {
      RealJet r = dom.rho(s.x);
      RealJet F;
      double a = k1 + 2 * k2 * r.value;
      F.value = k1 * r.value + k2 * r.value * r.value;
      F.grad = a * r.grad;
      F.hess = a * r.hess + 2 * k2 * r.grad * r.grad.transpose();
      Jet j = jet_from_real(from_real(s.x), F);
      double fn = gradient_norm(j, G);  // half the Euclidean normal derivative
      double qc = qc_modulus(j, G).value;
      double slack = qc - boundary_qc_bound(mu, fn) * (1 - 1e-9);
      if (slack < worst) worst = slack, fn_w = fn, qc_w = qc;
    }
    t.check(worst >= -1e-12, worst, [&] {
      return fmt({{"mu", mu}, {"normal_derivative", fn_w}, {"qc_modulus", qc_w}, {"k1", k1}, {"k2", k2}});
    });
  }
}

void suite_levelset_conversion(Tally& t, Rng& rng, int trials) {
  const int n = 2;
  MetricForm G = MetricForm::identity(n);
  for (int k = 0; k < trials; ++k) {
    RealQuadratic f = random_real_quadratic(rng, n, 0.2, 3.0, 2.0);
    RVec xs = -0.5 * f.P.ldlt().solve(f.l);
    double fmin = f(xs).value;
    double level = fmin + uniform(rng, 0.1, 4.0);
    f.c = -level;
    SmoothDomain dom = SmoothDomain::callback(n, f, from_real(xs), "sublevel");
    double min_qc_v = std::numeric_limits<double>::infinity(), max_grad = 0.0;
    double min_mu = std::numeric_limits<double>::infinity();
    for (const auto& u : sphere_points(n, 24)) {
      double s = std::sqrt((level - fmin) / u.dot(f.P * u));
      RVec x = xs + s * u;
      Jet j = jet_from_real(from_real(x), f(x));
      min_qc_v = std::min(min_qc_v, qc_modulus(j, G).value);
      max_grad = std::max(max_grad, 2.0 * gradient_norm(j, G));
      BoundaryGraph bg = dom.boundary_graph(from_real(x));
      min_mu = std::min(min_mu, modulus_of_convexity(bg.restricted, MetricForm::identity(n - 1)).value);
    }
    double bound = levelset_modulus_bound(min_qc_v, max_grad);
    double slack = min_mu - bound * (1 - 1e-9);
    t.check(slack >= -1e-12, slack, [&] {
      return fmt({{"levelset_modulus", min_mu}, {"qc_modulus", min_qc_v}, {"max_gradient", max_grad}});
    });
  }
}

void suite_scale_covariance(Tally& t, Rng& rng, int trials) {
  for (int k = 0; k < trials; ++k) {
    const int m = uniform_int(rng, 1, 4);
    MetricForm g = MetricForm::make(random_hpd(rng, m, 0.1, 5.0));
    CMat A = random_hermitian(rng, m), B = random_symmetric(rng, m);
    QuadraticGauge q = QuadraticGauge::make(A, B);
    double base = modulus_of_convexity(q, g).value;
    double worst = std::numeric_limits<double>::infinity();
    double tw = 0, vw = 0;
    for (double s : {0.5, 2.0, 10.0}) {
      double v = modulus_of_convexity(QuadraticGauge::make(s * A, s * B), g).value;
      double slack = 1e-9 * (1 + std::abs(s * base)) - std::abs(v - s * base);
      if (slack < worst) worst = slack, tw = s, vw = v;
    }
    t.check(worst >= 0, worst, [&] { return fmt({{"t", tw}, {"modulus", base}, {"scaled", vw}}); });
  }
}

using SuiteFn = void (*)(Tally&, Rng&, int);

const std::vector<std::pair<std::string, SuiteFn>>& suites() {
  static const std::vector<std::pair<std::string, SuiteFn>> s = {
      {"modulus_degree_equivalence", suite_modulus_degree},
      {"takagi_roundtrip", suite_takagi},
      {"kappa_reality", suite_kappa_reality},
      {"half_perturbation", suite_half_perturbation},
      {"modulus_to_robustness", suite_modulus_to_robustness},
      {"robustness_to_modulus", suite_robustness_to_modulus},
      {"entry_size_control", suite_entry_size},
      {"metric_kappa_to_modulus", suite_metric_kappa_to_modulus},
      {"modulus_to_kappa_gap", suite_modulus_to_kappa_gap},
      {"kappa_monotone", suite_kappa_monotone},
      {"boundary_conversion", suite_boundary_conversion},
      {"levelset_conversion", suite_levelset_conversion},
      {"scale_covariance", suite_scale_covariance},
  };
  return s;
}

}  // namespace

PredicateResult predicate_half_perturbation(const QuadraticGauge& q, const MetricForm& g, double delta,
                                            const CMat& V, const CMat& W) {
  if (q.dim() != g.dim() || V.rows() != q.dim() || W.rows() != q.dim())
    throw Error(Status::dimension_mismatch, "half perturbation instance dimensions");
  PredicateResult p;
  double mod = modulus_of_convexity(q, g).value;
  double vtop = pencil_eigenvalues(V, g.G).maxCoeff();
  double wn = weighted_norm(W, g);
  const double tol = 1e-12 * (1 + delta);
  p.hypothesis = delta > 0 && mod > delta && vtop <= delta / 2 + tol && wn <= delta / 2 + tol;
  if (!p.hypothesis) return p;
  Convexity c = modulus_of_convexity(QuadraticGauge::make(q.A - V, q.B - W), g);
  p.conclusion = c.convex && c.value > 0;
  p.margin = c.value;
  p.witness = fmt({{"delta", delta}, {"modulus", mod}, {"perturbed_modulus", c.value}});
  return p;
}

PredicateResult predicate_entry_size(const CMat& A, const CMat& B) {
  if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
    throw Error(Status::dimension_mismatch, "entry size instance dimensions");
  const double k = static_cast<double>(A.rows());
  PredicateResult p;
  if (max_abs_entry(A - A.adjoint()) > 1e-12 || max_abs_entry(B - B.transpose()) > 1e-12)
    throw Error(Status::invalid_argument, "A must be Hermitian and B symmetric");
  p.hypothesis = A.cwiseAbs().maxCoeff() < 1 / (k * k) && B.cwiseAbs().maxCoeff() < 1 / std::pow(k, 1.5);
  if (!p.hypothesis) return p;
  CMat Ah = 0.5 * (A + A.adjoint());
  double ea = Eigen::SelfAdjointEigenSolver<CMat>(Ah).eigenvalues().maxCoeff();
  double eb = Eigen::SelfAdjointEigenSolver<CMat>(B * B.adjoint()).eigenvalues().maxCoeff();
  p.margin = 1.0 - std::max(ea, eb);
  p.conclusion = p.margin > 0;
  p.witness = fmt({{"k", k}, {"max_eig_A", ea}, {"max_eig_BBH", eb}});
  return p;
}

PredicateResult predicate_metric_kappa(const QuadraticGauge& q, const MetricForm& g, double delta) {
  if (q.dim() != g.dim()) throw Error(Status::dimension_mismatch, "gauge/metric dimension mismatch");
  PredicateResult p;
  double amin = pencil_eigenvalues(q.A, g.G).minCoeff();
  if (!(delta > 0) || !(amin > delta)) return p;
  double kmax = kappa(q.A, q.B).max_eig();
  p.hypothesis = kmax < 1 - delta;
  if (!p.hypothesis) return p;
  double mod = modulus_of_convexity(q, g).value;
  p.margin = mod - (delta * delta / 2 - 1e-9);
  p.conclusion = p.margin >= 0;
  p.witness = fmt({{"delta", delta}, {"kappa_max", kmax}, {"modulus", mod}});
  return p;
}

PredicateResult predicate_kappa_gap(const QuadraticGauge& q, const MetricForm& g, double delta) {
  if (q.dim() != g.dim()) throw Error(Status::dimension_mismatch, "gauge/metric dimension mismatch");
  PredicateResult p;
  Convexity c = modulus_of_convexity(q, g);
  p.hypothesis = delta > 0 && c.convex && c.value > delta;
  if (!p.hypothesis) return p;
  double kmax = kappa(q.A, q.B).max_eig();
  double c2 = top_real_eigenvalue(q.A * g.Ginv);
  double bound = 1 - delta / (2 * c2) + 1e-9;
  p.margin = bound - kmax;
  p.conclusion = p.margin >= 0;
  p.witness = fmt({{"modulus", c.value}, {"C2", c2}, {"kappa_max", kmax}, {"bound", bound}});
  return p;
}

std::vector<std::string> lemma_suite_names() {
  std::vector<std::string> out;
  for (const auto& s : suites()) out.push_back(s.first);
  return out;
}

SuiteResult run_lemma_suite(const std::string& name, int trials, std::uint64_t seed) {
  if (trials < 0) throw Error(Status::invalid_argument, "trial count must be nonnegative");
  for (const auto& s : suites())
    if (s.first == name) {
      Tally t;
      t.r.name = name;
      Rng rng(seed);
      s.second(t, rng, trials);
      return t.r;
    }
  throw Error(Status::invalid_argument, "unknown lemma suite: " + name);
}

}  // namespace cmlab
