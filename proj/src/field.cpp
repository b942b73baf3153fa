#include "cmlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cmlab {

Jet jet_from_real(const Point& z, const RealJet& r) {
  Jet j;
  j.z = z;
  j.value = r.value;
  j.grad = complex_gradient(r.grad);
  j.herm = complex_hessian(r.hess);
  j.hol = holomorphic_hessian(r.hess);
  return j;
}

Jet transform_jet(const Jet& j, const CMat& M) {
  Jet o;
  o.z = M.partialPivLu().solve(j.z);
  o.value = j.value;
  o.grad = M.transpose() * j.grad;
  o.herm = M.transpose() * j.herm * M.conjugate();
  o.hol = M.transpose() * j.hol * M;
  return o;
}

MetricForm transform_metric(const MetricForm& g, const CMat& M) {
  CMat G = M.transpose() * g.G * M.conjugate();
  return MetricForm::make(0.5 * (G + G.adjoint()));
}

double gradient_norm(const Jet& j, const MetricForm& G) {
  return std::sqrt(std::max(0.0, (j.grad.adjoint() * G.Ginv * j.grad)(0, 0).real()));
}

namespace {

// z = M w with w orthonormal for G.
CMat orthonormal_change(const MetricForm& G) {
  CMat L = G.chol();
  return L.transpose().inverse();
}

// Unitary whose last column is conj(g)/|g|; the others span the complement.
CMat gradient_frame(const CVec& g) {
  const int n = static_cast<int>(g.size());
  CMat u = g.conjugate() / g.norm();
  Eigen::HouseholderQR<CMat> qr(u);
  CMat Q = qr.householderQ() * CMat::Identity(n, n);
  CMat U(n, n);
  U.leftCols(n - 1) = Q.rightCols(n - 1);
  U.col(n - 1) = u.col(0);
  return U;
}

bool positive_definite(const CMat& A) {
  if (A.rows() == 0) return true;
  double s = A.cwiseAbs().maxCoeff();
  if (!(s > 0)) return false;
  Eigen::LLT<CMat> llt(A / s);
  if (llt.info() != Eigen::Success) return false;
  CMat L = llt.matrixL();
  return L.diagonal().real().minCoeff() > 1e-9;
}

}  // namespace

TangentGauge tangent_gauge(const Jet& j, const MetricForm& G, double eps) {
  const int n = static_cast<int>(j.grad.size());
  if (G.dim() != n) throw Error(Status::dimension_mismatch, "metric dimension mismatch");
  if (n < 2) throw Error(Status::invalid_argument, "tangent gauge needs n >= 2");
  CMat M = orthonormal_change(G);
  Jet w = transform_jet(j, M);
  TangentGauge out;
  out.grad_norm = w.grad.norm();
  if (out.grad_norm <= 1e-8) throw Error(Status::singular, "vanishing gradient");
  CMat U = gradient_frame(w.grad);
  Jet v = transform_jet(w, U);
  out.frame = M * U;

  const int m = n - 1, t = n - 1;
  const cplx pt = v.grad(t);
  out.A.resize(m, m);
  out.B.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const cplx pa = v.grad(a), pb = v.grad(b);
      out.A(a, b) = v.herm(a, b) - pa / pt * v.herm(t, b) - std::conj(pb) / std::conj(pt) * v.herm(a, t) +
                    pa * std::conj(pb) / std::norm(pt) * v.herm(t, t);
      out.B(a, b) = v.hol(a, b) - pa / pt * v.hol(t, b) - pb / pt * v.hol(a, t) + pa * pb / (pt * pt) * v.hol(t, t);
    }
  out.A = 0.5 * (out.A + out.A.adjoint()).eval();
  out.B = 0.5 * (out.B + out.B.transpose()).eval();

  if (positive_definite(out.A)) {
    out.kappa = kappa(out.A, out.B);
    out.convex = out.kappa->max_eig() < 1.0;
  }

  out.W = w.herm.trace().real();
  out.V = w.hol.squaredNorm();
  if (positive_definite(j.herm)) {
    Eigen::SelfAdjointEigenSolver<CMat> es(j.herm);
    double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    out.S = eps * (j.grad.adjoint() * j.herm.ldlt().solve(j.grad))(0, 0).real();
    out.S_unreliable = lo < 1e-12 * hi;
  }
  return out;
}

Convexity qc_modulus(const Jet& j, const MetricForm& G) {
  TangentGauge g = tangent_gauge(j, G, 0.0);
  Convexity c = modulus_of_convexity(QuadraticGauge::make(g.A, g.B), MetricForm::identity(g.A.rows()));
  if (!c.convex) return c;
  return {true, std::min(g.grad_norm, c.value)};
}

Convexity levelset_modulus(const Jet& j, const MetricForm& G) {
  TangentGauge g = tangent_gauge(j, G, 0.0);
  Convexity c = modulus_of_convexity(QuadraticGauge::make(g.A, g.B), MetricForm::identity(g.A.rows()));
  c.value /= 2.0 * g.grad_norm;
  return c;
}

// ---------------------------------------------------------------------------
// Analytic fields

AnalyticField::AnalyticField(int n, JetFn fn, AnalyticSpec spec) : n_(n), fn_(std::move(fn)), spec_(std::move(spec)) {
  if (n_ < 1) throw Error(Status::invalid_argument, "dimension must be positive");
  G_ = MetricForm::identity(n_);
}

std::shared_ptr<AnalyticField> AnalyticField::quadratic(const CMat& A, const CMat& B, const CVec& L, double c) {
  QuadraticGauge q = QuadraticGauge::make(A, B, L);
  const int n = q.dim();
  AnalyticSpec sp;
  sp.kind = "quadratic";
  sp.A = q.A;
  sp.B = q.B;
  sp.L = L.size() ? L : CVec::Zero(n);
  sp.c = c;
  auto fn = [sp, n](const Point& z) {
    if (z.size() != n) throw Error(Status::dimension_mismatch, "point dimension mismatch");
    Jet j;
    j.z = z;
    j.value = (z.transpose() * sp.A * z.conjugate())(0, 0).real() + (z.transpose() * sp.B * z)(0, 0).real() +
              (sp.L.transpose() * z)(0, 0).real() + sp.c;
    j.grad = sp.A * z.conjugate() + sp.B * z + 0.5 * sp.L;
    j.herm = sp.A;
    j.hol = sp.B;
    return j;
  };
  return std::make_shared<AnalyticField>(n, fn, sp);
}

std::shared_ptr<AnalyticField> AnalyticField::log_hermitian(const CMat& H, double a, double c) {
  MetricForm chk = MetricForm::make(H);  // validates H
  const int n = chk.dim();
  AnalyticSpec sp;
  sp.kind = "log_hermitian";
  sp.H = chk.G;
  sp.a = a;
  sp.c = c;
  auto fn = [sp, n](const Point& z) {
    if (z.size() != n) throw Error(Status::dimension_mismatch, "point dimension mismatch");
    CVec v = sp.H * z.conjugate();
    double q = (z.transpose() * v)(0, 0).real();
    if (!(q > 0)) throw Error(Status::out_of_support, "log field evaluated at its pole");
    Jet j;
    j.z = z;
    j.value = sp.a * std::log(q) + sp.c;
    j.grad = sp.a * v / q;
    j.herm = sp.a * (sp.H / q - v * v.adjoint() / (q * q));
    j.hol = -sp.a * v * v.transpose() / (q * q);
    return j;
  };
  return std::make_shared<AnalyticField>(n, fn, sp);
}

std::shared_ptr<AnalyticField> AnalyticField::radial_log(int n, double r, double R) {
  if (!(r > 0 && R > r)) throw Error(Status::invalid_argument, "radial profile needs 0 < r < R");
  double k = std::log(R / r);
  return log_hermitian(CMat::Identity(n, n), 0.5 / k, -std::log(r) / k);
}

std::shared_ptr<AnalyticField> AnalyticField::from_real(int n, RealCallback cb, const std::string& name) {
  AnalyticSpec sp;
  sp.kind = "callback:" + name;
  auto fn = [cb, n](const Point& z) {
    if (z.size() != n) throw Error(Status::dimension_mismatch, "point dimension mismatch");
    return jet_from_real(z, cb(to_real(z)));
  };
  return std::make_shared<AnalyticField>(n, fn, sp);
}

namespace {

const RingDomain& need_ring(const ScalarField& f) {
  if (!f.ring()) throw Error(Status::invalid_argument, "field has no ring attached");
  return *f.ring();
}

std::vector<RVec> interior_points(const RingDomain& ring, int count, std::uint64_t seed) {
  RVec c = to_real(ring.omega1().center());
  double rad = 0.0;
  for (const auto& s : ring.samples1()) rad = std::max(rad, (s.x - c).norm());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ud(-rad, rad);
  std::vector<RVec> out;
  long tries = 0;
  while (static_cast<int>(out.size()) < count && tries < 1000L * std::max(count, 1)) {
    ++tries;
    RVec x(c.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = c[i] + ud(rng);
    if (ring.interior(x)) out.push_back(x);
  }
  return out;
}

}  // namespace

std::vector<SamplePoint> AnalyticField::samples(const SampleOptions& opt) const {
  const RingDomain& ring = need_ring(*this);
  std::vector<SamplePoint> out;
  for (const auto& x : interior_points(ring, opt.interior, opt.seed)) {
    Point z = cmlab::from_real(x);
    out.push_back({z, jet(z), -1, RVec()});
  }
  const int stride = std::max(1, opt.stride);
  for (std::size_t k = 0; k < ring.samples0().size(); k += stride) {
    const auto& s = ring.samples0()[k];
    Point z = cmlab::from_real(s.x);
    out.push_back({z, jet(z), 0, -s.normal});
  }
  for (std::size_t k = 0; k < ring.samples1().size(); k += stride) {
    const auto& s = ring.samples1()[k];
    Point z = cmlab::from_real(s.x);
    out.push_back({z, jet(z), 1, s.normal});
  }
  return out;
}

std::vector<SamplePoint> AnalyticField::level_set(double t, const SampleOptions& opt) const {
  const RingDomain& ring = need_ring(*this);
  std::vector<SamplePoint> out;
  RVec c = to_real(ring.omega0().center());
  const int count = std::max(16, opt.interior / 4);
  for (const auto& d : sphere_points(ring.n(), count)) {
    RVec p0 = ring.omega0().ray_hit(d), p1 = ring.omega1().ray_hit(d);
    auto g = [&](double s) { return value(cmlab::from_real(p0 + s * (p1 - p0))) - t; };
    const int scan = 64;
    double prev = g(0.0);
    for (int k = 1; k <= scan; ++k) {
      double s1 = double(k) / scan, cur = g(s1);
      if ((prev <= 0) != (cur <= 0)) {
        double lo = double(k - 1) / scan, hi = s1;
        bool lo_neg = prev <= 0;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          ((g(mid) <= 0) == lo_neg ? lo : hi) = mid;
        }
        Point z = cmlab::from_real(p0 + 0.5 * (lo + hi) * (p1 - p0));
        out.push_back({z, jet(z), -1, RVec()});
        break;
      }
      prev = cur;
    }
  }
  if (out.empty()) throw Error(Status::out_of_support, "level set is empty on the ring");
  return out;
}

std::vector<std::pair<Point, double>> AnalyticField::node_values() const {
  SampleOptions opt;
  opt.interior = 500;
  std::vector<std::pair<Point, double>> out;
  for (const auto& x : interior_points(need_ring(*this), opt.interior, opt.seed)) {
    Point z = cmlab::from_real(x);
    out.emplace_back(z, value(z));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Robustness

Jet subtract_pluriharmonic(const Jet& j, const CVec& c, const CMat& d) {
  Jet o = j;
  o.value -= ((c.transpose() * j.z)(0, 0) + (j.z.transpose() * d * j.z)(0, 0)).real();
  o.grad -= 0.5 * c + d * j.z;
  o.hol -= d;
  return o;
}

namespace {

bool strongly_qc(const Jet& j, const MetricForm& G) {
  try {
    Convexity c = qc_modulus(j, G);
    return c.convex && c.value > 0;
  } catch (const Error&) {
    return false;
  }
}

struct Perturbation {
  CVec c;
  CMat d;
};

// max over samples of |dq|_G for q = Re(c z + z d z).
double max_grad(const Perturbation& q, const std::vector<SamplePoint>& pts, const MetricForm& G) {
  double m = 0.0;
  for (const auto& p : pts) {
    CVec g = 0.5 * q.c + q.d * p.z;
    m = std::max(m, std::sqrt(std::max(0.0, (g.adjoint() * G.Ginv * g)(0, 0).real())));
  }
  return m;
}

}  // namespace

RobustnessResult robustness_probe(const ScalarField& field, const MetricForm& G, double eps_max, int trials,
                                  const SampleOptions& opt) {
  if (!(eps_max > 0)) throw Error(Status::invalid_argument, "eps_max must be positive");
  const int n = field.n();
  std::vector<SamplePoint> pts = field.samples(opt);
  RobustnessResult res;
  res.samples = static_cast<int>(pts.size());
  res.min_gradient = std::numeric_limits<double>::infinity();
  double weakest = std::numeric_limits<double>::infinity();
  std::size_t iw = 0, ig = 0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (!strongly_qc(pts[k].jet, G))
      throw Error(Status::nonconvex, "field is not strongly qC-convex at a sample point");
    double gn = gradient_norm(pts[k].jet, G);
    if (gn < res.min_gradient) res.min_gradient = gn, ig = k;
    double m = qc_modulus(pts[k].jet, G).value;
    if (m < weakest) weakest = m, iw = k;
  }

  // Unit-size perturbations; each is rescaled to the trial epsilon.
  std::vector<Perturbation> dirs;
  {
    const SamplePoint& p = pts[ig];
    dirs.push_back({2.0 * p.jet.grad, CMat::Zero(n, n)});
  }
  {
    const SamplePoint& p = pts[iw];
    TangentGauge g = tangent_gauge(p.jet, G, 0.0);
    CMat dv = CMat::Zero(n, n);
    double nb = g.B.norm();
    if (nb > 1e-14)
      dv.topLeftCorner(n - 1, n - 1) = -g.B / nb;
    else
      dv(0, 0) = -1.0;
    CMat Fi = g.frame.inverse();
    CMat d = Fi.transpose() * dv * Fi;
    dirs.push_back({-2.0 * d * p.z, d});
  }
  std::mt19937_64 rng(opt.seed + 17);
  std::normal_distribution<double> nd;
  for (int k = 0; k < trials; ++k) {
    Perturbation q{CVec(n), CMat(n, n)};
    for (int a = 0; a < n; ++a) q.c[a] = cplx(nd(rng), nd(rng));
    for (int a = 0; a < n; ++a)
      for (int b = a; b < n; ++b) q.d(a, b) = q.d(b, a) = cplx(nd(rng), nd(rng));
    dirs.push_back(q);
  }
  for (auto& q : dirs) {
    double m = max_grad(q, pts, G);
    if (m > 0) {
      q.c /= m;
      q.d /= m;
    }
  }

  auto survives = [&](double eps) {
    for (const auto& q : dirs)
      for (const auto& p : pts)
        if (!strongly_qc(subtract_pluriharmonic(p.jet, eps * q.c, eps * q.d), G)) return false;
    return true;
  };
  if (survives(eps_max)) {
    res.eps = eps_max;
    return res;
  }
  double lo = 0.0, hi = eps_max;
  for (int it = 0; it < 30; ++it) {
    double mid = 0.5 * (lo + hi);
    (survives(mid) ? lo : hi) = mid;
  }
  res.eps = lo;
  return res;
}

}  // namespace cmlab
