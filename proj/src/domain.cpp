#include "cmlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace cmlab {

CVec complex_gradient(const RVec& g) {
  const auto n = g.size() / 2;
  CVec c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = 0.5 * cplx(g[2 * i], -g[2 * i + 1]);
  return c;
}

CMat complex_hessian(const RMat& h) {
  const auto n = h.rows() / 2;
  CMat c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double xx = h(2 * i, 2 * j), yy = h(2 * i + 1, 2 * j + 1);
      double xy = h(2 * i, 2 * j + 1), yx = h(2 * i + 1, 2 * j);
      c(i, j) = 0.25 * cplx(xx + yy, xy - yx);
    }
  return 0.5 * (c + c.adjoint());
}

CMat holomorphic_hessian(const RMat& h) {
  const auto n = h.rows() / 2;
  CMat c(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double xx = h(2 * i, 2 * j), yy = h(2 * i + 1, 2 * j + 1);
      double xy = h(2 * i, 2 * j + 1), yx = h(2 * i + 1, 2 * j);
      c(i, j) = 0.25 * cplx(xx - yy, -(xy + yx));
    }
  return 0.5 * (c + c.transpose());
}

namespace {

// Interleaved real matrix M with z^T H conj(z) = v^T M v.
RMat hermitian_real(const CMat& H) {
  const auto n = H.rows();
  RMat M(2 * n, 2 * n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) {
      double hr = H(a, b).real(), hi = H(a, b).imag();
      M(2 * a, 2 * b) = hr;
      M(2 * a, 2 * b + 1) = hi;
      M(2 * a + 1, 2 * b) = -hi;
      M(2 * a + 1, 2 * b + 1) = hr;
    }
  return 0.5 * (M + M.transpose());
}

}  // namespace

SmoothDomain SmoothDomain::ball(const Point& center, double radius) {
  if (!(radius > 0)) throw Error(Status::invalid_argument, "ball radius must be positive");
  SmoothDomain d;
  d.kind_ = Kind::ball;
  d.n_ = static_cast<int>(center.size());
  d.center_ = center;
  d.radius_ = radius;
  d.H_ = CMat::Identity(d.n_, d.n_) / (radius * radius);
  d.scale_ = radius;
  d.name_ = "ball";
  return d;
}

SmoothDomain SmoothDomain::ellipsoid(const CMat& H, const Point& center) {
  MetricForm check = MetricForm::make(H);  // Hermitian positive definite
  SmoothDomain d;
  d.kind_ = Kind::ellipsoid;
  d.n_ = static_cast<int>(H.rows());
  if (center.size() != H.rows()) throw Error(Status::dimension_mismatch, "ellipsoid center length");
  d.center_ = center;
  d.H_ = check.G;
  Eigen::SelfAdjointEigenSolver<CMat> es(d.H_);
  d.scale_ = 1.0 / std::sqrt(es.eigenvalues().maxCoeff());
  d.radius_ = d.scale_;
  d.name_ = "ellipsoid";
  return d;
}

SmoothDomain SmoothDomain::callback(int n, RealCallback rho, const Point& center, std::string name,
                                    double scale) {
  if (!rho) throw Error(Status::invalid_argument, "empty defining function");
  SmoothDomain d;
  d.kind_ = Kind::callback;
  d.n_ = n;
  d.cb_ = std::move(rho);
  d.center_ = center;
  d.name_ = std::move(name);
  d.scale_ = scale;
  return d;
}

SmoothDomain SmoothDomain::dumbbell(double a, double b) {
  if (!(a > 0 && b > 0)) throw Error(Status::invalid_argument, "dumbbell parameters must be positive");
  auto rho = [a, b](const RVec& x) {
    RealJet j;
    double w = x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
    double P = (x[0] - a) * (x[0] - a) + w, Q = (x[0] + a) * (x[0] + a) + w;
    j.value = P * Q - std::pow(b, 4);
    j.grad = RVec::Zero(4);
    j.hess = RMat::Zero(4, 4);
    j.grad[0] = 2 * (x[0] - a) * Q + 2 * (x[0] + a) * P;
    for (int u = 1; u < 4; ++u) j.grad[u] = 2 * x[u] * (P + Q);
    j.hess(0, 0) = 2 * P + 2 * Q + 8 * (x[0] * x[0] - a * a);
    for (int u = 1; u < 4; ++u) {
      j.hess(0, u) = j.hess(u, 0) = 8 * x[0] * x[u];
      for (int v = 1; v < 4; ++v) j.hess(u, v) = (u == v ? 2 * (P + Q) : 0.0) + 8 * x[u] * x[v];
    }
    return j;
  };
  SmoothDomain d = callback(2, rho, Point::Zero(2), "dumbbell", std::sqrt(a * a + b * b));
  d.params_ = {a, b};
  return d;
}

RealJet SmoothDomain::rho(const RVec& x) const {
  if (x.size() != 2 * n_) throw Error(Status::dimension_mismatch, "point dimension mismatch");
  if (kind_ == Kind::callback) return cb_(x);
  RVec v = x - to_real(center_);
  RMat M = hermitian_real(H_);
  RealJet j;
  j.value = v.dot(M * v) - 1.0;
  j.grad = 2.0 * M * v;
  j.hess = 2.0 * M;
  if (kind_ == Kind::ball) {
    // canonical |z - c|^2 - r^2
    double r2 = radius_ * radius_;
    j.value *= r2;
    j.grad *= r2;
    j.hess *= r2;
  }
  return j;
}

namespace {

// Closest point on {v^T M v = 1} to v, via the secular equation in the eigenbasis of M.
RVec project_quadric(const RMat& M, const RVec& v) {
  Eigen::SelfAdjointEigenSolver<RMat> es(M);
  const RVec m = es.eigenvalues();
  const RVec w = es.eigenvectors().transpose() * v;
  const Eigen::Index d = v.size();
  const double mmax = m.maxCoeff();
  auto psi = [&](double t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) s += m[k] * w[k] * w[k] / ((1 + t * m[k]) * (1 + t * m[k]));
    return s - 1.0;
  };
  double lo, hi;
  if (psi(0.0) >= 0.0) {
    lo = 0.0;
    hi = 1.0 / mmax;
    while (psi(hi) > 0) hi *= 2;
  } else {
    lo = -1.0 / mmax;
    hi = 0.0;
    double probe = lo + 1e-14 / mmax;
    if (psi(probe) < 0) {
      // Point on the axis of the largest eigenvalue: the foot is not unique.
      RVec y(d);
      double rest = 1.0;
      for (Eigen::Index k = 0; k < d; ++k)
        if (m[k] < mmax * (1 - 1e-12)) {
          y[k] = w[k] / (1 - m[k] / mmax);
          rest -= m[k] * y[k] * y[k];
        } else {
          y[k] = 0.0;
        }
      for (Eigen::Index k = 0; k < d; ++k)
        if (m[k] >= mmax * (1 - 1e-12)) {
          y[k] = std::sqrt(std::max(rest, 0.0) / mmax) * (w[k] < 0 ? -1.0 : 1.0);
          break;
        }
      return es.eigenvectors() * y;
    }
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (psi(mid) > 0 ? lo : hi) = mid;
  }
  double t = 0.5 * (lo + hi);
  RVec y(d);
  for (Eigen::Index k = 0; k < d; ++k) y[k] = w[k] / (1 + t * m[k]);
  return es.eigenvectors() * y;
}

}  // namespace

Projection SmoothDomain::project(const RVec& p) const {
  const int d = 2 * n_;
  if (p.size() != d) throw Error(Status::dimension_mismatch, "point dimension mismatch");
  RVec x;
  int it = 0;
  if (kind_ != Kind::callback) {
    RVec c = to_real(center_);
    x = c + project_quadric(hermitian_real(H_), p - c);
  } else {
    x = p;
    // Normal flow onto the zero set first.
    for (int k = 0; k < 60; ++k) {
      RealJet j = rho(x);
      double g2 = j.grad.squaredNorm();
      if (g2 < 1e-300) throw Error(Status::singular, "degenerate gradient during projection");
      x -= j.value / g2 * j.grad;
      if (std::abs(j.value) / std::sqrt(g2) < 1e-6 * scale_) break;
    }
  }
  // Newton polish on the Lagrange system.
  RealJet j = rho(x);
  double lam = (x - p).dot(j.grad) / j.grad.squaredNorm();
  for (; it < 60; ++it) {
    j = rho(x);
    RVec F(d + 1);
    F.head(d) = x - p - lam * j.grad;
    F[d] = j.value;
    double gn = j.grad.norm();
    if (F.head(d).norm() < 1e-12 * (1 + scale_) && std::abs(j.value) / gn < 1e-12 * (1 + scale_)) break;
    RMat J = RMat::Zero(d + 1, d + 1);
    J.topLeftCorner(d, d) = RMat::Identity(d, d) - lam * j.hess;
    J.topRightCorner(d, 1) = -j.grad;
    J.bottomLeftCorner(1, d) = j.grad.transpose();
    RVec step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) break;
    double s = 1.0;
    if (kind_ == Kind::callback && step.head(d).norm() > 0.5 * scale_) s = 0.5 * scale_ / step.head(d).norm();
    x += s * step.head(d);
    lam += s * step[d];
  }
  j = rho(x);
  double gn = j.grad.norm();
  if (std::abs(j.value) / gn > 1e-10 * (1 + scale_))
    throw Error(Status::solver_failure, "closest-point projection did not converge");
  Projection pr;
  pr.foot = x;
  pr.normal = j.grad / gn;
  double dist = (p - x).norm();
  pr.signed_distance = rho_value(p) > 0 ? dist : -dist;
  pr.iterations = it;
  return pr;
}

RMat SmoothDomain::signed_distance_hessian(const Projection& pr) const {
  const int d = 2 * n_;
  RealJet j = rho(pr.foot);
  double gn = j.grad.norm();
  RMat P = RMat::Identity(d, d) - pr.normal * pr.normal.transpose();
  RMat S = P * j.hess * P / gn;
  RMat M = RMat::Identity(d, d) + pr.signed_distance * S;
  RMat Hd = S * M.inverse();
  return 0.5 * (Hd + Hd.transpose());
}

RVec SmoothDomain::ray_hit(const RVec& dir) const {
  RVec c = to_real(center_);
  RVec u = dir.normalized();
  if (!inside(c)) throw Error(Status::invalid_argument, "domain center is not inside the domain");
  double lo = 0.0, hi = scale_;
  int guard = 0;
  while (!(rho_value(c + hi * u) > 0)) {
    lo = hi;
    hi *= 2;
    if (++guard > 60) throw Error(Status::singular, "ray does not leave the domain");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (rho_value(c + mid * u) > 0 ? hi : lo) = mid;
  }
  RVec x = c + 0.5 * (lo + hi) * u;
  // Newton polish along the ray.
  for (int it = 0; it < 5; ++it) {
    RealJet j = rho(x);
    double dd = j.grad.dot(u);
    if (std::abs(dd) < 1e-300) break;
    x -= j.value / dd * u;
  }
  return x;
}

std::vector<RVec> sphere_points(int n, int count) {
  std::vector<RVec> pts;
  pts.reserve(std::max(0, count));
  if (n == 2) {
    // Kronecker sequence in Hopf coordinates: |z1|^2 uniform on [0, 1].
    const double phi = 1.2207440845070102;
    const double a1 = 1 / phi, a2 = 1 / (phi * phi), a3 = 1 / (phi * phi * phi);
    for (int k = 0; k < count; ++k) {
      double u1 = std::fmod(0.5 + a1 * k, 1.0), u2 = std::fmod(0.5 + a2 * k, 1.0),
             u3 = std::fmod(0.5 + a3 * k, 1.0);
      double r1 = std::sqrt(u1), r2 = std::sqrt(1 - u1);
      RVec v(4);
      v << r1 * std::cos(2 * M_PI * u2), r1 * std::sin(2 * M_PI * u2), r2 * std::cos(2 * M_PI * u3),
          r2 * std::sin(2 * M_PI * u3);
      pts.push_back(v);
    }
    return pts;
  }
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> nd;
  for (int k = 0; k < count; ++k) {
    RVec v(2 * n);
    for (int i = 0; i < 2 * n; ++i) v[i] = nd(rng);
    pts.push_back(v.normalized());
  }
  return pts;
}

std::vector<BoundarySample> SmoothDomain::sample_boundary(int count) const {
  std::vector<BoundarySample> out;
  for (const auto& dir : sphere_points(n_, count)) {
    BoundarySample s;
    s.x = ray_hit(dir);
    RealJet j = rho(s.x);
    double gn = j.grad.norm();
    if (gn < 1e-6) throw Error(Status::singular, "boundary gradient below 1e-6");
    s.normal = j.grad / gn;
    out.push_back(std::move(s));
  }
  return out;
}

BoundaryGraph SmoothDomain::boundary_graph(const Point& p) const {
  if (p.size() != n_) throw Error(Status::dimension_mismatch, "point dimension mismatch");
  RVec x = to_real(p);
  RealJet j = rho(x);
  double gn = j.grad.norm();
  if (gn < 1e-12) throw Error(Status::singular, "degenerate gradient at boundary point");
  if (std::abs(j.value) / gn > 1e-8 * (1 + scale_))
    throw Error(Status::invalid_argument, "point is not on the boundary");
  CVec drho = complex_gradient(j.grad);
  double a = drho.norm();
  CVec un = -drho.conjugate() / a;
  CMat unm = un;
  Eigen::HouseholderQR<CMat> qr(unm);
  CMat Q = qr.householderQ() * CMat::Identity(n_, n_);
  BoundaryGraph g;
  g.p = p;
  g.frame = CMat(n_, n_);
  g.frame.leftCols(n_ - 1) = Q.rightCols(n_ - 1);
  g.frame.col(n_ - 1) = un;
  CMat Ut = g.frame.leftCols(n_ - 1);
  CMat A = Ut.transpose() * complex_hessian(j.hess) * Ut.conjugate() / (2 * a);
  CMat B = Ut.transpose() * holomorphic_hessian(j.hess) * Ut / (2 * a);
  g.restricted = QuadraticGauge::make(0.5 * (A + A.adjoint()), 0.5 * (B + B.transpose()));
  g.gradient_norm = a;
  return g;
}

double SmoothDomain::inradius(int samples) const {
  RVec c = to_real(center_);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& dir : sphere_points(n_, samples)) best = std::min(best, (ray_hit(dir) - c).norm());
  return best;
}

DomainModulus cconvexity_modulus(const SmoothDomain& dom, int samples) {
  if (samples <= 0) throw Error(Status::invalid_argument, "sample count must be positive");
  DomainModulus out;
  out.modulus = {true, std::numeric_limits<double>::infinity()};
  MetricForm g = MetricForm::identity(dom.n() - 1);
  for (const auto& s : dom.sample_boundary(samples)) {
    BoundaryGraph bg = dom.boundary_graph(from_real(s.x));
    Convexity c = modulus_of_convexity(bg.restricted, g);
    if (c.value < out.modulus.value || (!c.convex && out.modulus.convex)) {
      if (!c.convex || out.modulus.convex) {
        out.modulus = c;
        out.witness = s.x;
      }
    }
  }
  return out;
}

RingDomain::RingDomain(SmoothDomain omega0, SmoothDomain omega1, int samples)
    : omega0_(std::move(omega0)), omega1_(std::move(omega1)), samples_(samples) {
  if (omega0_.n() != omega1_.n()) throw Error(Status::dimension_mismatch, "ring dimension mismatch");
  if (samples_ <= 0) throw Error(Status::invalid_argument, "sample count must be positive");
  s0_ = omega0_.sample_boundary(samples_);
  s1_ = omega1_.sample_boundary(samples_);
  for (const auto& s : s0_)
    if (!omega1_.inside(s.x))
      throw Error(Status::invalid_argument, "inner boundary is not contained in the outer domain");
  const int stride = std::max(1, samples_ / 200);
  double dmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t k = 0; k < s0_.size(); k += stride) {
    const auto& s = s0_[k];
    double d = std::abs(omega1_.project(s.x).signed_distance);
    dmin = std::min(dmin, d);
    // Largest ball centered on the outward normal segment.
    double lo = 0.0, hi = d;
    while (omega1_.inside(s.x + hi * s.normal)) hi *= 1.5;
    for (int it = 0; it < 60; ++it) {
      double mid = 0.5 * (lo + hi);
      (omega1_.inside(s.x + mid * s.normal) ? lo : hi) = mid;
    }
    RVec mid = s.x + 0.5 * lo * s.normal;
    double r = std::min(std::abs(omega0_.project(mid).signed_distance),
                        std::abs(omega1_.project(mid).signed_distance));
    rmax = std::max(rmax, r);
  }
  for (const auto& s : s1_) dmin = std::min(dmin, std::abs(omega0_.project(s.x).signed_distance));
  thickness_ = std::min(dmin, rmax);
  if (!(thickness_ > 0)) throw Error(Status::invalid_argument, "ring has nonpositive thickness");
  for (std::size_t a = 0; a < s1_.size(); ++a)
    for (std::size_t b = a + 1; b < s1_.size(); ++b)
      diameter_ = std::max(diameter_, (s1_[a].x - s1_[b].x).norm());
  for (const auto& s : s0_)
    if (std::abs(omega1_.project(s.x).signed_distance) < 0.5 * thickness_ - 1e-12)
      throw Error(Status::invalid_argument, "inner boundary comes within thickness/2 of the outer one");
}

bool RingDomain::interior(const RVec& x) const {
  return omega0_.rho_value(x) > 0.0 && omega1_.rho_value(x) < 0.0;
}

namespace {
bool round_ball(const SmoothDomain& d) {
  if (d.kind() == SmoothDomain::Kind::callback) return false;
  if (d.center().norm() > 1e-14) return false;
  const CMat& H = d.H();
  double h0 = H(0, 0).real();
  return (H - h0 * CMat::Identity(H.rows(), H.cols())).cwiseAbs().maxCoeff() <= 1e-14 * h0;
}
bool diag_centered(const SmoothDomain& d) {
  if (d.kind() == SmoothDomain::Kind::callback) return false;
  if (d.center().norm() > 1e-14) return false;
  CMat off = d.H();
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() <= 1e-14 && d.H().diagonal().imag().cwiseAbs().maxCoeff() <= 1e-14;
}
}  // namespace

bool RingDomain::is_centered_ball_ring() const { return round_ball(omega0_) && round_ball(omega1_); }
bool RingDomain::is_reinhardt() const { return n() == 2 && diag_centered(omega0_) && diag_centered(omega1_); }

RingDomain deformation_family(const RingDomain& ring, double t, const DeformationOptions& opt) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(Status::invalid_argument, "deformation parameter outside [0,1]");
  const SmoothDomain& o0 = ring.omega0();
  const SmoothDomain& o1 = ring.omega1();
  if (o0.kind() == SmoothDomain::Kind::callback || o1.kind() == SmoothDomain::Kind::callback)
    throw Error(Status::invalid_argument, "deformation requires ball or ellipsoid domains");
  if (t == 1.0) return ring;
  const int n = ring.n();
  Point c = o0.center();
  double R = opt.R ? *opt.R : o0.inradius(opt.samples);
  double r = opt.r ? *opt.r : R / std::exp(1.0);
  if (!(r > 0 && r < R)) throw Error(Status::invalid_argument, "deformation target radii must satisfy 0 < r < R");
  CMat I = CMat::Identity(n, n);
  CMat H0 = t * o0.H() + (1 - t) * I / (r * r);
  CMat H1 = t * o1.H() + (1 - t) * I / (R * R);
  Point c0 = t * o0.center() + (1 - t) * c;
  Point c1 = t * o1.center() + (1 - t) * c;
  auto make = [&](const CMat& H, const Point& cc, double rad) {
    if (t == 0.0) return SmoothDomain::ball(cc, rad);
    return SmoothDomain::ellipsoid(H, cc);
  };
  SmoothDomain e0 = make(H0, c0, r), e1 = make(H1, c1, R);
  for (const auto& s : e0.sample_boundary(opt.samples))
    if (!e1.inside(s.x)) {
      std::ostringstream os;
      os << "nesting violated at t=" << t << " near point (" << s.x.transpose() << ")";
      throw Error(Status::invalid_argument, os.str());
    }
  return RingDomain(e0, e1, ring.sample_count());
}

// ---------------------------------------------------------------------------
// Subsolution

std::string OrderingReport::failures() const {
  std::string s;
  auto add = [&](bool ok, const char* name) {
    if (!ok) s += (s.empty() ? "" : ", ") + std::string(name);
  };
  add(outer_boundary, "outer_boundary (F < 1 on the outer boundary)");
  add(outer_collar, "outer_collar (F > 0 > f1 on the inner edge of the outer collar)");
  add(inner_collar, "inner_collar (F > f0 on the outer edge of the inner collar)");
  add(inner_boundary, "inner_boundary (F < 0 on the inner boundary)");
  return s;
}

namespace {

// Regularized max: (a + b)/2 + h((a - b)/2), h = |.| outside [-delta, delta], quadratic inside.
// Written as a convex combination so tiny Hessians are not lost to cancellation.
RealJet glue(const RealJet& a, const RealJet& b, double delta) {
  double x = 0.5 * (a.value - b.value);
  if (std::abs(x) >= delta) return x > 0 ? a : b;
  double h = x * x / (2 * delta) + delta / 2, h1 = x / delta, h2 = 1.0 / delta;
  double wa = 0.5 * (1 + h1), wb = 0.5 * (1 - h1);
  RVec dg = 0.5 * (a.grad - b.grad);
  RealJet r;
  r.value = 0.5 * (a.value + b.value) + h;
  r.grad = wa * a.grad + wb * b.grad;
  r.hess = wa * a.hess + wb * b.hess + h2 * dg * dg.transpose();
  return r;
}

double min_eig_against(const RMat& hess, const MetricForm& G) {
  CMat H = complex_hessian(hess);
  Eigen::GeneralizedSelfAdjointEigenSolver<CMat> es(H, G.G);
  return es.eigenvalues().minCoeff();
}

}  // namespace

Subsolution::Subsolution(const RingDomain& ring, const MetricForm& G, const SubsolutionOptions& opt)
    : ring_(ring), G_(G), c_(opt.c) {
  if (ring.omega0().kind() == SmoothDomain::Kind::callback)
    throw Error(Status::invalid_argument, "subsolution needs a ball or ellipsoid inner domain");
  if (!(c_ > 0 && c_ < 1)) throw Error(Status::invalid_argument, "gluing constant must lie in (0,1)");
  if (G.dim() != ring.n()) throw Error(Status::dimension_mismatch, "metric dimension mismatch");
  const double th = ring.thickness();
  collar0_ = opt.collar0 ? *opt.collar0 : 0.3 * th;
  collar1_ = opt.collar1 ? *opt.collar1 : 0.3 * th;
  delta_h_ = 0.0;  // exact max while checking the ordering

  double gap = std::numeric_limits<double>::infinity();
  for (const auto& s : ring.samples1()) {
    double Fv = F(s.x).value;
    if (!(Fv < 1.0)) ordering_.outer_boundary = false;
    gap = std::min(gap, std::abs(1.0 - Fv));
    RVec y = s.x - collar1_ * s.normal;
    Projection pr = ring.omega1().project(y);
    double Fy = F(y).value, fy = f1(y, pr).value;
    if (!(Fy > 0.0 && fy < 0.0)) ordering_.outer_collar = false;
    gap = std::min(gap, std::abs(Fy - fy));
  }
  for (const auto& s : ring.samples0()) {
    double Fv = F(s.x).value;
    if (!(Fv < 0.0)) ordering_.inner_boundary = false;
    gap = std::min(gap, std::abs(Fv));
    RVec y = s.x + collar0_ * s.normal;
    Projection pr = ring.omega0().project(y);
    double Fy = F(y).value, fy = f0(y, pr).value;
    if (!(Fy > fy)) ordering_.inner_collar = false;
    gap = std::min(gap, std::abs(Fy - fy));
  }
  ordering_.min_gap = gap;
  if (!ordering_.ok())
    throw Error(Status::invalid_argument, "subsolution ordering violated: " + ordering_.failures());

  delta_h_ = std::min(opt.delta_h ? *opt.delta_h : 0.05 * th, 0.25 * gap);

  // Plurisubharmonicity margin over boundary samples, collar edges and random interior points.
  double lam = std::numeric_limits<double>::infinity();
  RVec worst;
  auto note = [&](const RVec& x, double v) {
    if (v < lam) lam = v, worst = x;
  };
  auto probe = [&](const RVec& x) { note(x, min_eig_against(eval(x).hess, G_)); };
  err0_ = err1_ = 0.0;
  min_dn0_ = std::numeric_limits<double>::infinity();
  for (const auto& s : ring.samples0()) {
    RealJet j = eval(s.x);
    err0_ = std::max(err0_, std::abs(j.value));
    // Normal derivative in the complex-gradient normalization: half the Euclidean one.
    min_dn0_ = std::min(min_dn0_, 0.5 * j.grad.dot(s.normal));
    note(s.x, min_eig_against(j.hess, G_));
    probe(s.x + collar0_ * s.normal);
  }
  for (const auto& s : ring.samples1()) {
    RealJet j = eval(s.x);
    err1_ = std::max(err1_, std::abs(j.value - 1.0));
    note(s.x, min_eig_against(j.hess, G_));
    probe(s.x - collar1_ * s.normal);
  }
  std::mt19937_64 rng(opt.seed);
  RVec c1 = to_real(ring.omega1().center());
  double rad = 0.0;
  for (const auto& s : ring.samples1()) rad = std::max(rad, (s.x - c1).norm());
  std::uniform_real_distribution<double> ud(-rad, rad);
  int got = 0, tries = 0;
  while (got < opt.samples && tries < 200 * opt.samples) {
    ++tries;
    RVec x(2 * ring.n());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = c1[i] + ud(rng);
    if (!ring.interior(x)) continue;
    probe(x);
    ++got;
  }
  if (err0_ > 1e-6 || err1_ > 1e-6)
    throw Error(Status::invalid_argument, "subsolution misses the boundary data beyond 1e-6");
  if (!(lam > 0)) {
    std::ostringstream os;
    os << "subsolution is not strictly plurisubharmonic at samples (min eigenvalue " << lam << " at "
       << worst.transpose() << ")";
    throw Error(Status::nonconvex, os.str());
  }
  sigma_ = 0.5 * lam;
}

RealJet Subsolution::F(const RVec& x) const {
  const SmoothDomain& o0 = ring_.omega0();
  RVec v = x - to_real(o0.center());
  RMat M = hermitian_real(o0.H());
  double q = v.dot(M * v);
  RVec gq = 2.0 * M * v;
  RMat hq = 2.0 * M;
  const int d = static_cast<int>(x.size());
  RealJet j;
  double V = 0.5 * std::log(q);
  RVec gV = gq / (2 * q);
  RMat hV = hq / (2 * q) - gq * gq.transpose() / (2 * q * q);
  j.value = c_ * (V - c_ + c_ * c_ * x.squaredNorm());
  j.grad = c_ * (gV + 2 * c_ * c_ * x);
  j.hess = c_ * (hV + 2 * c_ * c_ * RMat::Identity(d, d));
  return j;
}

RealJet Subsolution::f1(const RVec& x, const Projection& pr) const {
  double dist = -pr.signed_distance;
  RVec gd = -pr.normal;
  RMat hd = -ring_.omega1().signed_distance_hessian(pr);
  double e = std::exp(-dist / c_);
  double v = (e - 1) / c_ + 1, d1 = -e / (c_ * c_), d2 = e / (c_ * c_ * c_);
  return RealJet{v, d1 * gd, d2 * gd * gd.transpose() + d1 * hd};
}

RealJet Subsolution::f0(const RVec& x, const Projection& pr) const {
  double dist = pr.signed_distance;
  RVec gd = pr.normal;
  RMat hd = ring_.omega0().signed_distance_hessian(pr);
  double k = -1.0 / (c_ * c_);
  double e = std::exp(dist / c_ + k);
  double v = e - std::exp(k), d1 = e / c_, d2 = e / (c_ * c_);
  return RealJet{v, d1 * gd, d2 * gd * gd.transpose() + d1 * hd};
}

RealJet Subsolution::eval(const RVec& x) const {
  RealJet Fx = F(x);
  Projection p0 = ring_.omega0().project(x);
  if (p0.signed_distance < collar0_) {
    RealJet f = f0(x, p0);
    return delta_h_ > 0 ? glue(Fx, f, delta_h_) : (Fx.value >= f.value ? Fx : f);
  }
  Projection p1 = ring_.omega1().project(x);
  if (-p1.signed_distance < collar1_) {
    RealJet f = f1(x, p1);
    return delta_h_ > 0 ? glue(Fx, f, delta_h_) : (Fx.value >= f.value ? Fx : f);
  }
  return Fx;
}

}  // namespace cmlab
