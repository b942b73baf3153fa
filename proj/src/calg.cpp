#include "cmlab/calg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace cmlab {

const char* status_name(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::invalid_argument: return "invalid_argument";
    case Status::dimension_mismatch: return "dimension_mismatch";
    case Status::not_positive_definite: return "not_positive_definite";
    case Status::nonconvex: return "nonconvex";
    case Status::singular: return "singular";
    case Status::solver_failure: return "solver_failure";
    case Status::out_of_support: return "out_of_support";
    case Status::io_error: return "io_error";
    case Status::format_error: return "format_error";
  }
  return "unknown";
}

RVec to_real(const Point& z) {
  RVec v(2 * z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    v[2 * i] = z[i].real();
    v[2 * i + 1] = z[i].imag();
  }
  return v;
}

Point from_real(const RVec& v) {
  Point z(v.size() / 2);
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = cplx(v[2 * i], v[2 * i + 1]);
  return z;
}

namespace {

std::atomic<bool> g_takagi_fault{false};

double max_abs(const CMat& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

void require_square(const CMat& M, const char* what) {
  if (M.rows() != M.cols())
    throw Error(Status::dimension_mismatch, std::string(what) + " must be square");
}

}  // namespace

QuadraticGauge QuadraticGauge::make(const CMat& A, const CMat& B, const CVec& L) {
  require_square(A, "A");
  require_square(B, "B");
  if (A.rows() != B.rows() || A.rows() == 0)
    throw Error(Status::dimension_mismatch, "A and B must have equal positive dimension");
  if (L.size() != 0 && L.size() != A.rows())
    throw Error(Status::dimension_mismatch, "L has wrong length");
  double sa = std::max(1.0, max_abs(A)), sb = std::max(1.0, max_abs(B));
  if (max_abs(A - A.adjoint()) > 1e-12 * sa)
    throw Error(Status::invalid_argument, "A is not Hermitian");
  if (max_abs(B - B.transpose()) > 1e-12 * sb)
    throw Error(Status::invalid_argument, "B is not symmetric");
  QuadraticGauge q;
  q.A = 0.5 * (A + A.adjoint());
  q.B = 0.5 * (B + B.transpose());
  q.L = L.size() ? L : CVec::Zero(A.rows());
  return q;
}

double QuadraticGauge::eval(const CVec& z) const {
  cplx h = z.transpose() * A * z.conjugate();
  cplx s = z.transpose() * B * z;
  cplx l = L.transpose() * z;
  return h.real() + s.real() + l.real();
}

MetricForm MetricForm::make(const CMat& G) {
  require_square(G, "G");
  if (G.rows() == 0) throw Error(Status::dimension_mismatch, "empty metric");
  double s = std::max(1.0, max_abs(G));
  if (max_abs(G - G.adjoint()) > 1e-12 * s)
    throw Error(Status::invalid_argument, "metric is not Hermitian");
  MetricForm g;
  g.G = 0.5 * (G + G.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> es(g.G / max_abs(g.G));
  if (es.eigenvalues().minCoeff() <= 1e-14)
    throw Error(Status::not_positive_definite, "metric is not positive definite");
  g.Ginv = g.G.inverse();
  g.Ginv = 0.5 * (g.Ginv + g.Ginv.adjoint());
  if (max_abs(g.G * g.Ginv - CMat::Identity(G.rows(), G.rows())) > 1e-10)
    throw Error(Status::singular, "metric inverse is inaccurate");
  return g;
}

MetricForm MetricForm::identity(int m) { return make(CMat::Identity(m, m)); }

CMat MetricForm::chol() const { return Eigen::LLT<CMat>(G).matrixL(); }

RMat real_form_hermitian(const CMat& A) {
  const auto m = A.rows();
  RMat M(2 * m, 2 * m);
  RMat Ar = A.real(), Ai = A.imag();
  M << Ar, Ai, -Ai, Ar;
  return 0.5 * (M + M.transpose());
}

RMat real_form_symmetric(const CMat& B) {
  const auto m = B.rows();
  RMat M(2 * m, 2 * m);
  RMat Br = B.real(), Bi = B.imag();
  M << Br, -Bi, -Bi, -Br;
  return 0.5 * (M + M.transpose());
}

Convexity modulus_of_convexity(const QuadraticGauge& q, const MetricForm& g) {
  if (q.dim() != g.dim()) throw Error(Status::dimension_mismatch, "gauge/metric dimension mismatch");
  RMat P = real_form_hermitian(q.A) + real_form_symmetric(q.B);
  RMat Mg = real_form_hermitian(g.G);
  double sp = P.cwiseAbs().maxCoeff(), sg = Mg.cwiseAbs().maxCoeff();
  if (sp == 0.0) return {false, 0.0};
  Eigen::GeneralizedSelfAdjointEigenSolver<RMat> es(P / sp, Mg / sg);
  if (es.info() != Eigen::Success)
    throw Error(Status::not_positive_definite, "generalized eigenproblem failed");
  double lam = es.eigenvalues().minCoeff();
  if (std::abs(lam) <= 1e-13) lam = 0.0;
  double val = lam * sp / sg;
  return {val > 0.0, val};
}

Takagi takagi(const CMat& B) {
  require_square(B, "B");
  const auto m = B.rows();
  double sb = std::max(1.0, max_abs(B));
  if (max_abs(B - B.transpose()) > 1e-10 * sb)
    throw Error(Status::invalid_argument, "takagi requires a symmetric matrix");
  Takagi t;
  t.U = CMat::Identity(m, m);
  t.D = RVec::Zero(m);
  double s = max_abs(B);
  if (s == 0.0) return t;
  CMat Bs = 0.5 * (B + B.transpose()) / s;
  // B conj(u) = d u  <=>  [[Br, Bi], [Bi, -Br]] (a; b) = d (a; b) with u = a + i b.
  RMat M(2 * m, 2 * m);
  RMat Br = Bs.real(), Bi = Bs.imag();
  M << Br, Bi, Bi, -Br;
  Eigen::SelfAdjointEigenSolver<RMat> es(M);
  const double tol = 1e-13;
  CMat cols(m, 0);
  std::vector<double> ds;
  for (Eigen::Index k = 2 * m - 1; k >= 0 && static_cast<Eigen::Index>(ds.size()) < m; --k) {
    double d = es.eigenvalues()[k];
    if (d <= tol) break;
    RVec v = es.eigenvectors().col(k);
    CVec u(m);
    for (Eigen::Index i = 0; i < m; ++i) u[i] = cplx(v[i], v[m + i]);
    u.normalize();
    cols.conservativeResize(m, cols.cols() + 1);
    cols.col(cols.cols() - 1) = u;
    ds.push_back(d * s);
  }
  const Eigen::Index r = cols.cols();
  if (r < m) {
    // Complete with an orthonormal basis of the complement, which B annihilates.
    CMat basis(m, m);
    basis.leftCols(r) = cols;
    basis.rightCols(m - r) = CMat::Identity(m, m - r);
    if (r > 0) {
      Eigen::HouseholderQR<CMat> qr(cols);
      CMat Q = qr.householderQ() * CMat::Identity(m, m);
      basis.rightCols(m - r) = Q.rightCols(m - r);
    }
    cols = basis;
  }
  t.U = cols;
  for (Eigen::Index k = 0; k < r; ++k) t.D[k] = ds[k];
  if (g_takagi_fault.load()) t.U = t.U.conjugate().eval();
  return t;
}

void set_takagi_fault(bool on) { g_takagi_fault.store(on); }
bool takagi_fault() { return g_takagi_fault.load(); }

KappaSpectrum kappa(const CMat& A, const CMat& B) {
  require_square(A, "A");
  require_square(B, "B");
  if (A.rows() != B.rows()) throw Error(Status::dimension_mismatch, "A and B dimension mismatch");
  const auto m = A.rows();
  double sa = max_abs(A);
  if (sa == 0.0) throw Error(Status::not_positive_definite, "A is zero");
  Eigen::LLT<CMat> llt(0.5 * (A + A.adjoint()) / sa);
  if (llt.info() != Eigen::Success)
    throw Error(Status::not_positive_definite, "A is not positive definite");
  CMat Ainv = llt.solve(CMat::Identity(m, m)) / sa;
  KappaSpectrum ks;
  ks.K = B * Ainv.conjugate() * B.conjugate() * Ainv;
  Eigen::ComplexEigenSolver<CMat> es(ks.K);
  for (Eigen::Index i = 0; i < m; ++i) {
    ks.eigenvalues.push_back(es.eigenvalues()[i].real());
    ks.max_imag = std::max(ks.max_imag, std::abs(es.eigenvalues()[i].imag()));
  }
  std::sort(ks.eigenvalues.begin(), ks.eigenvalues.end(), std::greater<>());
  if (ks.max_eig() < 1.0) {
    CMat IK = CMat::Identity(m, m) - ks.K;
    ks.sigma = IK.inverse().trace().real();
  }
  return ks;
}

double weighted_norm(const CMat& W, const MetricForm& g) {
  CMat M = W * g.Ginv.conjugate() * W.conjugate() * g.Ginv;
  Eigen::ComplexEigenSolver<CMat> es(M);
  double top = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i) top = std::max(top, es.eigenvalues()[i].real());
  return std::sqrt(std::max(0.0, top));
}

namespace {

// Positive definiteness via Cholesky, kept separate from the eigen path.
bool strongly_convex_llt(const RMat& M) {
  double s = M.cwiseAbs().maxCoeff();
  if (s == 0.0) return false;
  Eigen::LLT<RMat> llt(M / s);
  if (llt.info() != Eigen::Success) return false;
  RMat L = llt.matrixL();
  return L.diagonal().minCoeff() > 1e-9;
}

double form_value(const CMat& A, const CMat& B, const CVec& w) {
  cplx h = w.transpose() * A * w.conjugate();
  cplx s = w.transpose() * B * w;
  return h.real() + s.real();
}

}  // namespace

double degree_of_convexity(const QuadraticGauge& q, const MetricForm& g, const DegreeOptions& opt) {
  if (q.dim() != g.dim()) throw Error(Status::dimension_mismatch, "gauge/metric dimension mismatch");
  const int m = q.dim();
  // g-orthonormal coordinates w = L^T z.
  CMat L = g.chol();
  CMat Li = L.inverse();
  CMat A = Li * q.A * Li.adjoint();
  CMat B = Li * q.B * Li.transpose();
  A = 0.5 * (A + A.adjoint()).eval();
  B = 0.5 * (B + B.transpose()).eval();
  RMat P = real_form_hermitian(A) + real_form_symmetric(B);
  if (!strongly_convex_llt(P))
    throw Error(Status::nonconvex, "degree of convexity requires a strongly convex gauge");

  // Adversarial directions: for unit w the worst symmetric W of unit size is
  // conj(w) conj(w)^T, which lowers P(w) by exactly one unit.
  std::vector<CVec> dirs;
  Takagi tk = takagi(B);
  for (int k = 0; k < m; ++k) {
    CVec u = tk.U.col(k);
    for (int j = 0; j < 8; ++j) dirs.push_back(std::polar(1.0, M_PI * j / 8.0) * u.conjugate());
  }
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> nd;
  auto random_unit = [&]() {
    CVec w(m);
    for (int i = 0; i < m; ++i) w[i] = cplx(nd(rng), nd(rng));
    return CVec(w.normalized());
  };
  CVec best = dirs.front();
  double bestv = form_value(A, B, best);
  for (const auto& w : dirs) {
    double v = form_value(A, B, w);
    if (v < bestv) bestv = v, best = w;
  }
  for (int i = 0; i < opt.random_directions; ++i) {
    CVec w = random_unit();
    dirs.push_back(w);
    double v = form_value(A, B, w);
    if (v < bestv) bestv = v, best = w;
  }
  double step = 0.5;
  for (int it = 0; it < opt.refine_steps; ++it) {
    CVec w = (best + step * random_unit()).normalized();
    double v = form_value(A, B, w);
    if (v < bestv) {
      bestv = v, best = w;
      step = std::min(1.0, step * 1.5);
    } else {
      step *= 0.97;
    }
  }
  // Projected gradient descent on the unit sphere; the steepest ascent of P is 2 (A^T w + conj(B) conj(w)).
  {
    double lip = 2.0 * (A.norm() + B.norm());
    CVec w = best;
    for (int it = 0; it < opt.polish_steps; ++it) {
      CVec gr = 2.0 * (A.transpose() * w + B.conjugate() * w.conjugate());
      CVec next = (w - gr / lip).normalized();
      w = next;
    }
    double v = form_value(A, B, w);
    if (v < bestv) bestv = v, best = w;
  }
  dirs.push_back(best);

  std::vector<CMat> adversaries;
  for (const auto& w : dirs) adversaries.push_back(w.conjugate() * w.conjugate().transpose());

  auto survives = [&](double delta) {
    for (const auto& W : adversaries) {
      RMat M = real_form_hermitian(A) + real_form_symmetric(B - delta * W);
      if (!strongly_convex_llt(M)) return false;
    }
    return true;
  };
  double lo = 0.0, hi = P.cwiseAbs().rowwise().sum().maxCoeff() + 1.0;
  for (int it = 0; it < opt.bisection_steps; ++it) {
    double mid = 0.5 * (lo + hi);
    (survives(mid) ? lo : hi) = mid;
  }
  return lo;
}

double default_robustness_constant(const RobustnessContext& ctx) {
  if (ctx.c2_norm <= 0 || ctx.thickness <= 0 || ctx.cn <= 0)
    throw Error(Status::invalid_argument, "robustness context constants must be positive");
  return 200.0 * ctx.c2_norm * std::max(1.0, ctx.cn / ctx.thickness);
}

double modulus_to_robustness(double m, const RobustnessContext& ctx) {
  if (m < 0) throw Error(Status::invalid_argument, "modulus must be nonnegative");
  double C = ctx.C ? *ctx.C : default_robustness_constant(ctx);
  if (C <= 0) throw Error(Status::invalid_argument, "constant C must be positive");
  return m * m / C;
}

double robustness_to_modulus(double rho, const RobustnessContext& ctx) {
  if (rho < 0) throw Error(Status::invalid_argument, "robustness must be nonnegative");
  if (ctx.diameter <= 0) throw Error(Status::invalid_argument, "diameter must be positive");
  return rho * std::min(1.0, 1.0 / (4.0 * ctx.diameter));
}

double boundary_qc_bound(double mu_domain, double normal_derivative) {
  return std::min(1.0, std::sqrt(2.0) * mu_domain) * normal_derivative;
}

double levelset_modulus_bound(double qc_modulus, double max_gradient) {
  if (max_gradient <= 0) throw Error(Status::invalid_argument, "max gradient must be positive");
  return qc_modulus / max_gradient;
}

}  // namespace cmlab
