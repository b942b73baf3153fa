#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmlab/solver.hpp"

namespace cmlab {

namespace {

// Integral of q = f' / eps over [log r, log R] for q' = 4 w q / (q - 2 (n - 1) w), w = e^{2s},
// started at q(log r) = q0; +inf when q reaches the singular curve.
double scaled_slope_integral(int n, double r, double R, double q0) {
  const int steps = 4000;
  const double s0 = std::log(r), h = std::log(R / r) / steps;
  auto rhs = [&](double s, double q) {
    double w = std::exp(2 * s), den = q - 2 * (n - 1) * w;
    return den > 0 ? 4 * w * q / den : std::numeric_limits<double>::quiet_NaN();
  };
  double q = q0, I = 0.0;
  for (int k = 0; k < steps; ++k) {
    double s = s0 + k * h;
    double k1 = rhs(s, q), k2 = rhs(s + h / 2, q + h / 2 * k1), k3 = rhs(s + h / 2, q + h / 2 * k2),
           k4 = rhs(s + h, q + h * k3);
    double qn = q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if (!std::isfinite(qn) || qn <= 2 * (n - 1) * std::exp(2 * (s + h))) return std::numeric_limits<double>::infinity();
    I += h / 6 * (q + 2 * (q + h / 2 * k1) + 2 * (q + h / 2 * k2) + qn);
    q = qn;
  }
  return I;
}

}  // namespace

double radial_eps_limit(int n, double r, double R) {
  if (n < 2 || !(r > 0 && R > r)) throw Error(Status::invalid_argument, "radial problem needs n >= 2, 0 < r < R");
  // Increasing convex profiles solve f'' = 4 eps w f' / (f' - 2 (n - 1) eps w). The equation is
  // invariant under f' -> eps q, so solutions with f(log R) - f(log r) = 1 exist iff
  // eps < 1 / min over q0 of the scaled integral.
  const double qs = 2 * (n - 1) * r * r;
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int k = 0; k <= 120; ++k) {
    double q0 = qs * (1 + std::pow(10.0, -8 + 10.0 * k / 120));
    double I = scaled_slope_integral(n, r, R, q0);
    if (I < best) best = I, arg = k;
  }
  // golden-section refinement in the log-offset variable
  auto at = [&](double u) { return scaled_slope_integral(n, r, R, qs * (1 + std::pow(10.0, u))); };
  double a = -8 + 10.0 * (arg - 1) / 120, b = -8 + 10.0 * (arg + 1) / 120;
  const double gr = 0.5 * (std::sqrt(5.0) - 1);
  double c = b - gr * (b - a), d = a + gr * (b - a), fc = at(c), fd = at(d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d, d = c, fd = fc, c = b - gr * (b - a), fc = at(c);
    } else {
      a = c, c = d, fc = fd, d = a + gr * (b - a), fd = at(d);
    }
  }
  best = std::min({best, fc, fd});
  return 1.0 / best;
}

namespace {

struct RadialSystem {
  int n, N;
  double r, R, h, eps;
  std::vector<double> w;  // e^{2 s_k}

  RadialSystem(int n_, int N_, double r_, double R_, double eps_) : n(n_), N(N_), r(r_), R(R_), eps(eps_) {
    h = std::log(R / r) / (N - 1);
    w.resize(N);
    for (int k = 0; k < N; ++k) w[k] = std::exp(2 * (std::log(r) + k * h));
  }

  // Scaled residual eps tr - 1 at interior node k; false when f' or f'' is not positive.
  bool residual(const std::vector<double>& f, int k, double& F, double* dm, double* d0, double* dp,
                double floor) const {
    double d1 = (f[k + 1] - f[k - 1]) / (2 * h), d2 = (f[k + 1] - 2 * f[k] + f[k - 1]) / (h * h);
    double a = 4 * eps * w[k], b = 2 * (n - 1) * eps * w[k];
    // Eigenvalues of the complex Hessian: d2 / (4|z|^2) and d1 / (2|z|^2).
    if (!(d1 / (2 * w[k]) > floor) || !(d2 / (4 * w[k]) > floor)) return false;
    F = a / d2 + b / d1 - 1.0;
    if (dm) {
      double A = a / (d2 * d2), B = b / (d1 * d1);
      *dm = -A / (h * h) + B / (2 * h);
      *d0 = 2 * A / (h * h);
      *dp = -A / (h * h) - B / (2 * h);
    }
    return true;
  }

  bool residuals(const std::vector<double>& f, std::vector<double>& F, double floor) const {
    F.assign(N, 0.0);
    for (int k = 1; k < N - 1; ++k)
      if (!residual(f, k, F[k], nullptr, nullptr, nullptr, floor)) return false;
    return true;
  }
};

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Thomas algorithm for the interior unknowns 1..N-2.
std::vector<double> tridiagonal(std::vector<double> lo, std::vector<double> di, std::vector<double> up,
                                std::vector<double> rhs) {
  const std::size_t m = di.size();
  for (std::size_t i = 1; i < m; ++i) {
    double c = lo[i] / di[i - 1];
    di[i] -= c * up[i - 1];
    rhs[i] -= c * rhs[i - 1];
  }
  std::vector<double> x(m);
  x[m - 1] = rhs[m - 1] / di[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
  return x;
}

struct NewtonOutcome {
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
  std::string message;
};

NewtonOutcome radial_newton(const RadialSystem& sys, std::vector<double>& f, const SolveConfig& cfg) {
  const int N = sys.N, m = N - 2;
  const double tol = cfg.residual_tol * sys.eps;  // scaled form
  const double floor = cfg.psd_floor;
  NewtonOutcome out;
  std::vector<double> F;
  if (!sys.residuals(f, F, floor)) {
    out.message = "initial profile is not increasing and convex";
    return out;
  }
  double res = inf_norm(F);
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res <= 0.01 * tol) {
      out.ok = true;
      out.residual = res;
      out.iterations = it;
      return out;
    }
    std::vector<double> lo(m), di(m), up(m), rhs(m);
    for (int k = 1; k < N - 1; ++k) {
      double Fk = 0, a = 0, b = 0, c = 0;
      sys.residual(f, k, Fk, &a, &b, &c, floor);
      lo[k - 1] = a;
      di[k - 1] = b;
      up[k - 1] = c;
      rhs[k - 1] = -Fk;
    }
    std::vector<double> step = tridiagonal(lo, di, up, rhs);
    // Step guard: shrink until the profile stays increasing and convex with a smaller residual.
    double lam = cfg.damping;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      std::vector<double> g = f;
      for (int k = 1; k < N - 1; ++k) g[k] += lam * step[k - 1];
      std::vector<double> G;
      if (sys.residuals(g, G, floor)) {
        double r2 = inf_norm(G);
        if (r2 < res || ls == 39) {
          f = std::move(g);
          res = r2;
          accepted = true;
          break;
        }
      }
      lam *= 0.5;
    }
    out.iterations = it + 1;
    if (!accepted && res <= tol) {
      out.ok = true;
      out.residual = res;
      return out;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "step guard rejected every step at iteration " << it + 1 << " (profile would lose monotonicity or convexity)";
      out.message = os.str();
      out.residual = res;
      return out;
    }
  }
  out.residual = res;
  out.ok = res <= tol;
  if (!out.ok) out.message = "no convergence within max_iters";
  return out;
}

std::vector<double> quadratic_profile(const RadialSystem& sys) {
  std::vector<double> f(sys.N);
  for (int k = 0; k < sys.N; ++k) f[k] = (sys.w[k] - sys.r * sys.r) / (sys.R * sys.R - sys.r * sys.r);
  f.front() = 0.0;
  f.back() = 1.0;
  return f;
}

}  // namespace

SolveReport solve_radial(int n, double r, double R, const SolveConfig& cfg, const std::vector<double>* warm) {
  cfg.validate();
  const double limit = radial_eps_limit(n, r, R);
  const int N = cfg.resolution;
  for (double e : cfg.schedule())
    if (!(e < limit)) {
      std::ostringstream os;
      os << "eps=" << e << " has no increasing convex radial solution: requires eps < " << limit;
      throw Error(Status::invalid_argument, os.str());
    }
  if (warm && static_cast<int>(warm->size()) != N) throw Error(Status::invalid_argument, "warm start size mismatch");

  SolveReport rep;
  std::vector<double> f;
  double current = 0.0;  // eps at which f is a solution, 0 when unknown
  if (warm) {
    f = *warm;
  } else {
    // The quadratic profile solves the continuous problem at eps_q; start the path there.
    double eps_q = 1.0 / (n * (R * R - r * r));
    RadialSystem sys(n, N, r, R, eps_q);
    f = quadratic_profile(sys);
    SolveConfig c = cfg;
    NewtonOutcome o = radial_newton(sys, f, c);
    if (!o.ok) throw Error(Status::solver_failure, "radial start at the quadratic profile failed: " + o.message);
    rep.iterations += o.iterations;
    current = eps_q;
  }

  for (double target : cfg.schedule()) {
    StageTrace tr;
    tr.eps = target;
    std::vector<double> before = f;
    if (current > 0) {
      // Geometric path from the current eps with adaptive steps.
      double e = current, ratio = 2.0;
      while (e != target) {
        double next = target < e ? std::max(target, e / ratio) : std::min(target, e * ratio);
        std::vector<double> g = f;
        RadialSystem sys(n, N, r, R, next);
        NewtonOutcome o = radial_newton(sys, g, cfg);
        tr.iterations += o.iterations;
        if (o.ok) {
          f = std::move(g);
          e = next;
        } else {
          ratio = std::sqrt(ratio);
          if (ratio < 1 + 1e-6) {
            rep.message = "continuation stalled at eps=" + std::to_string(e) + ": " + o.message;
            break;
          }
        }
      }
      if (e != target) {
        rep.eps_trace.push_back(tr);
        break;
      }
    } else {
      RadialSystem sys(n, N, r, R, target);
      NewtonOutcome o = radial_newton(sys, f, cfg);
      tr.iterations += o.iterations;
      if (!o.ok) {
        rep.message = o.message;
        rep.eps_trace.push_back(tr);
        break;
      }
    }
    current = target;
    RadialSystem sys(n, N, r, R, target);
    std::vector<double> F;
    sys.residuals(f, F, cfg.psd_floor);
    tr.residual_inf = inf_norm(F) / target;
    for (int k = 0; k < N; ++k) tr.increment = std::max(tr.increment, std::abs(f[k] - before[k]));
    if (rep.eps_trace.empty() && !warm) tr.increment = 0.0;
    rep.iterations += tr.iterations;
    rep.eps_trace.push_back(tr);
  }

  rep.eps = cfg.eps;
  auto field = std::make_shared<RadialField>(n, r, R, f);
  field->set_eps(cfg.eps);
  rep.field = field;
  rep.converged = current == cfg.eps;

  // Residuals and Hessian margin from the field's own node derivatives.
  rep.psd_margin = std::numeric_limits<double>::infinity();
  std::vector<double> per(N, std::numeric_limits<double>::quiet_NaN());
  double worst = 0.0;
  for (int k = 1; k < N - 1; ++k) {
    auto d = field->node_derivs(k);
    double w = std::exp(2 * field->s(k));
    double lmin = std::min(d[1] / (2 * w), d[2] / (4 * w));
    rep.psd_margin = std::min(rep.psd_margin, lmin);
    per[k] = lmin > 0 ? w * (4 / d[2] + 2 * (n - 1) / d[1]) - 1.0 / cfg.eps
                      : std::numeric_limits<double>::infinity();
    worst = std::max(worst, std::abs(per[k]));
  }
  rep.residual_inf = worst;
  // node_values() lists each direction's radial nodes in turn.
  auto nv = field->node_values();
  rep.node_residuals.resize(nv.size());
  for (std::size_t k = 0; k < nv.size(); ++k) rep.node_residuals[k] = per[k % N];
  if (rep.converged && !(rep.residual_inf <= cfg.residual_tol)) {
    rep.converged = false;
    rep.message = "final residual above tolerance";
  }
  if (rep.converged) rep.message = "ok";
  return rep;
}

}  // namespace cmlab
