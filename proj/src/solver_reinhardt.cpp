#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "cmlab/solver.hpp"

namespace cmlab {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct NodeEval {
  bool pd = false;
  double F = 0.0;      // eps tr - 1
  double lmin = 0.0;   // smallest eigenvalue of the complex Hessian
  Eigen::Matrix<double, 5, 1> dF;  // d F / d (ux, uy, uxx, uxy, uyy)
};

class ReinhardtProblem {
 public:
  ReinhardtProblem(const ReinhardtGrid& grid, double g1, double g2, double eps, double floor)
      : grid_(grid), g1_(g1), g2_(g2), eps_(eps), floor_(floor) {
    nt_ = grid.nt();
    nq_ = grid.nq();
  }

  int unknowns() const { return (nt_ - 2) * nq_; }
  int node(int unknown) const { return unknown + nq_; }
  int unknown(int node) const {
    int i = node / nq_;
    return (i == 0 || i == nt_ - 1) ? -1 : node - nq_;
  }

  NodeEval eval(const std::vector<double>& U, int i, int j, bool jac) const {
    auto d = grid_.derivs(U, i, j);
    auto xy = grid_.xy(i, j);
    double x = xy[0], y = xy[1];
    double ux = d[1], uy = d[2], uxx = d[3], uxy = d[4], uyy = d[5];
    double H11 = ux + x * uxx, H22 = uy + y * uyy, H12 = std::sqrt(x * y) * uxy;
    double D = H11 * H22 - H12 * H12;
    double tr = 0.5 * (H11 + H22), disc = std::sqrt(0.25 * (H11 - H22) * (H11 - H22) + H12 * H12);
    NodeEval e;
    e.lmin = tr - disc;
    if (!(e.lmin > floor_)) return e;
    e.pd = true;
    double T = g1_ * H22 + g2_ * H11;
    e.F = eps_ * T / D - 1.0;
    if (jac) {
      double D2 = D * D;
      double c11 = eps_ * (g2_ * D - T * H22) / D2;
      double c22 = eps_ * (g1_ * D - T * H11) / D2;
      double cxy = eps_ * T * 2 * x * y * uxy / D2;
      e.dF << c11, c22, x * c11, cxy, y * c22;
    }
    return e;
  }

  // Residual vector over unknown nodes; false when some node leaves the positive cone.
  bool residual(const std::vector<double>& U, Eigen::VectorXd& F, double* lmin = nullptr) const {
    F.resize(unknowns());
    double lm = std::numeric_limits<double>::infinity();
    for (int i = 1; i < nt_ - 1; ++i)
      for (int j = 0; j < nq_; ++j) {
        NodeEval e = eval(U, i, j, false);
        if (!e.pd) return false;
        F[(i - 1) * nq_ + j] = e.F;
        lm = std::min(lm, e.lmin);
      }
    if (lmin) *lmin = lm;
    return true;
  }

  SpMat jacobian(const std::vector<double>& U) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(unknowns()) * 30);
    for (int i = 1; i < nt_ - 1; ++i)
      for (int j = 0; j < nq_; ++j) {
        NodeEval e = eval(U, i, j, true);
        const int row = (i - 1) * nq_ + j;
        const auto& st = grid_.stencil(i, j);
        Eigen::Matrix<double, 1, 5> w = e.dF.transpose() * st.C;
        for (int m = 0; m < 5; ++m)
          for (auto [k, wt] : st.rows[m]) {
            int col = unknown(k);
            if (col >= 0) trips.emplace_back(row, col, w[m] * wt);
          }
      }
    SpMat J(unknowns(), unknowns());
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  }

 private:
  const ReinhardtGrid& grid_;
  double g1_, g2_, eps_, floor_;
  int nt_, nq_;
};

bool linear_solve(const SpMat& J, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  {
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-5);
    it.preconditioner().setFillfactor(20);
    it.setTolerance(1e-10);
    it.setMaxIterations(400);
    it.compute(J);
    if (it.info() == Eigen::Success) {
      x = it.solve(b);
      if (it.info() == Eigen::Success && x.allFinite()) return true;
    }
  }
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(J);
  lu.factorize(J);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(b);
  return lu.info() == Eigen::Success && x.allFinite();
}

struct Newton {
  bool ok = false;
  int iterations = 0;
  double residual = 0.0;
  std::string message;
};

// Solves F(U) = shift with a step guard that keeps every node in the positive cone.
Newton newton(const ReinhardtProblem& P, std::vector<double>& U, const Eigen::VectorXd& shift, double tol,
              const SolveConfig& cfg) {
  Newton out;
  Eigen::VectorXd F;
  if (!P.residual(U, F)) {
    out.message = "start is not plurisubharmonic";
    return out;
  }
  F -= shift;
  double res = F.lpNorm<Eigen::Infinity>();
  for (int it = 0; it < cfg.max_iters; ++it) {
    if (res <= 0.01 * tol) {
      out.ok = true;
      out.residual = res;
      return out;
    }
    SpMat J = P.jacobian(U);
    Eigen::VectorXd dx;
    if (!linear_solve(J, -F, dx)) {
      out.message = "linear stage failed";
      out.residual = res;
      return out;
    }
    double lam = cfg.damping;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      std::vector<double> V = U;
      for (int k = 0; k < P.unknowns(); ++k) V[P.node(k)] += lam * dx[k];
      Eigen::VectorXd G;
      if (P.residual(V, G)) {
        G -= shift;
        double r2 = G.lpNorm<Eigen::Infinity>();
        if (r2 < (1 - 1e-4 * lam) * res || (r2 < res && ls > 10)) {
          U = std::move(V);
          F = std::move(G);
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
      os << "step guard rejected all steps at iteration " << it + 1 << " (residual " << res << ")";
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

// Boundary-fitted starting guess (e^{k t} - 1) / (e^k - 1), the mildest k that is plurisubharmonic.
std::vector<double> initial_guess(const ReinhardtGrid& grid, const ReinhardtProblem& P) {
  std::vector<double> U(grid.size());
  for (double k : {0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    for (int i = 0; i < grid.nt(); ++i) {
      double t = double(i) / (grid.nt() - 1);
      double v = k == 0 ? t : std::expm1(k * t) / std::expm1(k);
      for (int j = 0; j < grid.nq(); ++j) U[grid.index(i, j)] = v;
    }
    Eigen::VectorXd F;
    if (P.residual(U, F)) return U;
  }
  throw Error(Status::solver_failure, "no plurisubharmonic starting guess on the Reinhardt grid");
}

}  // namespace

SolveReport solve_reinhardt(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg,
                            const std::vector<double>* warm) {
  cfg.validate();
  if (!ring.is_reinhardt()) throw Error(Status::invalid_argument, "Reinhardt tier needs centered diagonal ellipsoids in C^2");
  if (G.dim() != 2 || std::abs(G.G(0, 1)) > 1e-14)
    throw Error(Status::invalid_argument, "Reinhardt tier needs a diagonal metric");
  const CMat &H0 = ring.omega0().H(), &H1 = ring.omega1().H();
  double a0 = 1.0 / H0(0, 0).real(), b0 = 1.0 / H0(1, 1).real();
  double a1 = 1.0 / H1(0, 0).real(), b1 = 1.0 / H1(1, 1).real();
  if (!(a1 > a0 && b1 > b0))
    throw Error(Status::invalid_argument, "Reinhardt tier needs intercepts of the outer ellipsoid beyond the inner ones");
  const int N = cfg.resolution;
  ReinhardtGrid grid(a0, b0, a1, b1, N, N);
  const double g1 = G.G(0, 0).real(), g2 = G.G(1, 1).real();
  if (warm && static_cast<int>(warm->size()) != grid.size())
    throw Error(Status::invalid_argument, "warm start size mismatch");

  SolveReport rep;
  std::vector<double> U;
  bool have_start = false;
  if (warm) {
    U = *warm;
    have_start = true;
  }
  for (double e : cfg.schedule()) {
    StageTrace tr;
    tr.eps = e;
    ReinhardtProblem P(grid, g1, g2, e, cfg.psd_floor);
    if (!have_start) U = initial_guess(grid, P);
    have_start = true;
    std::vector<double> before = U;
    const double tol = cfg.residual_tol * e;
    Eigen::VectorXd Fg;
    if (!P.residual(U, Fg)) throw Error(Status::solver_failure, "start is not plurisubharmonic");
    // Residual homotopy F(U) = (1 - lambda) F(U_start), lambda 0 -> 1.
    double lambda = 0.0, step = 1.0;
    std::string why;
    while (lambda < 1.0) {
      double next = std::min(1.0, lambda + step);
      std::vector<double> V = U;
      Eigen::VectorXd shift = (1.0 - next) * Fg;
      Newton o = newton(P, V, shift, next < 1.0 ? std::max(tol, 1e-6) : tol, cfg);
      tr.iterations += o.iterations;
      if (o.ok) {
        U = std::move(V);
        lambda = next;
        step = std::min(1.0, step * 2);
      } else {
        step *= 0.5;
        why = o.message;
        if (step < 1e-4) break;
      }
    }
    Eigen::VectorXd F;
    P.residual(U, F);
    tr.residual_inf = F.lpNorm<Eigen::Infinity>() / e;
    for (std::size_t k = 0; k < U.size(); ++k) tr.increment = std::max(tr.increment, std::abs(U[k] - before[k]));
    rep.iterations += tr.iterations;
    rep.eps_trace.push_back(tr);
    if (lambda < 1.0) {
      rep.message = "Newton homotopy stalled at eps=" + std::to_string(e) + ": " + why;
      break;
    }
  }

  rep.eps = cfg.eps;
  auto field = std::make_shared<ReinhardtField>(grid, U);
  field->set_eps(cfg.eps);
  field->set_metric(G);
  field->set_ring(ring);
  rep.field = field;

  ReinhardtProblem P(grid, g1, g2, cfg.eps, -std::numeric_limits<double>::infinity());
  rep.node_residuals.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  rep.psd_margin = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (int i = 1; i < N - 1; ++i)
    for (int j = 0; j < N; ++j) {
      NodeEval ev = P.eval(U, i, j, false);
      rep.psd_margin = std::min(rep.psd_margin, ev.lmin);
      double r = ev.lmin > 0 ? ev.F / cfg.eps : std::numeric_limits<double>::infinity();
      rep.node_residuals[grid.index(i, j)] = r;
      worst = std::max(worst, std::abs(r));
    }
  rep.residual_inf = worst;
  rep.converged = rep.message.empty() && worst <= cfg.residual_tol && rep.psd_margin > 0;
  if (rep.converged)
    rep.message = "ok";
  else if (rep.message.empty())
    rep.message = "final residual above tolerance";
  return rep;
}

}  // namespace cmlab
