#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "cmlab/solver.hpp"

namespace cmlab {

namespace {

struct Herm2 {
  double p, q;
  cplx c;  // H = [[p, c], [conj(c), q]]
};

Herm2 herm2(const CMat& H) { return {H(0, 0).real(), H(1, 1).real(), 0.5 * (H(0, 1) + std::conj(H(1, 0)))}; }

// tr(adj(H) G) for 2x2 Hermitian H and G.
double adj_trace(const Herm2& h, const CMat& G) {
  return h.q * G(0, 0).real() + h.p * G(1, 1).real() - 2.0 * (h.c * G(1, 0)).real();
}

bool positive(const Herm2& h, double floor) {
  double tr = 0.5 * (h.p + h.q), disc = std::sqrt(0.25 * (h.p - h.q) * (h.p - h.q) + std::norm(h.c));
  return tr - disc > floor;
}

double lambda_min(const Herm2& h) {
  return 0.5 * (h.p + h.q) - std::sqrt(0.25 * (h.p - h.q) * (h.p - h.q) + std::norm(h.c));
}

class FullProblem {
 public:
  FullProblem(std::shared_ptr<const FullGrid> grid, const MetricForm& G, double eps)
      : grid_(std::move(grid)), G_(G.G), eps_(eps) {
    // The complex Hessian is linear in the center value; cache its slope per node.
    const auto& nodes = grid_->interior_nodes();
    slope_.resize(nodes.size());
    std::vector<double> e(grid_->size(), 0.0);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      e[nodes[k]] = 1.0;
      RealJet j1 = grid_->real_jet(e, nodes[k]);
      e[nodes[k]] = 0.0;
      RealJet j0 = grid_->real_jet(e, nodes[k]);
      slope_[k] = herm2(complex_hessian(j1.hess - j0.hess));
    }
  }

  Herm2 hessian(const std::vector<double>& U, int k) const {
    return herm2(complex_hessian(grid_->real_jet(U, grid_->interior_nodes()[k]).hess));
  }

  // eps tr(H^-1 G) - 1; +inf off the positive cone.
  double relative_residual(const Herm2& h) const {
    double det = h.p * h.q - std::norm(h.c);
    if (!positive(h, 0.0) || !(det > 0)) return std::numeric_limits<double>::infinity();
    return eps_ * adj_trace(h, G_) / det - 1.0;
  }

  // Center-value change solving det H = eps tr(adj(H) G) on the positive cone; false if none.
  bool local_solve(const Herm2& h0, int k, double& tau) const {
    const Herm2& s = slope_[k];
    double A2 = s.p * s.q - std::norm(s.c);
    double A1 = h0.p * s.q + s.p * h0.q - 2.0 * (h0.c * std::conj(s.c)).real();
    double A0 = h0.p * h0.q - std::norm(h0.c);
    double T1 = adj_trace(s, G_), T0 = adj_trace(h0, G_);
    double a = A2, b = A1 - eps_ * T1, c = A0 - eps_ * T0;
    double roots[2];
    int nr = 0;
    if (std::abs(a) < 1e-300) {
      if (b != 0) roots[nr++] = -c / b;
    } else {
      double disc = b * b - 4 * a * c;
      if (disc < 0) return false;
      double sq = std::sqrt(disc);
      double qq = -0.5 * (b + (b >= 0 ? sq : -sq));
      roots[nr++] = qq / a;
      if (qq != 0) roots[nr++] = c / qq;
    }
    bool found = false;
    for (int m = 0; m < nr; ++m) {
      double t = roots[m];
      Herm2 h{h0.p + t * s.p, h0.q + t * s.q, h0.c + t * s.c};
      if (!positive(h, 0.0)) continue;
      if (!found || std::abs(t) < std::abs(tau)) tau = t;
      found = true;
    }
    return found;
  }

  const FullGrid& grid() const { return *grid_; }

 private:
  std::shared_ptr<const FullGrid> grid_;
  CMat G_;
  double eps_;
  std::vector<Herm2> slope_;
};

std::vector<double> dirichlet_fill(const FullGrid& grid) {
  // Exterior nodes never enter the stencils; keep them at the nearer boundary value.
  std::vector<double> U(grid.size(), 0.0);
  for (int idx = 0; idx < grid.size(); ++idx)
    if (!grid.interior(idx)) U[idx] = grid.ring().omega1().rho_value(grid.point(idx)) >= 0 ? 1.0 : 0.0;
  return U;
}

}  // namespace

std::vector<double> full_harmonic_values(const FullGrid& grid, int max_sweeps, double tol) {
  std::vector<double> U = dirichlet_fill(grid);
  const auto& nodes = grid.interior_nodes();
  for (int idx : nodes) U[idx] = 0.5;
  // Shortley-Weller Laplacian, SOR sweeps.
  const double omega = 1.8;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double change = 0.0;
    for (int idx : nodes) {
      double lap = 0.0, diag = 0.0;
      for (int d = 0; d < 4; ++d) {
        double cw = 0.0;
        lap += grid.second(U, idx, d, &cw);
        diag += cw;
      }
      double delta = -omega * lap / diag;
      U[idx] += delta;
      change = std::max(change, std::abs(delta));
    }
    if (change < tol) break;
  }
  return U;
}

SolveReport solve_full(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg, const FullOptions& opt,
                       const std::vector<double>* warm) {
  cfg.validate();
  if (ring.n() != 2 || G.dim() != 2) throw Error(Status::invalid_argument, "full tier is implemented for n = 2");
  if (cfg.resolution > 24) throw Error(Status::invalid_argument, "full tier limited to 24 nodes per axis (memory guard)");
  if (!(opt.relaxation > 0 && opt.relaxation < 2)) throw Error(Status::invalid_argument, "relaxation must lie in (0, 2)");
  auto grid = std::make_shared<const FullGrid>(ring, cfg.resolution, opt.margin);
  const auto& nodes = grid->interior_nodes();
  if (warm && static_cast<int>(warm->size()) != grid->size())
    throw Error(Status::invalid_argument, "warm start size mismatch");

  std::vector<double> U;
  if (warm) {
    U = *warm;
  } else if (opt.start == InitialGuess::subsolution) {
    Subsolution psi(ring, G, opt.subsolution);
    U = dirichlet_fill(*grid);
    for (int idx : nodes) U[idx] = psi.eval(grid->point(idx)).value;
  } else {
    U = full_harmonic_values(*grid, 20000, 1e-12);
  }

  SolveReport rep;
  const int max_sweeps = std::max(cfg.max_iters, 1) * 100;
  for (double e : cfg.schedule()) {
    StageTrace tr;
    tr.eps = e;
    FullProblem P(grid, G, e);
    std::vector<double> before = U;
    const double stop = std::min(1e-3, cfg.residual_tol * e);
    double res = std::numeric_limits<double>::infinity();
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
      int stuck = 0;
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        Herm2 h0 = P.hessian(U, static_cast<int>(k));
        double tau = 0.0;
        if (P.local_solve(h0, static_cast<int>(k), tau))
          U[nodes[k]] = std::clamp(U[nodes[k]] + opt.relaxation * tau, 0.0, 1.0);
        else
          ++stuck;
      }
      res = 0.0;
      for (std::size_t k = 0; k < nodes.size(); ++k)
        res = std::max(res, std::abs(P.relative_residual(P.hessian(U, static_cast<int>(k)))));
      if (res <= stop) {
        ++sweep;
        break;
      }
      if (stuck == static_cast<int>(nodes.size())) break;
    }
    tr.iterations = sweep;
    tr.residual_inf = res / e;
    for (std::size_t k = 0; k < U.size(); ++k) tr.increment = std::max(tr.increment, std::abs(U[k] - before[k]));
    rep.iterations += sweep;
    rep.eps_trace.push_back(tr);
    if (!(res <= 1e-3)) {
      std::ostringstream os;
      os << "Gauss-Seidel did not reach relative residual 1e-3" << " at eps=" << e << " (reached " << res << ")";
      rep.message = os.str();
      break;
    }
  }

  rep.eps = cfg.eps;
  auto field = std::make_shared<FullField>(grid, U);
  field->set_eps(cfg.eps);
  field->set_metric(G);
  field->set_ring(ring);
  rep.field = field;
  FullProblem P(grid, G, cfg.eps);
  rep.node_residuals.resize(nodes.size());
  rep.psd_margin = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    Herm2 h = P.hessian(U, static_cast<int>(k));
    rep.psd_margin = std::min(rep.psd_margin, lambda_min(h));
    double r = P.relative_residual(h) / cfg.eps;
    rep.node_residuals[k] = r;
    worst = std::max(worst, std::abs(r));
  }
  rep.residual_inf = worst;
  rep.converged = rep.message.empty() && rep.psd_margin > 0 && worst * cfg.eps <= 1e-3;
  if (rep.converged)
    rep.message = "ok";
  else if (rep.message.empty())
    rep.message = "final residual above tolerance";
  return rep;
}

namespace {

std::vector<double> radial_majorant(const RadialField& f) {
  // f'' + (2n - 2) f' = 0 in s = log|z| with the same end values.
  const int N = f.size();
  const double h = f.h(), b = 2.0 * f.n() - 2.0;
  const double lo = 1.0 / (h * h) - b / (2 * h), di = -2.0 / (h * h), up = 1.0 / (h * h) + b / (2 * h);
  std::vector<double> out(f.values());
  const int m = N - 2;
  std::vector<double> c(m), d(m);
  for (int k = 0; k < m; ++k) {
    double rhs = 0.0;
    if (k == 0) rhs -= lo * out[0];
    if (k == m - 1) rhs -= up * out[N - 1];
    double denom = di - (k > 0 ? lo * c[k - 1] : 0.0);
    c[k] = up / denom;
    d[k] = (rhs - (k > 0 ? lo * d[k - 1] : 0.0)) / denom;
  }
  for (int k = m - 1; k >= 0; --k) out[k + 1] = d[k] - (k + 1 < m ? c[k] * out[k + 2] : 0.0);
  std::vector<double> nodes;
  nodes.reserve(6 * N);
  for (int r = 0; r < 6; ++r) nodes.insert(nodes.end(), out.begin(), out.end());
  return nodes;
}

std::vector<double> reinhardt_majorant(const ReinhardtField& f) {
  // ux + x uxx + uy + y uyy = 0 (the Laplacian up to a factor), boundary rows kept.
  const ReinhardtGrid& g = f.grid();
  const int nt = g.nt(), nq = g.nq(), m = (nt - 2) * nq;
  std::vector<double> U(f.values());
  for (int k = nq; k < (nt - 1) * nq; ++k) U[k] = 0.0;
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd rhs(m);
  for (int i = 1; i < nt - 1; ++i)
    for (int j = 0; j < nq; ++j) {
      const int row = (i - 1) * nq + j;
      auto xy = g.xy(i, j);
      auto d = g.derivs(U, i, j);
      rhs[row] = -(d[1] + xy[0] * d[3] + d[2] + xy[1] * d[5]);
      Eigen::Matrix<double, 1, 5> dl;
      dl << 1.0, 1.0, xy[0], 0.0, xy[1];
      const auto& st = g.stencil(i, j);
      Eigen::Matrix<double, 1, 5> w = dl * st.C;
      for (int r = 0; r < 5; ++r)
        for (auto [k, wt] : st.rows[r]) {
          int ik = k / nq;
          if (ik > 0 && ik < nt - 1) trips.emplace_back(row, k - nq, w[r] * wt);
        }
    }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(Status::singular, "majorant system is singular");
  Eigen::VectorXd x = lu.solve(rhs);
  for (int k = 0; k < m; ++k) U[k + nq] = x[k];
  return U;
}

}  // namespace

std::vector<double> harmonic_majorant(const ScalarField& field) {
  switch (field.rep()) {
    case ScalarField::Rep::radial: return radial_majorant(static_cast<const RadialField&>(field));
    case ScalarField::Rep::reinhardt: return reinhardt_majorant(static_cast<const ReinhardtField&>(field));
    case ScalarField::Rep::full: {
      const auto& g = static_cast<const FullField&>(field).grid();
      std::vector<double> U = full_harmonic_values(g, 40000, 1e-13);
      std::vector<double> out;
      out.reserve(g.interior_nodes().size());
      for (int idx : g.interior_nodes()) out.push_back(U[idx]);
      return out;
    }
    default: throw Error(Status::invalid_argument, "harmonic majorant needs a grid field");
  }
}

}  // namespace cmlab
