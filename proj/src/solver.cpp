#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cmlab/solver.hpp"

namespace cmlab {

void SolveConfig::validate() const {
  if (!(eps > 0)) throw Error(Status::invalid_argument, "eps must be positive");
  if (!(residual_tol > 0)) throw Error(Status::invalid_argument, "residual_tol must be positive");
  if (!(damping > 0 && damping <= 1)) throw Error(Status::invalid_argument, "damping must lie in (0, 1]");
  if (max_iters <= 0) throw Error(Status::invalid_argument, "max_iters must be positive");
  if (resolution < 5) throw Error(Status::invalid_argument, "resolution must be at least 5");
  if (!(psd_floor >= 0)) throw Error(Status::invalid_argument, "psd_floor must be nonnegative");
  if (!eps_schedule.empty()) {
    for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
      if (!(eps_schedule[k] > 0)) throw Error(Status::invalid_argument, "schedule entries must be positive");
      if (k > 0 && !(eps_schedule[k] < eps_schedule[k - 1]))
        throw Error(Status::invalid_argument, "eps schedule must be strictly descending");
    }
    if (std::abs(eps_schedule.back() - eps) > 1e-15 * eps)
      throw Error(Status::invalid_argument, "last schedule entry must equal eps");
  }
}

std::vector<double> SolveConfig::schedule() const {
  if (eps_schedule.empty()) return {eps};
  return eps_schedule;
}

double quotient_residual(const Jet& j, const MetricForm& G, double eps) {
  const auto n = j.herm.rows();
  CMat H = 0.5 * (j.herm + j.herm.adjoint());
  double s = H.cwiseAbs().maxCoeff();
  if (!(s > 0)) return std::numeric_limits<double>::infinity();
  Eigen::LLT<CMat> llt(H / s);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  CMat X = llt.solve(G.G) / s;
  (void)n;
  return X.trace().real() - 1.0 / eps;
}

double min_hessian_eigenvalue(const Jet& j) {
  CMat H = 0.5 * (j.herm + j.herm.adjoint());
  return Eigen::SelfAdjointEigenSolver<CMat>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

Tier select_tier(const RingDomain& ring, const MetricForm& G) {
  bool identity = (G.G - CMat::Identity(G.dim(), G.dim())).cwiseAbs().maxCoeff() < 1e-14;
  if (ring.is_centered_ball_ring() && identity) return Tier::radial;
  bool diagonal = G.dim() == 2 && std::abs(G.G(0, 1)) < 1e-14 && std::abs(G.G(0, 0).imag()) < 1e-14 &&
                  std::abs(G.G(1, 1).imag()) < 1e-14;
  if (ring.n() == 2 && ring.is_reinhardt() && diagonal) return Tier::reinhardt;
  return Tier::full;
}

namespace {

double sup_difference(const ScalarField& a, const ScalarField& b) {
  auto va = a.node_values(), vb = b.node_values();
  if (va.size() != vb.size()) return std::numeric_limits<double>::quiet_NaN();
  double m = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k].second - vb[k].second));
  return m;
}

std::vector<double> grid_values(const ScalarField& f) {
  switch (f.rep()) {
    case ScalarField::Rep::radial: return static_cast<const RadialField&>(f).values();
    case ScalarField::Rep::reinhardt: return static_cast<const ReinhardtField&>(f).values();
    case ScalarField::Rep::full: return static_cast<const FullField&>(f).values();
    default: throw Error(Status::invalid_argument, "analytic fields carry no grid values");
  }
}

}  // namespace

ContinuationResult continuation(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg, Tier tier,
                                const FullOptions& full) {
  cfg.validate();
  if (tier == Tier::automatic) tier = select_tier(ring, G);
  ContinuationResult out;
  std::vector<double> warm;
  for (double e : cfg.schedule()) {
    SolveConfig stage = cfg;
    stage.eps = e;
    stage.eps_schedule.clear();
    const std::vector<double>* w = warm.empty() ? nullptr : &warm;
    try {
      SolveReport rep;
      switch (tier) {
        case Tier::radial:
          if (!ring.is_centered_ball_ring())
            throw Error(Status::invalid_argument, "radial tier needs concentric balls");
          rep = solve_radial(ring.n(), ring.omega0().radius(), ring.omega1().radius(), stage, w);
          break;
        case Tier::reinhardt: rep = solve_reinhardt(ring, G, stage, w); break;
        default: rep = solve_full(ring, G, stage, full, w); break;
      }
      if (!out.stages.empty()) rep.eps_trace.front().increment = sup_difference(*rep.field, *out.stages.back().field);
      warm = grid_values(*rep.field);
      out.stages.push_back(std::move(rep));
      if (!out.stages.back().converged) {
        out.ok = false;
        out.failure = "eps=" + std::to_string(e) + ": " + out.stages.back().message;
        break;
      }
    } catch (const Error& err) {
      out.ok = false;
      out.failure = "eps=" + std::to_string(e) + ": " + err.what();
      break;
    }
  }
  return out;
}

AuditResult audit_residual(const SolveReport& rep, int count, std::uint64_t seed) {
  if (!rep.field) throw Error(Status::invalid_argument, "report has no field");
  const ScalarField& f = *rep.field;
  auto nodes = f.node_values();
  if (nodes.size() != rep.node_residuals.size())
    throw Error(Status::format_error, "node residual count does not match the field");
  std::vector<std::size_t> eq;
  for (std::size_t k = 0; k < nodes.size(); ++k)
    if (std::isfinite(rep.node_residuals[k])) eq.push_back(k);
  std::mt19937_64 rng(seed);
  std::shuffle(eq.begin(), eq.end(), rng);
  if (static_cast<int>(eq.size()) > count) eq.resize(count);
  AuditResult a;
  for (std::size_t k : eq) {
    double r = quotient_residual(f.jet(nodes[k].first), f.metric(), rep.eps);
    a.max_disagreement = std::max(a.max_disagreement, std::abs(r - rep.node_residuals[k]));
    a.max_residual = std::max(a.max_residual, std::abs(r));
    ++a.nodes;
  }
  return a;
}

}  // namespace cmlab
