#include "cmlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cmlab/foliation.hpp"
#include "cmlab/solver.hpp"

namespace cmlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CMat orthonormal_change(const MetricForm& G) { return G.chol().transpose().inverse(); }

double zGz(const Point& z, const MetricForm& G) { return (z.transpose() * G.G * z.conjugate())(0, 0).real(); }

double metric_trace(const Jet& j, const MetricForm& G) { return (G.Ginv * j.herm).trace().real(); }

// Half the Euclidean derivative along a real direction: Re(Phi_i v^i).
double half_directional(const Jet& j, const RVec& dir) {
  Point v = from_real(dir);
  return (j.grad.transpose() * v)(0, 0).real();
}

std::string where(const Point& z) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < z.size(); ++i) os << (i ? ", " : "") << z(i).real() << (z(i).imag() < 0 ? "" : "+") << z(i).imag() << "i";
  os << ")";
  return os.str();
}

double resolve_tol(const VerifyOptions& opt, const ScalarField& field, double scale) {
  return opt.tol ? *opt.tol : discretization_tolerance(field, scale);
}

FieldPtr majorant_field(const ScalarField& field) {
  if (auto f = dynamic_cast<const RadialField*>(&field)) {
    std::vector<double> all = harmonic_majorant(*f);
    std::vector<double> prof(all.begin(), all.begin() + f->size());
    return std::make_shared<RadialField>(f->n(), f->r(), f->R(), prof);
  }
  if (auto f = dynamic_cast<const ReinhardtField*>(&field))
    return std::make_shared<ReinhardtField>(f->grid(), harmonic_majorant(*f));
  if (auto f = dynamic_cast<const FullField*>(&field)) {
    auto U = std::make_shared<FullField>(f->grid_ptr(), full_harmonic_values(f->grid(), 40000, 1e-13));
    U->set_ring(f->grid().ring());
    return U;
  }
  return nullptr;
}

}  // namespace

void CheckReport::settle() { pass = applicable && margin >= -tolerance; }

double discretization_tolerance(const ScalarField& field, double scale) {
  scale = std::abs(scale);
  const double h = field.spacing();
  if (h <= 0) return 1e-9 * std::max(1.0, scale);
  double L = 1.0;
  if (field.ring()) L = field.ring()->thickness();
  else if (auto f = dynamic_cast<const RadialField*>(&field)) L = f->R() - f->r();
  return 5.0 * h * h * scale / (L * L);
}

RingDomain field_ring(const ScalarField& field) {
  if (field.ring()) return *field.ring();
  if (auto f = dynamic_cast<const RadialField*>(&field)) {
    Point c = Point::Zero(f->n());
    return RingDomain(SmoothDomain::ball(c, f->r()), SmoothDomain::ball(c, f->R()), 400);
  }
  throw Error(Status::invalid_argument, "field carries no ring");
}

// ---------------------------------------------------------------------------

CheckReport check_gradient_floor(const ScalarField& field, const MetricForm& G, double eps, const VerifyOptions& opt) {
  if (eps < 0) throw Error(Status::invalid_argument, "eps must be nonnegative");
  CheckReport rep;
  rep.id = "gradient_floor";
  auto pts = field.samples(opt.sampling);
  rep.samples = static_cast<int>(pts.size());

  double min_int_S = kInf, min_bd_S = kInf, max_bd_W = -kInf, min_int_g2 = kInf, max_S = 0.0;
  Point wS, wG;
  int undefined = 0;
  for (const auto& s : pts) {
    std::optional<double> S;
    try {
      if (eps > 0) {
        TangentGauge tg = tangent_gauge(s.jet, G, eps);
        if (tg.S && !tg.S_unreliable) S = tg.S;
      } else {
        LeafGauge lg = leaf_gauge_in_frame(s.jet, gauge_frame(s.jet, G), G);
        if (std::isfinite(lg.S_leaf)) S = lg.S_leaf;
      }
    } catch (const Error&) {
    }
    const double g = gradient_norm(s.jet, G);
    if (s.boundary >= 0) max_bd_W = std::max(max_bd_W, metric_trace(s.jet, G) + zGz(s.z, G));
    if (!S) {
      ++undefined;
      continue;
    }
    max_S = std::max(max_S, *S);
    if (s.boundary >= 0) {
      min_bd_S = std::min(min_bd_S, *S);
    } else {
      if (*S < min_int_S) min_int_S = *S, wS = s.z;
      if (g * g < min_int_g2) min_int_g2 = g * g, wG = s.z;
    }
  }
  if (undefined > opt.S_undefined_fraction * std::max<std::size_t>(1, pts.size()))
    throw Error(Status::singular, "S undefined at " + std::to_string(undefined) + " of " +
                                      std::to_string(pts.size()) + " samples");
  if (!std::isfinite(min_int_S) || !std::isfinite(min_bd_S))
    throw Error(Status::out_of_support, "gradient floor needs interior and boundary samples");

  const double factor = std::exp(-std::sqrt(eps) * max_bd_W);
  const double bound = factor * min_bd_S;
  const double m1 = min_int_S - bound, m2 = min_int_g2 - min_int_S;
  rep.margin = std::min(m1, m2);
  rep.witness = m1 <= m2 ? wS : wG;
  rep.tolerance = resolve_tol(opt, field, max_S);
  rep.tolerances = {{"tol_h", rep.tolerance}};
  rep.parts = {{"min_interior_S", min_int_S},   {"min_boundary_S", min_bd_S},  {"decay_factor", factor},
               {"floor", bound},                {"floor_margin", m1},         {"min_interior_grad2", min_int_g2},
               {"grad_margin", m2},             {"undefined_samples", double(undefined)}};
  if (eps == 0) rep.note = "S from the leaf form";
  rep.settle();
  return rep;
}

CheckReport check_sigma_max_principle(const ScalarField& field, const MetricForm& G, double eps,
                                      const VerifyOptions& opt) {
  CheckReport rep;
  rep.id = "sigma_max_principle";
  auto pts = field.samples(opt.sampling);
  rep.samples = static_cast<int>(pts.size());
  const double se = std::sqrt(std::max(eps, 0.0)), e34 = std::pow(std::max(eps, 0.0), 0.75);
  double max_bd = -kInf, max_int = -kInf, scale = 0.0, smin = kInf, smax = -kInf;
  Point w_int;
  for (const auto& s : pts) {
    TangentGauge tg = tangent_gauge(s.jet, G, eps);
    if (!tg.convex)
      throw Error(Status::nonconvex, "K >= 1 or A not positive at " + where(s.z) +
                                         (tg.kappa ? " (max eig K = " + std::to_string(tg.kappa->max_eig()) + ")"
                                                   : " (A not positive definite)"));
    const double sigma = tg.sigma();
    smin = std::min(smin, sigma);
    smax = std::max(smax, sigma);
    const double E = sigma + se * (tg.W + zGz(s.z, G)) + e34 * tg.V;
    scale = std::max(scale, std::abs(E));
    if (s.boundary >= 0) {
      max_bd = std::max(max_bd, E);
    } else if (E > max_int) {
      max_int = E;
      w_int = s.z;
    }
  }
  if (!std::isfinite(max_bd) || !std::isfinite(max_int))
    throw Error(Status::out_of_support, "sigma check needs interior and boundary samples");
  rep.margin = max_bd - max_int;
  rep.witness = w_int;
  rep.tolerance = resolve_tol(opt, field, scale);
  rep.tolerances = {{"tol_h", rep.tolerance}};
  rep.parts = {{"max_boundary_E", max_bd}, {"max_interior_E", max_int}, {"min_sigma", smin}, {"max_sigma", smax}};
  rep.settle();
  return rep;
}

double measure_sigma_tilde(const ScalarField& field, const MetricForm& G, const VerifyOptions& opt) {
  double s = kInf;
  for (const auto& p : field.samples(opt.sampling)) {
    if (p.boundary >= 0) continue;
    try {
      TangentGauge tg = tangent_gauge(p.jet, G, field.eps());
      Eigen::SelfAdjointEigenSolver<CMat> es(tg.A);
      s = std::min(s, es.eigenvalues().minCoeff());
    } catch (const Error&) {
    }
  }
  if (!std::isfinite(s)) throw Error(Status::singular, "no interior sample with a nonvanishing gradient");
  return s;
}

CheckReport check_rank_estimates(const ScalarField& field, const MetricForm& G, double eps,
                                 std::optional<double> sigma_tilde, const VerifyOptions& opt) {
  CheckReport rep;
  rep.id = "rank_estimates";
  const double st = sigma_tilde ? *sigma_tilde : measure_sigma_tilde(field, G, opt);
  const CMat M = orthonormal_change(G);
  double m_det = kInf, m_sig = kInf, m_exp = kInf, scale = 0.0;
  Point w_det, w_sig, w_exp;
  int n = 0, count = 0;
  for (const auto& p : field.samples(opt.sampling)) {
    if (p.boundary >= 0) continue;
    ++count;
    Jet w = transform_jet(p.jet, M);
    n = static_cast<int>(w.grad.size());
    Eigen::SelfAdjointEigenSolver<CMat> es(w.herm);
    const RVec lam = es.eigenvalues();
    double det = 1.0, e = 0.0;
    for (int i = 0; i < n; ++i) {
      det *= lam(i);
      double prod = 1.0;
      for (int k = 0; k < n; ++k)
        if (k != i) prod *= lam(k);
      e += prod;
    }
    const double sn = std::pow(st, n - 1);
    scale = std::max({scale, std::abs(det), std::abs(e)});
    if (det - eps * sn < m_det) m_det = det - eps * sn, w_det = p.z;
    if (e - sn < m_sig) m_sig = e - sn, w_sig = p.z;
    CMat X = std::exp(w.value) * (w.herm + w.grad * w.grad.adjoint());
    double lo = Eigen::SelfAdjointEigenSolver<CMat>(X, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (lo < m_exp) m_exp = lo, w_exp = p.z;
  }
  if (count == 0) throw Error(Status::out_of_support, "rank check needs interior samples");
  rep.samples = count;
  rep.margin = std::min({m_det, m_sig, m_exp});
  rep.witness = rep.margin == m_det ? w_det : rep.margin == m_sig ? w_sig : w_exp;
  rep.tolerance = resolve_tol(opt, field, scale);
  rep.tolerances = {{"tol_h", rep.tolerance}};
  rep.parts = {{"sigma_tilde", st}, {"det_margin", m_det}, {"sigma_n_minus_1_margin", m_sig}, {"exp_min_eig", m_exp}};
  rep.settle();
  // The exponential Hessian must be strictly positive.
  if (!(m_exp > 0)) rep.pass = false;
  return rep;
}

CheckReport check_level_sets(const ScalarField& field, const MetricForm& G, const std::vector<double>& levels,
                             const VerifyOptions& opt) {
  if (levels.empty()) throw Error(Status::invalid_argument, "no levels given");
  CheckReport rep;
  rep.id = "level_sets";
  rep.margin = kInf;
  for (double t : levels) {
    auto pts = field.level_set(t, opt.sampling);
    double qc = kInf, gmax = 0.0;
    Point w;
    for (const auto& s : pts) {
      const double g = gradient_norm(s.jet, G);
      if (g <= 1e-12) throw Error(Status::singular, "vanishing gradient on level " + std::to_string(t) + " at " + where(s.z));
      gmax = std::max(gmax, g);
      Convexity c = qc_modulus(s.jet, G);
      if (c.value < qc) qc = c.value, w = s.z;
    }
    rep.samples += static_cast<int>(pts.size());
    const double mod = levelset_modulus_bound(qc, gmax);
    std::ostringstream key;
    key << "t=" << t;
    rep.parts.emplace_back(key.str(), mod);
    if (mod < rep.margin) rep.margin = mod, rep.witness = w;
  }
  rep.tolerance = 0.0;
  rep.tolerances = {{"positivity", 0.0}};
  rep.pass = rep.margin > 0;
  return rep;
}

CheckReport check_boundary_conversion(const ScalarField& field, const RingDomain& ring, const MetricForm& G,
                                      const VerifyOptions& opt) {
  CheckReport rep;
  rep.id = "boundary_conversion";
  std::vector<SamplePoint> bd;
  for (auto& s : field.samples(opt.sampling))
    if (s.boundary >= 0) bd.push_back(std::move(s));
  rep.samples = static_cast<int>(bd.size());
  if (bd.empty()) throw Error(Status::out_of_support, "no boundary samples");

  const double bc_tol = 1e-6;
  double bc_err = 0.0;
  for (const auto& s : bd) bc_err = std::max(bc_err, std::abs(s.jet.value - (s.boundary == 0 ? 0.0 : 1.0)));
  rep.tolerances = {{"boundary_values", bc_tol}};
  if (bc_err > bc_tol) {
    rep.applicable = false;
    rep.margin = std::numeric_limits<double>::quiet_NaN();
    rep.note = "not applicable: boundary values off by " + std::to_string(bc_err);
    rep.pass = false;
    return rep;
  }

  const double mu[2] = {cconvexity_modulus(ring.omega0(), 400).modulus.value,
                        cconvexity_modulus(ring.omega1(), 400).modulus.value};
  double m_qc = kInf, gscale = 0.0, dn_min[2] = {kInf, kInf};
  Point w_qc, w_dn[2];
  for (const auto& s : bd) {
    const double g = gradient_norm(s.jet, G);
    gscale = std::max(gscale, g);
    Convexity c = qc_modulus(s.jet, G);
    const double m = c.value - boundary_qc_bound(mu[s.boundary], g);
    if (m < m_qc) m_qc = m, w_qc = s.z;
    // Derivative into the ring at the inner boundary, out of it at the outer one.
    const double dn = (s.boundary == 0 ? -1.0 : 1.0) * half_directional(s.jet, s.normal);
    if (dn < dn_min[s.boundary]) dn_min[s.boundary] = dn, w_dn[s.boundary] = s.z;
  }
  rep.margin = m_qc;
  rep.witness = w_qc;
  rep.parts = {{"mu_inner", mu[0]}, {"mu_outer", mu[1]}, {"qc_margin", m_qc},
               {"min_dn_inner", dn_min[0]}, {"min_dn_outer", dn_min[1]}};

  std::string notes;
  try {
    Subsolution sub(ring, G, {});
    const double floor0 = sub.min_normal_derivative0();
    rep.parts.emplace_back("floor_inner", floor0);
    const double m = dn_min[0] - floor0;
    rep.parts.emplace_back("floor_inner_margin", m);
    if (m < rep.margin) rep.margin = m, rep.witness = w_dn[0];
  } catch (const Error& e) {
    notes += std::string("inner floor skipped (no subsolution: ") + e.what() + "); ";
  }
  FieldPtr U;
  try {
    U = majorant_field(field);
  } catch (const Error& e) {
    notes += std::string("outer floor skipped (") + e.what() + "); ";
  }
  if (U) {
    double floor1 = kInf;
    for (const auto& s : U->samples(opt.sampling))
      if (s.boundary == 1) floor1 = std::min(floor1, half_directional(s.jet, s.normal));
    rep.parts.emplace_back("floor_outer", floor1);
    const double m = dn_min[1] - floor1;
    rep.parts.emplace_back("floor_outer_margin", m);
    if (m < rep.margin) rep.margin = m, rep.witness = w_dn[1];
  } else if (notes.find("outer") == std::string::npos) {
    notes += "outer floor skipped (no harmonic majorant for this representation); ";
  }
  if (!notes.empty()) rep.note = notes.substr(0, notes.size() - 2);
  rep.tolerance = resolve_tol(opt, field, gscale);
  rep.tolerances.emplace_back("tol_h", rep.tolerance);
  rep.settle();
  return rep;
}

CheckReport with_refinement(std::vector<CheckReport> levels) {
  if (levels.empty()) throw Error(Status::invalid_argument, "no refinement levels");
  CheckReport out = levels.back();
  bool coherent = true;
  out.trend.clear();
  for (std::size_t k = 0; k < levels.size(); ++k) {
    out.trend.push_back(levels[k].margin);
    if (k > 0 && levels[k].margin < levels[k - 1].margin - 0.1 * std::abs(levels[k - 1].margin)) coherent = false;
  }
  std::string tag = coherent ? "refinement coherent" : "refinement not monotone";
  out.note = out.note.empty() ? tag : out.note + "; " + tag;
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Sum over p, u, i of eps^2 / (l_p^2 l_u) (|Phi_{p ubar i}|^2 + |Phi_{p ubar ibar}|^2) in a frame
// that is G-orthonormal and diagonalizes the complex Hessian at p.
double iphi_at(const ScalarField& field, const Point& p, const CMat& F, const RVec& lam, double eps, double d) {
  const int n = static_cast<int>(p.size());
  auto herm_w = [&](const Point& z) { return transform_jet(field.jet(z), F).herm; };
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const CVec e = F.col(i);
    // d/dt and d/ds along w_i = t + i s.
    CMat dt = (herm_w(p + d * e) - herm_w(p - d * e)) / (2 * d);
    CMat ds = (herm_w(p + cplx(0, d) * e) - herm_w(p - cplx(0, d) * e)) / (2 * d);
    CMat Di = 0.5 * (dt - cplx(0, 1) * ds);
    CMat Ei = 0.5 * (dt + cplx(0, 1) * ds);
    for (int a = 0; a < n; ++a)
      for (int u = 0; u < n; ++u) sum += eps * eps / (lam(a) * lam(a) * lam(u)) * (std::norm(Di(a, u)) + std::norm(Ei(a, u)));
  }
  return sum;
}

}  // namespace

IPhiDiagnostic diagnostic_IPhi(const ScalarField& field, const MetricForm& G, double eps, const Point& p, double delta) {
  Jet j = field.jet(p);
  CMat M = orthonormal_change(G);
  Eigen::SelfAdjointEigenSolver<CMat> es(transform_jet(j, M).herm);
  const RVec lam = es.eigenvalues();
  if (!(lam.minCoeff() > 0)) throw Error(Status::not_positive_definite, "complex Hessian not positive at " + where(p));
  const CMat F = M * es.eigenvectors();
  IPhiDiagnostic out;
  out.delta = delta > 0 ? delta : (field.spacing() > 0 ? field.spacing() : 1e-3);
  out.value = iphi_at(field, p, F, lam, eps, out.delta);
  const double coarse = iphi_at(field, p, F, lam, eps, 2 * out.delta);
  out.noise = std::abs(out.value - coarse) / 3.0;
  out.unreliable = out.noise > std::abs(out.value);
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> check_names() {
  return {"gradient_floor", "sigma_max_principle", "rank_estimates", "level_sets", "boundary_conversion"};
}

std::vector<CheckReport> run_checks(const ScalarField& field, const MetricForm& G, double eps,
                                    const std::vector<std::string>& names, const VerifyOptions& opt) {
  auto known = check_names();
  for (const auto& nm : names)
    if (std::find(known.begin(), known.end(), nm) == known.end())
      throw Error(Status::invalid_argument, "unknown check: " + nm);
  std::vector<CheckReport> out;
  for (const auto& nm : names) {
    CheckReport r;
    try {
      if (nm == "gradient_floor") r = check_gradient_floor(field, G, eps, opt);
      else if (nm == "sigma_max_principle") r = check_sigma_max_principle(field, G, eps, opt);
      else if (nm == "rank_estimates") r = check_rank_estimates(field, G, eps, std::nullopt, opt);
      else if (nm == "level_sets") r = check_level_sets(field, G, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, opt);
      else r = check_boundary_conversion(field, field_ring(field), G, opt);
    } catch (const Error& e) {
      r = CheckReport();
      r.id = nm;
      r.pass = false;
      r.margin = std::numeric_limits<double>::quiet_NaN();
      r.note = std::string(status_name(e.status())) + ": " + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace cmlab
