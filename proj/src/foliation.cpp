#include "cmlab/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace cmlab {

namespace {

double gnorm2(const CVec& v, const CMat& G) { return (v.transpose() * G * v.conjugate())(0, 0).real(); }

Jet frame_jet(const ScalarField& field, const Point& x, const CMat& frame) {
  return transform_jet(field.jet(x), frame);
}

bool finite_jet(const Jet& j) {
  return std::isfinite(j.value) && j.grad.allFinite() && j.herm.allFinite() && j.hol.allFinite();
}

cplx leaf_slope(const Jet& w, double min_zz) {
  double zz = w.herm(1, 1).real();
  if (!(std::abs(zz) >= min_zz))
    throw Error(Status::singular, "Phi_{z zbar} vanishes along the leaf (singular leaf direction)");
  return w.herm(0, 1) / zz;
}

Point leaf_position(const Leaf& leaf, cplx zeta, cplx h) {
  CVec w(2);
  w << zeta, h;
  return leaf.p + leaf.frame * w;
}

struct Stepper {
  const ScalarField& field;
  const Leaf& leaf;
  double min_zz;

  cplx slope(cplx zeta, cplx h) const {
    Jet w = frame_jet(field, leaf_position(leaf, zeta, h), leaf.frame);
    if (!finite_jet(w)) throw Error(Status::singular, "field jet is not finite along the leaf");
    return leaf_slope(w, min_zz);
  }

  // h at zeta0 + d from h0 at zeta0, straight path, n RK4 steps.
  cplx advance(cplx zeta0, cplx h0, cplx d, int n) const {
    cplx h = h0, dt = d / double(n);
    for (int k = 0; k < n; ++k) {
      cplx z = zeta0 + double(k) * dt;
      cplx k1 = -slope(z, h) * dt;
      cplx k2 = -slope(z + 0.5 * dt, h + 0.5 * k1) * dt;
      cplx k3 = -slope(z + 0.5 * dt, h + 0.5 * k2) * dt;
      cplx k4 = -slope(z + dt, h + k3) * dt;
      h += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return h;
  }
};

LeafSample make_sample(const ScalarField& field, const Leaf& leaf, cplx zeta, cplx h, int ray, int step,
                       double min_zz) {
  LeafSample s;
  s.zeta = zeta;
  s.h = h;
  s.x = leaf_position(leaf, zeta, h);
  Jet w = frame_jet(field, s.x, leaf.frame);
  if (!finite_jet(w)) throw Error(Status::singular, "field jet is not finite along the leaf");
  s.f = leaf_slope(w, min_zz);
  s.value = w.value;
  s.ray = ray;
  s.step = step;
  return s;
}

bool inside(const ScalarField& field, const Point& x) {
  const RingDomain* ring = field.ring();
  return !ring || ring->contains(to_real(x));
}

LeafSample continue_from(const ScalarField& field, const Leaf& leaf, const LeafSample& from, cplx zeta, int n) {
  Stepper st{field, leaf, 0.0};
  cplx h = st.advance(from.zeta, from.h, zeta - from.zeta, n);
  return make_sample(field, leaf, zeta, h, -1, 0, 0.0);
}

double leaf_S(const Jet& w, cplx f, const CMat& frame, const MetricForm& G) {
  CVec V(2);
  V << 1.0, -f;
  CVec amb = frame * V;
  cplx dphi = w.grad(0) - f * w.grad(1);
  return std::norm(dphi) / gnorm2(amb, G.G);
}

}  // namespace

CMat gauge_frame(const Jet& j, const MetricForm& G) {
  if (j.grad.size() != 2 || G.dim() != 2) throw Error(Status::dimension_mismatch, "leaf gauges need n = 2");
  const CVec& g = j.grad;
  if (!(g.norm() > 1e-14)) throw Error(Status::singular, "vanishing gradient: no gauge frame");
  CVec v(2);
  v << -g(1), g(0);
  v /= std::sqrt(gnorm2(v, G.G));
  CVec w = G.G * v.conjugate();
  CVec u(2);
  u << -w(1), w(0);
  u /= std::sqrt(gnorm2(u, G.G));
  cplx pt = g.dot(u.conjugate());  // g^T u
  u *= std::conj(pt) / std::abs(pt);
  CMat M(2, 2);
  M.col(0) = u;
  M.col(1) = v;
  return M;
}

LeafGauge leaf_gauge_in_frame(const Jet& j, const CMat& frame, const MetricForm& G) {
  Jet w = transform_jet(j, frame);
  const cplx pt = w.grad(0), pz = w.grad(1);
  if (!(std::abs(pt) > 1e-14)) throw Error(Status::singular, "Phi_tau vanishes in this frame");
  const cplx r = pz / pt;
  LeafGauge out;
  out.frame = frame;
  out.a = (w.herm(1, 1) - r * w.herm(0, 1) - std::conj(r) * w.herm(1, 0) + std::norm(r) * w.herm(0, 0)).real();
  out.b = w.hol(1, 1) - 2.0 * r * w.hol(0, 1) + r * r * w.hol(0, 0);
  out.convex = out.a > 0;
  out.Q = out.convex ? std::norm(out.b) / (out.a * out.a) : std::numeric_limits<double>::infinity();
  out.convex = out.convex && out.Q < 1.0;
  double zz = w.herm(1, 1).real();
  if (std::abs(zz) > 0) {
    out.f = w.herm(0, 1) / zz;
    out.S_leaf = leaf_S(w, out.f, frame, G);
  } else {
    out.S_leaf = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

LeafGauge leaf_gauge(const ScalarField& field, const Point& p, const MetricForm& G) {
  Jet j = field.jet(p);
  return leaf_gauge_in_frame(j, gauge_frame(j, G), G);
}

Leaf leaf_trace(const ScalarField& field, const Point& p, double radius, int steps, const LeafOptions& opt) {
  if (field.n() != 2) throw Error(Status::dimension_mismatch, "leaf tracing needs n = 2");
  if (!(radius > 0)) throw Error(Status::invalid_argument, "leaf radius must be positive");
  if (steps < 4) throw Error(Status::invalid_argument, "leaf tracing needs at least 4 steps");
  if (opt.rays < 1) throw Error(Status::invalid_argument, "leaf tracing needs at least one ray");
  if (!inside(field, p)) throw Error(Status::out_of_support, "base point outside the ring");

  Leaf leaf;
  leaf.p = p;
  leaf.frame = gauge_frame(field.jet(p), field.metric());
  leaf.radius = radius;
  leaf.steps = steps;
  leaf.rays = opt.rays;
  leaf.samples.push_back(make_sample(field, leaf, 0.0, 0.0, -1, 0, opt.min_zz));

  Stepper st{field, leaf, opt.min_zz};
  const double dr = radius / steps;
  for (int m = 0; m < opt.rays; ++m) {
    const cplx dir = std::polar(1.0, 2.0 * M_PI * m / opt.rays);
    std::vector<LeafSample> ray{leaf.samples.front()};
    for (int k = 1; k <= steps; ++k) {
      const LeafSample& prev = ray.back();
      cplx zeta = double(k) * dr * dir;
      cplx h;
      try {
        h = st.advance(prev.zeta, prev.h, zeta - prev.zeta, 1);
      } catch (const Error& e) {
        if (e.status() == Status::out_of_support) {
          leaf.truncated = true;
          break;
        }
        throw;
      }
      Point x = leaf_position(leaf, zeta, h);
      if (!inside(field, x)) {
        leaf.truncated = true;
        break;
      }
      ray.push_back(make_sample(field, leaf, zeta, h, m, k, opt.min_zz));
    }
    // h' along the ray from fourth-order differences.
    for (std::size_t k = 2; k + 2 < ray.size(); ++k) {
      cplx dh = (-ray[k + 2].h + 8.0 * ray[k + 1].h - 8.0 * ray[k - 1].h + ray[k - 2].h) / (12.0 * dr);
      leaf.ode_residual = std::max(leaf.ode_residual, std::abs(dh / dir + ray[k].f));
    }
    leaf.samples.insert(leaf.samples.end(), ray.begin() + 1, ray.end());
  }
  return leaf;
}

LeafSample leaf_point(const ScalarField& field, const Leaf& leaf, cplx zeta, int substeps) {
  if (leaf.samples.empty()) throw Error(Status::invalid_argument, "empty leaf");
  const LeafSample* best = &leaf.samples.front();
  for (const auto& s : leaf.samples)
    if (std::abs(s.zeta - zeta) < std::abs(best->zeta - zeta)) best = &s;
  if (best->zeta == zeta) return *best;
  return continue_from(field, leaf, *best, zeta, std::max(1, substeps));
}

double leaf_harmonicity_residual(const ScalarField& field, const Leaf& leaf) {
  double worst = 0.0;
  for (const auto& s : leaf.samples) {
    Jet w = frame_jet(field, s.x, leaf.frame);
    double zz = w.herm(1, 1).real();
    worst = std::max(worst, std::abs(w.herm(0, 0).real() - std::norm(w.herm(0, 1)) / zz));
  }
  return worst;
}

double leaf_cauchy_riemann_residual(const ScalarField& field, const Leaf& leaf, double delta) {
  if (!(delta > 0)) throw Error(Status::invalid_argument, "delta must be positive");
  double worst = 0.0;
  for (const auto& s : leaf.samples) {
    auto f = [&](cplx d) { return continue_from(field, leaf, s, s.zeta + d, 4).f; };
    cplx fx = (-f(2 * delta) + 8.0 * f(delta) - 8.0 * f(-delta) + f(-2 * delta)) / (12 * delta);
    const cplx i(0, 1);
    cplx fy = (-f(2.0 * i * delta) + 8.0 * f(i * delta) - 8.0 * f(-i * delta) + f(-2.0 * i * delta)) / (12 * delta);
    worst = std::max(worst, 0.5 * std::abs(fx + i * fy));
  }
  return worst;
}

bool LeafwiseReport::passed(double tol) const {
  if (checked == 0) return true;
  switch (which) {
    case LeafQuantity::invQ: return worst >= -tol;
    case LeafQuantity::logS: return worst <= tol;
    default: return std::abs(worst) <= tol;
  }
}

LeafwiseReport leafwise_mp_check(const ScalarField& field, const std::vector<Leaf>& leaves, LeafQuantity which,
                                 const MetricForm& G, const LeafwiseOptions& opt) {
  if (!(opt.delta > 0) || opt.stride < 1) throw Error(Status::invalid_argument, "invalid leafwise options");
  LeafwiseReport rep;
  rep.which = which;
  rep.worst = which == LeafQuantity::invQ ? std::numeric_limits<double>::infinity()
                                          : (which == LeafQuantity::logS ? -std::numeric_limits<double>::infinity() : 0.0);
  const cplx i(0, 1);
  for (std::size_t l = 0; l < leaves.size(); ++l) {
    const Leaf& leaf = leaves[l];
    auto quantity = [&](const LeafSample& s) -> cplx {
      switch (which) {
        case LeafQuantity::invQ: {
          LeafGauge g = leaf_gauge(field, s.x, G);
          if (!(g.a > 0) || !(g.Q < 1.0)) {
            std::ostringstream os;
            os << "Q >= 1 (or a <= 0) on leaf " << l << " at zeta=" << s.zeta << ": a=" << g.a << " Q=" << g.Q;
            throw Error(Status::nonconvex, os.str());
          }
          return 1.0 / (1.0 - g.Q);
        }
        case LeafQuantity::logS: {
          Jet w = frame_jet(field, s.x, leaf.frame);
          return std::log(leaf_S(w, s.f, leaf.frame, G));
        }
        default: return frame_jet(field, s.x, leaf.frame).grad(1);
      }
    };
    for (std::size_t k = 0; k < leaf.samples.size(); k += opt.stride) {
      const LeafSample& s = leaf.samples[k];
      const double d = opt.delta;
      std::vector<LeafSample> nb;
      try {
        for (double m : {1.0, 2.0})
          for (cplx off : {cplx(d), cplx(-d), i * d, -i * d}) {
            LeafSample q = continue_from(field, leaf, s, s.zeta + m * off, 2);
            if (!inside(field, q.x)) throw Error(Status::out_of_support, "stencil leaves the ring");
            nb.push_back(q);
          }
      } catch (const Error& e) {
        if (e.status() == Status::nonconvex) throw;
        continue;
      }
      // Five-point Laplacians at spacings d and 2d, Richardson-combined to fourth order.
      const cplx c = quantity(s);
      cplx l1 = -4.0 * c, l2 = -4.0 * c;
      for (int q = 0; q < 4; ++q) {
        l1 += quantity(nb[q]);
        l2 += quantity(nb[q + 4]);
      }
      l1 /= d * d;
      l2 /= 4.0 * d * d;
      cplx lap = (4.0 * l1 - l2) / 12.0;  // d_zeta d_zetabar = Laplacian / 4
      ++rep.checked;
      bool worse = false;
      switch (which) {
        case LeafQuantity::invQ: worse = lap.real() < rep.worst; break;
        case LeafQuantity::logS: worse = lap.real() > rep.worst; break;
        default: worse = std::abs(lap) > std::abs(rep.worst);
      }
      if (worse) {
        rep.worst = which == LeafQuantity::grad_z ? std::abs(lap) : lap.real();
        rep.location = s.x;
        rep.zeta = s.zeta;
        rep.leaf = static_cast<int>(l);
      }
    }
  }
  if (rep.checked == 0) rep.worst = 0.0;
  return rep;
}

void write_leaf_csv(std::ostream& os, const ScalarField& field, const Leaf& leaf, const MetricForm& G) {
  os << "zeta_re,zeta_im,z1_re,z1_im,z2_re,z2_im,phi,S,Q\n";
  os.precision(12);
  for (const auto& s : leaf.samples) {
    Jet w = frame_jet(field, s.x, leaf.frame);
    double S = leaf_S(w, s.f, leaf.frame, G);
    double Q = std::numeric_limits<double>::quiet_NaN();
    try {
      Q = leaf_gauge(field, s.x, G).Q;
    } catch (const Error&) {
    }
    os << s.zeta.real() << ',' << s.zeta.imag() << ',' << s.x(0).real() << ',' << s.x(0).imag() << ','
       << s.x(1).real() << ',' << s.x(1).imag() << ',' << s.value << ',' << S << ',' << Q << '\n';
  }
}

}  // namespace cmlab
