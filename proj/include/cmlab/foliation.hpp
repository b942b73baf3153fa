#pragma once

#include <iosfwd>
#include <vector>

#include "cmlab/field.hpp"

namespace cmlab {

// Coordinates (tau, z) at a point: columns of `frame` are the tau and z directions,
// G-unitary, with Phi_z = 0 and Phi_tau > 0 at the point.
CMat gauge_frame(const Jet& j, const MetricForm& G);

struct LeafGauge {
  double a = 0.0;
  cplx b = 0.0;
  double Q = 0.0;       // |b|^2 / a^2; +inf when a <= 0
  double S_leaf = 0.0;  // |Phi_zeta|^2 / G(d_zeta, conj d_zeta)
  cplx f = 0.0;         // Phi_{tau zbar} / Phi_{z zbar}
  bool convex = false;  // a > 0 and Q < 1
  CMat frame;
};

// Four-term a and three-term b in an arbitrary frame with Phi_tau != 0.
LeafGauge leaf_gauge_in_frame(const Jet& j, const CMat& frame, const MetricForm& G);
// Same, in the gauge frame at p.
LeafGauge leaf_gauge(const ScalarField& field, const Point& p, const MetricForm& G);

struct LeafOptions {
  int rays = 8;
  double min_zz = 1e-6;  // smallest |Phi_{z zbar}| accepted along the trace
};

struct LeafSample {
  cplx zeta;
  Point x;  // phi(zeta) in ambient coordinates
  cplx h;   // z-component in the frame
  cplx f;
  double value = 0.0;
  int ray = -1;  // -1 for the base point
  int step = 0;
};

struct Leaf {
  Point p;
  CMat frame;
  double radius = 0.0;
  int steps = 0;
  int rays = 0;
  std::vector<LeafSample> samples;  // base point first, then ray by ray
  bool truncated = false;           // some ray left the ring
  double ode_residual = 0.0;        // max |h' + f| by fourth-order differences along rays
};

// phi(zeta) = p + frame (zeta, h(zeta)), h' = -f, RK4 along rays of the zeta-disc.
Leaf leaf_trace(const ScalarField& field, const Point& p, double radius, int steps, const LeafOptions& opt = {});

// Point of the leaf at zeta, continued from the nearest traced sample along a short path.
LeafSample leaf_point(const ScalarField& field, const Leaf& leaf, cplx zeta, int substeps = 8);

// max |Phi_{zeta zetabar}| = |Phi_{tau taubar} - |Phi_{tau zbar}|^2 / Phi_{z zbar}| over samples.
double leaf_harmonicity_residual(const ScalarField& field, const Leaf& leaf);
// max |d f / d zetabar| over samples by fourth-order differences.
double leaf_cauchy_riemann_residual(const ScalarField& field, const Leaf& leaf, double delta = 1e-3);

enum class LeafQuantity { invQ, logS, grad_z };

struct LeafwiseReport {
  LeafQuantity which = LeafQuantity::invQ;
  // invQ: most negative (g)_{zeta zetabar}; logS: most positive; grad_z: largest modulus.
  double worst = 0.0;
  Point location;
  cplx zeta = 0.0;
  int leaf = -1;
  int checked = 0;
  bool passed(double tol) const;
};

struct LeafwiseOptions {
  double delta = 2e-3;  // stencil spacing in zeta
  int stride = 1;       // use every stride-th sample
};

LeafwiseReport leafwise_mp_check(const ScalarField& field, const std::vector<Leaf>& leaves, LeafQuantity which,
                                 const MetricForm& G, const LeafwiseOptions& opt = {});

// zeta, phi(zeta), Phi, S, Q per sample.
void write_leaf_csv(std::ostream& os, const ScalarField& field, const Leaf& leaf, const MetricForm& G);

}  // namespace cmlab
