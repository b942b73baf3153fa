#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/calg.hpp"

namespace cmlab {

// Value, gradient and Hessian of a real function in interleaved real
// coordinates (x1, y1, x2, y2, ...).
struct RealJet {
  double value = 0.0;
  RVec grad;
  RMat hess;
};

using RealCallback = std::function<RealJet(const RVec&)>;

struct BoundarySample {
  RVec x;       // point on the boundary
  RVec normal;  // unit outward normal (real, Euclidean)
};

struct Projection {
  RVec foot;
  RVec normal;       // unit outward normal at the foot point
  double signed_distance = 0.0;  // positive outside
  int iterations = 0;
};

struct BoundaryGraph {
  Point p;
  CMat frame;             // unitary; columns are the tangent directions then the normal slot
  QuadraticGauge restricted;  // second-order expansion of the graph on the tangent plane
  double gradient_norm = 0.0; // |d rho| at p (complex norm)
};

class SmoothDomain {
 public:
  enum class Kind { ball, ellipsoid, callback };

  static SmoothDomain ball(const Point& center, double radius);
  // {(z-c)^T H conj(z-c) < 1}
  static SmoothDomain ellipsoid(const CMat& H, const Point& center);
  static SmoothDomain callback(int n, RealCallback rho, const Point& center, std::string name,
                               double scale = 1.0);
  // Cassini-type peanut {((x1-a)^2+w)((x1+a)^2+w) < b^4}, w the other squared coordinates.
  static SmoothDomain dumbbell(double a, double b);

  Kind kind() const { return kind_; }
  int n() const { return n_; }
  const Point& center() const { return center_; }
  const CMat& H() const { return H_; }
  double radius() const { return radius_; }
  const std::string& name() const { return name_; }
  double scale() const { return scale_; }
  const std::vector<double>& params() const { return params_; }

  RealJet rho(const RVec& x) const;
  double rho_value(const RVec& x) const { return rho(x).value; }
  bool inside(const RVec& x) const { return rho_value(x) < 0.0; }

  // Closest-point projection onto {rho = 0} by a Newton iteration on the
  // Lagrange system, tolerance 1e-10.
  Projection project(const RVec& p) const;
  // Hessian of the signed distance at a point whose projection is given.
  RMat signed_distance_hessian(const Projection& pr) const;

  // Point where the ray from the center in direction dir meets the boundary.
  RVec ray_hit(const RVec& dir) const;
  std::vector<BoundarySample> sample_boundary(int count) const;

  BoundaryGraph boundary_graph(const Point& p) const;

  // Largest ball around the center contained in the domain (sampled).
  double inradius(int samples = 400) const;

 private:
  Kind kind_ = Kind::ball;
  int n_ = 2;
  Point center_;
  CMat H_;
  double radius_ = 0.0;
  RealCallback cb_;
  std::string name_;
  double scale_ = 1.0;
  std::vector<double> params_;
};

// Quasi-uniform points on the unit sphere of C^n (real dimension 2n).
std::vector<RVec> sphere_points(int n, int count);

struct DomainModulus {
  Convexity modulus;
  RVec witness;
};

// Minimum over sampled boundary points of the restricted-expansion modulus.
DomainModulus cconvexity_modulus(const SmoothDomain& dom, int samples);

class RingDomain {
 public:
  RingDomain(SmoothDomain omega0, SmoothDomain omega1, int samples = 2000);

  const SmoothDomain& omega0() const { return omega0_; }
  const SmoothDomain& omega1() const { return omega1_; }
  int n() const { return omega0_.n(); }
  double thickness() const { return thickness_; }
  double diameter() const { return diameter_; }
  int sample_count() const { return samples_; }
  const std::vector<BoundarySample>& samples0() const { return s0_; }
  const std::vector<BoundarySample>& samples1() const { return s1_; }
  bool contains(const RVec& x) const { return !omega0_.inside(x) && omega1_.inside(x); }
  bool interior(const RVec& x) const;

  // Ball rings centered at the origin.
  bool is_centered_ball_ring() const;
  // Both ellipsoids diagonal and centered at the origin.
  bool is_reinhardt() const;

 private:
  SmoothDomain omega0_, omega1_;
  int samples_;
  double thickness_ = 0.0, diameter_ = 0.0;
  std::vector<BoundarySample> s0_, s1_;
};

struct DeformationOptions {
  std::optional<double> r;  // inner target radius
  std::optional<double> R;  // outer target radius
  int samples = 400;
};

RingDomain deformation_family(const RingDomain& ring, double t, const DeformationOptions& opt = {});

struct SubsolutionOptions {
  double c = 0.05;
  std::optional<double> delta_h;     // gluing band half-width
  std::optional<double> collar0;     // inner collar width
  std::optional<double> collar1;     // outer collar width
  int samples = 2000;                // interior samples for the margin
  std::uint64_t seed = 7;
};

struct OrderingReport {
  bool outer_boundary = true;   // F < 1 = f1 on the outer boundary
  bool outer_collar = true;     // F > 0 > f1 on the inner edge of the outer collar
  bool inner_collar = true;     // F > f0 on the outer edge of the inner collar
  bool inner_boundary = true;   // F < 0 = f0 on the inner boundary
  double min_gap = 0.0;         // smallest |F - f| over the four sets
  std::string failures() const;
  bool ok() const { return outer_boundary && outer_collar && inner_collar && inner_boundary; }
};

class Subsolution {
 public:
  Subsolution(const RingDomain& ring, const MetricForm& G, const SubsolutionOptions& opt);

  RealJet eval(const RVec& x) const;
  RealJet F(const RVec& x) const;
  double sigma() const { return sigma_; }
  double delta_h() const { return delta_h_; }
  double collar0() const { return collar0_; }
  double collar1() const { return collar1_; }
  double c() const { return c_; }
  const OrderingReport& ordering() const { return ordering_; }
  double boundary_error0() const { return err0_; }
  double boundary_error1() const { return err1_; }
  double min_normal_derivative0() const { return min_dn0_; }
  const RingDomain& ring() const { return ring_; }

 private:
  RealJet f0(const RVec& x, const Projection& pr) const;
  RealJet f1(const RVec& x, const Projection& pr) const;

  RingDomain ring_;
  MetricForm G_;
  double c_, delta_h_ = 0.0, collar0_ = 0.0, collar1_ = 0.0;
  double sigma_ = 0.0, err0_ = 0.0, err1_ = 0.0, min_dn0_ = 0.0;
  OrderingReport ordering_;
};

// Complex Hessian (Phi_{i jbar}) from a real Hessian in interleaved coordinates.
CMat complex_hessian(const RMat& hess);
// Complex gradient (Phi_i) from a real gradient.
CVec complex_gradient(const RVec& grad);
// Holomorphic Hessian (Phi_{ij}).
CMat holomorphic_hessian(const RMat& hess);

}  // namespace cmlab
