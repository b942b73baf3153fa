#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/calg.hpp"
#include "cmlab/domain.hpp"

namespace cmlab {

// Wirtinger jet: grad_i = Phi_i, herm(i,j) = Phi_{i jbar}, hol(i,j) = Phi_{ij}.
struct Jet {
  Point z;
  double value = 0.0;
  CVec grad;
  CMat herm;
  CMat hol;
};

Jet jet_from_real(const Point& z, const RealJet& r);
// Jet of Phi o M at M^{-1} z, i.e. the jet seen in coordinates z = M z'.
Jet transform_jet(const Jet& j, const CMat& M);
MetricForm transform_metric(const MetricForm& g, const CMat& M);

double gradient_norm(const Jet& j, const MetricForm& G);  // |d Phi|_G, complex norm

struct TangentGauge {
  CMat A;
  CMat B;
  std::optional<KappaSpectrum> kappa;  // absent when A is not positive definite
  bool convex = false;                 // A positive definite and max eig K < 1
  double grad_norm = 0.0;
  std::optional<double> S;  // absent when the complex Hessian is not invertible
  bool S_unreliable = false;
  double W = 0.0;
  double V = 0.0;
  CMat frame;  // columns: tangent directions then the gradient slot, in z coordinates
  double sigma() const { return kappa && kappa->sigma ? *kappa->sigma : std::numeric_limits<double>::infinity(); }
};

TangentGauge tangent_gauge(const Jet& j, const MetricForm& G, double eps);

// min(|d Phi|_G, modulus of the restricted Taylor gauge); nonconvex marker otherwise.
Convexity qc_modulus(const Jet& j, const MetricForm& G);
// Modulus of C-convexity of the level set through the jet's point.
Convexity levelset_modulus(const Jet& j, const MetricForm& G);

struct SamplePoint {
  Point z;
  Jet jet;
  int boundary = -1;  // -1 interior, 0 inner boundary, 1 outer boundary
  RVec normal;        // unit outward normal of the ring (boundary samples only)
};

struct SampleOptions {
  int interior = 2000;    // analytic fields: interior sample count
  int directions = 6;     // radial fields: directions per node
  int stride = 1;         // grid fields: node stride
  std::uint64_t seed = 99;
};

class ScalarField {
 public:
  enum class Rep { analytic, radial, reinhardt, full };
  virtual ~ScalarField() = default;

  virtual Rep rep() const = 0;
  virtual int n() const { return 2; }
  virtual double value(const Point& z) const = 0;
  virtual Jet jet(const Point& z) const = 0;
  // Characteristic grid spacing in the ambient coordinates (0 for analytic fields).
  virtual double spacing() const { return 0.0; }
  virtual std::vector<SamplePoint> samples(const SampleOptions& opt) const = 0;
  // Points on {Phi = t} with interpolated jets.
  virtual std::vector<SamplePoint> level_set(double t, const SampleOptions& opt) const = 0;
  // Node values for nodewise comparisons (value, point).
  virtual std::vector<std::pair<Point, double>> node_values() const = 0;

  double eps() const { return eps_; }
  void set_eps(double e) { eps_ = e; }
  const MetricForm& metric() const { return G_; }
  void set_metric(const MetricForm& g) { G_ = g; }
  const RingDomain* ring() const { return ring_ ? &*ring_ : nullptr; }
  void set_ring(const RingDomain& r) { ring_.emplace(r); }

 protected:
  double eps_ = 0.0;
  MetricForm G_ = MetricForm::identity(2);
  std::optional<RingDomain> ring_;
};

using FieldPtr = std::shared_ptr<ScalarField>;

// Analytic fields: closed-form jets.
struct AnalyticSpec {
  std::string kind;  // quadratic | log_hermitian | callback
  CMat A, B, H;
  CVec L;
  double c = 0.0;  // constant term
  double a = 0.0;  // log coefficient
};

class AnalyticField : public ScalarField {
 public:
  using JetFn = std::function<Jet(const Point&)>;
  AnalyticField(int n, JetFn fn, AnalyticSpec spec);

  // z^T A conj(z) + Re(z^T B z) + Re(L^T z) + c
  static std::shared_ptr<AnalyticField> quadratic(const CMat& A, const CMat& B, const CVec& L = CVec(),
                                                  double c = 0.0);
  // a log(z^T H conj(z)) + c
  static std::shared_ptr<AnalyticField> log_hermitian(const CMat& H, double a, double c = 0.0);
  // (log|z| - log r) / (log R - log r) on C^n
  static std::shared_ptr<AnalyticField> radial_log(int n, double r, double R);
  static std::shared_ptr<AnalyticField> from_real(int n, RealCallback cb, const std::string& name);

  Rep rep() const override { return Rep::analytic; }
  int n() const override { return n_; }
  double value(const Point& z) const override { return fn_(z).value; }
  Jet jet(const Point& z) const override { return fn_(z); }
  std::vector<SamplePoint> samples(const SampleOptions& opt) const override;
  std::vector<SamplePoint> level_set(double t, const SampleOptions& opt) const override;
  std::vector<std::pair<Point, double>> node_values() const override;
  const AnalyticSpec& spec() const { return spec_; }

 private:
  int n_;
  JetFn fn_;
  AnalyticSpec spec_;
};

// Radial profile f(s), s = log|z|, on a uniform grid with f(log r) = 0, f(log R) = 1.
class RadialField : public ScalarField {
 public:
  RadialField(int n, double r, double R, std::vector<double> values);
  Rep rep() const override { return Rep::radial; }
  int n() const override { return n_; }
  double value(const Point& z) const override;
  Jet jet(const Point& z) const override;
  double spacing() const override;
  std::vector<SamplePoint> samples(const SampleOptions& opt) const override;
  std::vector<SamplePoint> level_set(double t, const SampleOptions& opt) const override;
  std::vector<std::pair<Point, double>> node_values() const override;

  double r() const { return r_; }
  double R() const { return R_; }
  int size() const { return static_cast<int>(f_.size()); }
  double h() const { return h_; }
  double s(int k) const { return std::log(r_) + k * h_; }
  const std::vector<double>& values() const { return f_; }
  // Profile derivatives at node k (second order).
  std::array<double, 3> node_derivs(int k) const;
  // Profile value and derivatives at an arbitrary s.
  std::array<double, 3> profile(double s) const;
  Jet jet_from_profile(const Point& z, const std::array<double, 3>& d) const;

 private:
  int n_;
  double r_, R_, h_;
  std::vector<double> f_;
  std::vector<std::array<double, 3>> d_;
};

// Reinhardt field u(x, y), x = |z1|^2, y = |z2|^2, on the boundary-fitted grid
// (x, y) = ((1 - q) a(t), q b(t)), a(t) = a0 + t (a1 - a0), b(t) = b0 + t (b1 - b0),
// where {x / a_k + y / b_k < 1} are the two ellipsoids.
class ReinhardtGrid {
 public:
  ReinhardtGrid(double a0, double b0, double a1, double b1, int nt, int nq);
  int nt() const { return nt_; }
  int nq() const { return nq_; }
  int size() const { return nt_ * nq_; }
  int index(int i, int j) const { return i * nq_ + j; }
  double a0() const { return a0_; }
  double b0() const { return b0_; }
  double a1() const { return a1_; }
  double b1() const { return b1_; }
  std::array<double, 2> xy(int i, int j) const;
  std::array<double, 2> xy_at(double t, double q) const;
  // Inverse map; returns false outside the closed ring.
  bool tq(double x, double y, double& t, double& q) const;

  struct Stencil {
    std::vector<std::pair<int, double>> rows[5];  // U_t, U_q, U_tt, U_tq, U_qq
    Eigen::Matrix<double, 5, 5> C;                 // (ux, uy, uxx, uxy, uyy) = C (U_t, ...)
  };
  const Stencil& stencil(int i, int j) const { return st_[index(i, j)]; }
  // (u, ux, uy, uxx, uxy, uyy) at node (i, j).
  std::array<double, 6> derivs(const std::vector<double>& U, int i, int j) const;

 private:
  double a0_, b0_, a1_, b1_;
  int nt_, nq_;
  std::vector<Stencil> st_;
};

// Complex jet at z from the Reinhardt derivative data (u, ux, uy, uxx, uxy, uyy).
Jet reinhardt_jet(const Point& z, const std::array<double, 6>& d);

class ReinhardtField : public ScalarField {
 public:
  ReinhardtField(ReinhardtGrid grid, std::vector<double> values);
  Rep rep() const override { return Rep::reinhardt; }
  double value(const Point& z) const override;
  Jet jet(const Point& z) const override;
  double spacing() const override;
  std::vector<SamplePoint> samples(const SampleOptions& opt) const override;
  std::vector<SamplePoint> level_set(double t, const SampleOptions& opt) const override;
  std::vector<std::pair<Point, double>> node_values() const override;

  const ReinhardtGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return U_; }
  const std::array<double, 6>& node_data(int i, int j) const { return data_[grid_.index(i, j)]; }
  Point node_point(int i, int j) const;

 private:
  std::array<double, 6> interpolate(double x, double y) const;
  ReinhardtGrid grid_;
  std::vector<double> U_;
  std::vector<std::array<double, 6>> data_;
};

// Uniform 4-D grid over a box containing the ring (n = 2).
class FullGrid {
 public:
  FullGrid(const RingDomain& ring, int N, double margin = 0.0);
  int N() const { return N_; }
  int size() const { return N_ * N_ * N_ * N_; }
  double h() const { return h_; }
  double lo() const { return lo_; }
  double margin() const { return margin_; }
  RVec point(int idx) const;
  std::array<int, 4> coords(int idx) const;
  int index(const std::array<int, 4>& c) const;
  bool interior(int idx) const { return mask_[idx] != 0; }
  const std::vector<int>& interior_nodes() const { return nodes_; }
  const RingDomain& ring() const { return ring_; }

  // Directions used for second derivatives: 4 axes then 12 diagonals (e_k + e_l, e_k - e_l).
  static constexpr int kDirs = 16;
  const std::array<int, 4>& dir(int d) const { return dirs_[d]; }

  // Neighbor along +/- direction d: either a node index, or a boundary crossing at
  // fraction theta of the step with Dirichlet value bc.
  struct Arm {
    int node = -1;
    double theta = 1.0;
    double bc = 0.0;
  };
  Arm arm(int idx, int d, int sign) const;

  // Three-point second derivative along direction d and first derivative along axis k.
  double second(const std::vector<double>& U, int idx, int d, double* center_weight = nullptr) const;
  double first(const std::vector<double>& U, int idx, int axis) const;
  RealJet real_jet(const std::vector<double>& U, int idx) const;
  // Position of a node in interior_nodes(), or -1.
  int position(int idx) const { return pos_[idx]; }

 private:
  Arm compute_arm(int idx, int d, int sign) const;
  RingDomain ring_;
  int N_;
  double margin_ = 0.0;
  double lo_, h_;
  std::vector<char> mask_;
  std::vector<int> nodes_, pos_;
  std::vector<Arm> arms_;
  std::array<std::array<int, 4>, kDirs> dirs_;
};

class FullField : public ScalarField {
 public:
  FullField(std::shared_ptr<const FullGrid> grid, std::vector<double> values);
  Rep rep() const override { return Rep::full; }
  double value(const Point& z) const override;
  Jet jet(const Point& z) const override;
  double spacing() const override { return grid_->h(); }
  std::vector<SamplePoint> samples(const SampleOptions& opt) const override;
  std::vector<SamplePoint> level_set(double t, const SampleOptions& opt) const override;
  std::vector<std::pair<Point, double>> node_values() const override;

  const FullGrid& grid() const { return *grid_; }
  std::shared_ptr<const FullGrid> grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return U_; }
  Jet node_jet(int idx) const;

 private:
  int nearest_interior(const RVec& x) const;
  std::shared_ptr<const FullGrid> grid_;
  std::vector<double> U_;
};

// Pluriharmonic quadratic q = Re(c_i z^i + d_ij z^i z^j) subtracted from a jet.
Jet subtract_pluriharmonic(const Jet& j, const CVec& c, const CMat& d);

struct RobustnessResult {
  double eps = 0.0;
  double min_gradient = 0.0;
  int samples = 0;
};

RobustnessResult robustness_probe(const ScalarField& field, const MetricForm& G, double eps_max, int trials,
                                  const SampleOptions& opt = {});

}  // namespace cmlab
