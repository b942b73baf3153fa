#include <algorithm>
#include <cmath>
#include <limits>

#include "cmlab/field.hpp"

namespace cmlab {

namespace {
std::vector<int> strided(int N, int stride) {
  std::vector<int> v;
  for (int i = 0; i < N; i += std::max(1, stride)) v.push_back(i);
  if (v.back() != N - 1) v.push_back(N - 1);
  return v;
}
}  // namespace

// ---------------------------------------------------------------------------
// Radial

RadialField::RadialField(int n, double r, double R, std::vector<double> values)
    : n_(n), r_(r), R_(R), f_(std::move(values)) {
  if (n_ < 2) throw Error(Status::invalid_argument, "radial fields need n >= 2");
  if (!(r_ > 0 && R_ > r_)) throw Error(Status::invalid_argument, "radial field needs 0 < r < R");
  if (f_.size() < 5) throw Error(Status::invalid_argument, "radial grid needs at least 5 nodes");
  for (double v : f_)
    if (!std::isfinite(v)) throw Error(Status::format_error, "non-finite radial value");
  h_ = std::log(R_ / r_) / (f_.size() - 1);
  G_ = MetricForm::identity(n_);
  d_.resize(f_.size());
  for (int k = 0; k < size(); ++k) d_[k] = node_derivs(k);
}

std::array<double, 3> RadialField::node_derivs(int k) const {
  const int N = size();
  const double h = h_;
  const auto& f = f_;
  if (k > 0 && k < N - 1)
    return {f[k], (f[k + 1] - f[k - 1]) / (2 * h), (f[k + 1] - 2 * f[k] + f[k - 1]) / (h * h)};
  if (k == 0)
    return {f[0], (-1.5 * f[0] + 2 * f[1] - 0.5 * f[2]) / h, (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / (h * h)};
  return {f[k], (1.5 * f[k] - 2 * f[k - 1] + 0.5 * f[k - 2]) / h,
          (2 * f[k] - 5 * f[k - 1] + 4 * f[k - 2] - f[k - 3]) / (h * h)};
}

std::array<double, 3> RadialField::profile(double s) const {
  const double s0 = std::log(r_);
  double x = (s - s0) / h_;
  const int N = size();
  if (x < -1e-9 || x > N - 1 + 1e-9) throw Error(Status::out_of_support, "point outside the radial grid");
  x = std::clamp(x, 0.0, double(N - 1));
  int k = std::min(static_cast<int>(std::floor(x)), N - 2);
  double u = x - k;
  if (u < 1e-12) return d_[k];
  if (u > 1 - 1e-12) return d_[k + 1];
  const auto &a = d_[k], &b = d_[k + 1];
  double h00 = 2 * u * u * u - 3 * u * u + 1, h10 = u * u * u - 2 * u * u + u;
  double h01 = -2 * u * u * u + 3 * u * u, h11 = u * u * u - u * u;
  double v = h00 * a[0] + h10 * h_ * a[1] + h01 * b[0] + h11 * h_ * b[1];
  return {v, (1 - u) * a[1] + u * b[1], (1 - u) * a[2] + u * b[2]};
}

Jet RadialField::jet_from_profile(const Point& z, const std::array<double, 3>& d) const {
  const double r2 = z.squaredNorm();
  CVec s1 = z.conjugate() / (2 * r2);
  CMat I = CMat::Identity(n_, n_);
  CMat s11 = (r2 * I - z.conjugate() * z.transpose()) / (2 * r2 * r2);
  CMat s2 = -z.conjugate() * z.adjoint() / (2 * r2 * r2);
  Jet j;
  j.z = z;
  j.value = d[0];
  j.grad = d[1] * s1;
  j.herm = d[1] * s11 + d[2] * s1 * s1.adjoint();
  j.hol = d[1] * s2 + d[2] * s1 * s1.transpose();
  return j;
}

double RadialField::value(const Point& z) const { return profile(std::log(z.norm()))[0]; }

Jet RadialField::jet(const Point& z) const {
  if (z.size() != n_) throw Error(Status::dimension_mismatch, "point dimension mismatch");
  return jet_from_profile(z, profile(std::log(z.norm())));
}

double RadialField::spacing() const { return R_ * h_; }

namespace {
std::vector<Point> radial_directions(int n, int count) {
  std::vector<Point> out;
  for (const auto& d : sphere_points(n, std::max(1, count))) out.push_back(from_real(d));
  return out;
}
}  // namespace

std::vector<SamplePoint> RadialField::samples(const SampleOptions& opt) const {
  std::vector<SamplePoint> out;
  const int N = size();
  auto dirs = radial_directions(n_, opt.directions);
  for (int k : strided(N, opt.stride))
    for (const auto& d : dirs) {
      Point z = std::exp(s(k)) * d;
      SamplePoint p{z, jet_from_profile(z, d_[k]), -1, RVec()};
      if (k == 0) {
        p.boundary = 0;
        p.normal = -to_real(d);
      } else if (k == N - 1) {
        p.boundary = 1;
        p.normal = to_real(d);
      }
      out.push_back(p);
    }
  return out;
}

std::vector<SamplePoint> RadialField::level_set(double t, const SampleOptions& opt) const {
  const int N = size();
  int k = -1;
  for (int i = 0; i + 1 < N; ++i)
    if ((f_[i] - t) * (f_[i + 1] - t) <= 0 && f_[i] != f_[i + 1]) {
      k = i;
      break;
    }
  if (k < 0) throw Error(Status::out_of_support, "level set is empty on the radial grid");
  double lo = s(k), hi = s(k + 1);
  bool inc = f_[k + 1] > f_[k];
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    ((profile(mid)[0] < t) == inc ? lo : hi) = mid;
  }
  double sm = 0.5 * (lo + hi);
  auto d = profile(sm);
  std::vector<SamplePoint> out;
  for (const auto& dir : radial_directions(n_, opt.directions)) {
    Point z = std::exp(sm) * dir;
    out.push_back({z, jet_from_profile(z, d), -1, RVec()});
  }
  return out;
}

std::vector<std::pair<Point, double>> RadialField::node_values() const {
  std::vector<std::pair<Point, double>> out;
  for (const auto& d : radial_directions(n_, 6))
    for (int k = 0; k < size(); ++k) out.emplace_back(std::exp(s(k)) * d, f_[k]);
  return out;
}

// ---------------------------------------------------------------------------
// Reinhardt

namespace {

using Weights = std::vector<std::pair<int, double>>;

Weights first_weights(int i, int N, double h) {
  if (i > 0 && i < N - 1) return {{-1, -0.5 / h}, {1, 0.5 / h}};
  if (i == 0) return {{0, -1.5 / h}, {1, 2.0 / h}, {2, -0.5 / h}};
  return {{0, 1.5 / h}, {-1, -2.0 / h}, {-2, 0.5 / h}};
}

Weights second_weights(int i, int N, double h) {
  double h2 = h * h;
  if (i > 0 && i < N - 1) return {{-1, 1 / h2}, {0, -2 / h2}, {1, 1 / h2}};
  if (i == 0) return {{0, 2 / h2}, {1, -5 / h2}, {2, 4 / h2}, {3, -1 / h2}};
  return {{0, 2 / h2}, {-1, -5 / h2}, {-2, 4 / h2}, {-3, -1 / h2}};
}

}  // namespace

ReinhardtGrid::ReinhardtGrid(double a0, double b0, double a1, double b1, int nt, int nq)
    : a0_(a0), b0_(b0), a1_(a1), b1_(b1), nt_(nt), nq_(nq) {
  if (!(a0 > 0 && b0 > 0 && a1 > a0 && b1 > b0))
    throw Error(Status::invalid_argument, "Reinhardt grid needs nested diagonal ellipsoids");
  if (nt < 5 || nq < 5) throw Error(Status::invalid_argument, "Reinhardt grid needs at least 5 nodes per axis");
  const double ht = 1.0 / (nt - 1), hq = 1.0 / (nq - 1);
  const double da = a1 - a0, db = b1 - b0;
  st_.resize(size());
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nq; ++j) {
      Stencil& s = st_[index(i, j)];
      Weights ft = first_weights(i, nt, ht), fq = first_weights(j, nq, hq);
      for (auto [o, w] : ft) s.rows[0].push_back({index(i + o, j), w});
      for (auto [o, w] : fq) s.rows[1].push_back({index(i, j + o), w});
      for (auto [o, w] : second_weights(i, nt, ht)) s.rows[2].push_back({index(i + o, j), w});
      for (auto [o1, w1] : ft)
        for (auto [o2, w2] : fq) s.rows[3].push_back({index(i + o1, j + o2), w1 * w2});
      for (auto [o, w] : second_weights(j, nq, hq)) s.rows[4].push_back({index(i, j + o), w});

      const double t = i * ht, q = j * hq;
      const double a = a0 + t * da, b = b0 + t * db;
      Eigen::Matrix2d J;
      J << (1 - q) * da, -a, q * db, b;
      Eigen::Matrix2d K = J.inverse().transpose();
      for (int m = 0; m < 5; ++m) {
        Eigen::Matrix<double, 5, 1> D = Eigen::Matrix<double, 5, 1>::Zero();
        D[m] = 1.0;
        Eigen::Vector2d g = K * Eigen::Vector2d(D[0], D[1]);
        Eigen::Matrix2d Htq;
        Htq << D[2], D[3], D[3], D[4];
        Eigen::Matrix2d X2, Y2;
        X2 << 0, -da, -da, 0;
        Y2 << 0, db, db, 0;
        Eigen::Matrix2d Hxy = K * (Htq - g[0] * X2 - g[1] * Y2) * K.transpose();
        s.C.col(m) << g[0], g[1], Hxy(0, 0), Hxy(0, 1), Hxy(1, 1);
      }
    }
}

std::array<double, 2> ReinhardtGrid::xy_at(double t, double q) const {
  return {(1 - q) * (a0_ + t * (a1_ - a0_)), q * (b0_ + t * (b1_ - b0_))};
}

std::array<double, 2> ReinhardtGrid::xy(int i, int j) const {
  return xy_at(double(i) / (nt_ - 1), double(j) / (nq_ - 1));
}

bool ReinhardtGrid::tq(double x, double y, double& t, double& q) const {
  if (x < -1e-14 || y < -1e-14) return false;
  x = std::max(x, 0.0);
  y = std::max(y, 0.0);
  auto phi = [&](double s) { return x / (a0_ + s * (a1_ - a0_)) + y / (b0_ + s * (b1_ - b0_)) - 1.0; };
  const double tol = 1e-10;
  double p0 = phi(0.0), p1 = phi(1.0);
  if (p0 < -tol || p1 > tol) return false;
  if (p0 <= 0) {
    t = 0.0;
  } else if (p1 >= 0) {
    t = 1.0;
  } else {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      double mid = 0.5 * (lo + hi);
      (phi(mid) > 0 ? lo : hi) = mid;
    }
    t = 0.5 * (lo + hi);
  }
  q = std::clamp(y / (b0_ + t * (b1_ - b0_)), 0.0, 1.0);
  return true;
}

std::array<double, 6> ReinhardtGrid::derivs(const std::vector<double>& U, int i, int j) const {
  const Stencil& s = stencil(i, j);
  Eigen::Matrix<double, 5, 1> D;
  for (int m = 0; m < 5; ++m) {
    double v = 0.0;
    for (auto [k, w] : s.rows[m]) v += w * U[k];
    D[m] = v;
  }
  Eigen::Matrix<double, 5, 1> u = s.C * D;
  return {U[index(i, j)], u[0], u[1], u[2], u[3], u[4]};
}

Jet reinhardt_jet(const Point& z, const std::array<double, 6>& d) {
  if (z.size() != 2) throw Error(Status::dimension_mismatch, "Reinhardt fields live on C^2");
  const double ux[2] = {d[1], d[2]};
  const double uxx[2][2] = {{d[3], d[4]}, {d[4], d[5]}};
  Jet j;
  j.z = z;
  j.value = d[0];
  j.grad.resize(2);
  j.herm.resize(2, 2);
  j.hol.resize(2, 2);
  for (int a = 0; a < 2; ++a) {
    j.grad[a] = ux[a] * std::conj(z[a]);
    for (int b = 0; b < 2; ++b) {
      j.herm(a, b) = (a == b ? ux[a] : 0.0) + std::conj(z[a]) * z[b] * uxx[a][b];
      j.hol(a, b) = uxx[a][b] * std::conj(z[a]) * std::conj(z[b]);
    }
  }
  return j;
}

ReinhardtField::ReinhardtField(ReinhardtGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), U_(std::move(values)) {
  if (static_cast<int>(U_.size()) != grid_.size()) throw Error(Status::format_error, "Reinhardt value count mismatch");
  for (double v : U_)
    if (!std::isfinite(v)) throw Error(Status::format_error, "non-finite Reinhardt value");
  data_.resize(U_.size());
  for (int i = 0; i < grid_.nt(); ++i)
    for (int j = 0; j < grid_.nq(); ++j) data_[grid_.index(i, j)] = grid_.derivs(U_, i, j);
}

Point ReinhardtField::node_point(int i, int j) const {
  auto p = grid_.xy(i, j);
  Point z(2);
  z << cplx(std::sqrt(p[0]), 0.0), cplx(std::sqrt(p[1]), 0.0);
  return z;
}

std::array<double, 6> ReinhardtField::interpolate(double x, double y) const {
  double t, q;
  if (!grid_.tq(x, y, t, q)) throw Error(Status::out_of_support, "point outside the Reinhardt grid");
  double ft = t * (grid_.nt() - 1), fq = q * (grid_.nq() - 1);
  int i = std::min(static_cast<int>(std::floor(ft)), grid_.nt() - 2);
  int j = std::min(static_cast<int>(std::floor(fq)), grid_.nq() - 2);
  double u = ft - i, v = fq - j;
  auto snap = [](double w) { return w < 1e-9 ? 0.0 : (w > 1 - 1e-9 ? 1.0 : w); };
  u = snap(u);
  v = snap(v);
  std::array<double, 6> out{};
  const auto &d00 = data_[grid_.index(i, j)], &d10 = data_[grid_.index(i + 1, j)];
  const auto &d01 = data_[grid_.index(i, j + 1)], &d11 = data_[grid_.index(i + 1, j + 1)];
  for (int m = 0; m < 6; ++m)
    out[m] = (1 - u) * (1 - v) * d00[m] + u * (1 - v) * d10[m] + (1 - u) * v * d01[m] + u * v * d11[m];
  return out;
}

double ReinhardtField::value(const Point& z) const {
  if (z.size() != 2) throw Error(Status::dimension_mismatch, "Reinhardt fields live on C^2");
  return interpolate(std::norm(z[0]), std::norm(z[1]))[0];
}

Jet ReinhardtField::jet(const Point& z) const {
  if (z.size() != 2) throw Error(Status::dimension_mismatch, "Reinhardt fields live on C^2");
  return reinhardt_jet(z, interpolate(std::norm(z[0]), std::norm(z[1])));
}

double ReinhardtField::spacing() const {
  double w = std::max(std::sqrt(grid_.a1()) - std::sqrt(grid_.a0()), std::sqrt(grid_.b1()) - std::sqrt(grid_.b0()));
  return w / (grid_.nt() - 1);
}

namespace {
RVec ellipsoid_normal(const Point& z, double a, double b) {
  RVec n = RVec::Zero(4);
  n[0] = 2 * z[0].real() / a;
  n[1] = 2 * z[0].imag() / a;
  n[2] = 2 * z[1].real() / b;
  n[3] = 2 * z[1].imag() / b;
  return n / n.norm();
}

}  // namespace

std::vector<SamplePoint> ReinhardtField::samples(const SampleOptions& opt) const {
  std::vector<SamplePoint> out;
  const int nt = grid_.nt();
  for (int i : strided(nt, opt.stride))
    for (int j : strided(grid_.nq(), opt.stride)) {
      Point z = node_point(i, j);
      SamplePoint p{z, reinhardt_jet(z, node_data(i, j)), -1, RVec()};
      if (i == 0) {
        p.boundary = 0;
        p.normal = -ellipsoid_normal(z, grid_.a0(), grid_.b0());
      } else if (i == nt - 1) {
        p.boundary = 1;
        p.normal = ellipsoid_normal(z, grid_.a1(), grid_.b1());
      }
      out.push_back(p);
    }
  return out;
}

std::vector<SamplePoint> ReinhardtField::level_set(double t, const SampleOptions& opt) const {
  std::vector<SamplePoint> out;
  const int nt = grid_.nt();
  for (int j : strided(grid_.nq(), opt.stride))
    for (int i = 0; i + 1 < nt; ++i) {
      double a = U_[grid_.index(i, j)] - t, b = U_[grid_.index(i + 1, j)] - t;
      if (a == b || a * b > 0) continue;
      double th = a / (a - b);
      auto xy = grid_.xy_at((i + th) / (nt - 1), double(j) / (grid_.nq() - 1));
      Point z(2);
      z << std::sqrt(xy[0]), std::sqrt(xy[1]);
      std::array<double, 6> d;
      const auto &d0 = node_data(i, j), &d1 = node_data(i + 1, j);
      for (int m = 0; m < 6; ++m) d[m] = (1 - th) * d0[m] + th * d1[m];
      out.push_back({z, reinhardt_jet(z, d), -1, RVec()});
      break;
    }
  if (out.empty()) throw Error(Status::out_of_support, "level set is empty on the Reinhardt grid");
  return out;
}

std::vector<std::pair<Point, double>> ReinhardtField::node_values() const {
  std::vector<std::pair<Point, double>> out;
  for (int i = 0; i < grid_.nt(); ++i)
    for (int j = 0; j < grid_.nq(); ++j) out.emplace_back(node_point(i, j), U_[grid_.index(i, j)]);
  return out;
}

// ---------------------------------------------------------------------------
// Full 4-D grid

FullGrid::FullGrid(const RingDomain& ring, int N, double margin) : ring_(ring), N_(N), margin_(margin) {
  if (ring.n() != 2) throw Error(Status::invalid_argument, "full grids are implemented for n = 2");
  if (N < 5) throw Error(Status::invalid_argument, "full grid needs at least 5 nodes per axis");
  if (N > 24) throw Error(Status::invalid_argument, "full grid limited to 24 nodes per axis");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : ring.samples1()) {
    lo = std::min(lo, s.x.minCoeff());
    hi = std::max(hi, s.x.maxCoeff());
  }
  // Sampled extents may miss the extreme points slightly.
  double pad = 0.02 * (hi - lo) + margin;
  lo_ = lo - pad;
  h_ = (hi - lo + 2 * pad) / (N - 1);

  int d = 0;
  for (int k = 0; k < 4; ++k) {
    dirs_[d] = {0, 0, 0, 0};
    dirs_[d++][k] = 1;
  }
  for (int k = 0; k < 4; ++k)
    for (int l = k + 1; l < 4; ++l) {
      dirs_[d] = {0, 0, 0, 0};
      dirs_[d][k] = 1;
      dirs_[d++][l] = 1;
      dirs_[d] = {0, 0, 0, 0};
      dirs_[d][k] = 1;
      dirs_[d++][l] = -1;
    }
  mask_.assign(size(), 0);
  for (int idx = 0; idx < size(); ++idx)
    if (ring_.interior(point(idx))) {
      mask_[idx] = 1;
      nodes_.push_back(idx);
    }
  if (nodes_.empty()) throw Error(Status::invalid_argument, "full grid has no interior nodes");
  pos_.assign(size(), -1);
  for (std::size_t k = 0; k < nodes_.size(); ++k) pos_[nodes_[k]] = static_cast<int>(k);
  std::vector<Arm> arms(nodes_.size() * kDirs * 2);
  for (std::size_t k = 0; k < nodes_.size(); ++k)
    for (int d2 = 0; d2 < kDirs; ++d2)
      for (int sg = 0; sg < 2; ++sg) arms[(k * kDirs + d2) * 2 + sg] = compute_arm(nodes_[k], d2, sg ? 1 : -1);
  arms_ = std::move(arms);
}

RVec FullGrid::point(int idx) const {
  auto c = coords(idx);
  RVec x(4);
  for (int k = 0; k < 4; ++k) x[k] = lo_ + h_ * c[k];
  return x;
}

std::array<int, 4> FullGrid::coords(int idx) const {
  std::array<int, 4> c;
  for (int k = 3; k >= 0; --k) {
    c[k] = idx % N_;
    idx /= N_;
  }
  return c;
}

int FullGrid::index(const std::array<int, 4>& c) const {
  int idx = 0;
  for (int k = 0; k < 4; ++k) {
    if (c[k] < 0 || c[k] >= N_) return -1;
    idx = idx * N_ + c[k];
  }
  return idx;
}

FullGrid::Arm FullGrid::arm(int idx, int d, int sign) const {
  if (!arms_.empty() && pos_[idx] >= 0) return arms_[(pos_[idx] * kDirs + d) * 2 + (sign > 0)];
  return compute_arm(idx, d, sign);
}

FullGrid::Arm FullGrid::compute_arm(int idx, int d, int sign) const {
  auto c = coords(idx);
  for (int k = 0; k < 4; ++k) c[k] += sign * dirs_[d][k];
  int nb = index(c);
  Arm a;
  if (nb >= 0 && mask_[nb]) {
    a.node = nb;
    return a;
  }
  RVec x = point(idx), step(4);
  for (int k = 0; k < 4; ++k) step[k] = sign * dirs_[d][k] * h_;
  const SmoothDomain& o0 = ring_.omega0();
  const SmoothDomain& o1 = ring_.omega1();
  bool inner = o0.rho_value(x + step) <= 0.0;
  auto outside = [&](double th) {
    RVec y = x + th * step;
    return inner ? o0.rho_value(y) <= 0.0 : o1.rho_value(y) >= 0.0;
  };
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (outside(mid) ? hi : lo) = mid;
  }
  a.theta = std::max(0.5 * (lo + hi), 1e-3);
  a.bc = inner ? 0.0 : 1.0;
  return a;
}

double FullGrid::second(const std::vector<double>& U, int idx, int d, double* center_weight) const {
  double L = h_ * (d < 4 ? 1.0 : std::sqrt(2.0));
  Arm m = arm(idx, d, -1), p = arm(idx, d, 1);
  double a = m.theta * L, b = p.theta * L;
  double um = m.node >= 0 ? U[m.node] : m.bc, up = p.node >= 0 ? U[p.node] : p.bc;
  double cw = -2.0 / (a * b);
  if (center_weight) *center_weight = cw;
  return 2.0 * (um / (a * (a + b)) + up / (b * (a + b))) + cw * U[idx];
}

double FullGrid::first(const std::vector<double>& U, int idx, int axis) const {
  Arm m = arm(idx, axis, -1), p = arm(idx, axis, 1);
  double a = m.theta * h_, b = p.theta * h_;
  double um = m.node >= 0 ? U[m.node] : m.bc, up = p.node >= 0 ? U[p.node] : p.bc;
  return -b / (a * (a + b)) * um + (b - a) / (a * b) * U[idx] + a / (b * (a + b)) * up;
}

RealJet FullGrid::real_jet(const std::vector<double>& U, int idx) const {
  RealJet j;
  j.value = U[idx];
  j.grad.resize(4);
  j.hess.resize(4, 4);
  for (int k = 0; k < 4; ++k) {
    j.grad[k] = first(U, idx, k);
    j.hess(k, k) = second(U, idx, k);
  }
  int d = 4;
  for (int k = 0; k < 4; ++k)
    for (int l = k + 1; l < 4; ++l) {
      double plus = second(U, idx, d++), minus = second(U, idx, d++);
      j.hess(k, l) = j.hess(l, k) = 0.5 * (plus - minus);
    }
  return j;
}

FullField::FullField(std::shared_ptr<const FullGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), U_(std::move(values)) {
  if (static_cast<int>(U_.size()) != grid_->size()) throw Error(Status::format_error, "full grid value count mismatch");
  for (double v : U_)
    if (!std::isfinite(v)) throw Error(Status::format_error, "non-finite grid value");
}

Jet FullField::node_jet(int idx) const { return jet_from_real(from_real(grid_->point(idx)), grid_->real_jet(U_, idx)); }

double FullField::value(const Point& z) const {
  if (z.size() != 2) throw Error(Status::dimension_mismatch, "full grids live on C^2");
  RVec x = to_real(z);
  const int N = grid_->N();
  std::array<int, 4> base;
  std::array<double, 4> w;
  for (int k = 0; k < 4; ++k) {
    double f = (x[k] - grid_->lo()) / grid_->h();
    if (f < -1e-9 || f > N - 1 + 1e-9) throw Error(Status::out_of_support, "point outside the full grid");
    f = std::clamp(f, 0.0, double(N - 1));
    base[k] = std::min(static_cast<int>(std::floor(f)), N - 2);
    w[k] = f - base[k];
  }
  double v = 0.0;
  for (int corner = 0; corner < 16; ++corner) {
    std::array<int, 4> c = base;
    double wt = 1.0;
    for (int k = 0; k < 4; ++k) {
      int bit = (corner >> k) & 1;
      c[k] += bit;
      wt *= bit ? w[k] : 1 - w[k];
    }
    if (wt != 0.0) v += wt * U_[grid_->index(c)];
  }
  return v;
}

int FullField::nearest_interior(const RVec& x) const {
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (int idx : grid_->interior_nodes()) {
    double d = (grid_->point(idx) - x).squaredNorm();
    if (d < bd) bd = d, best = idx;
  }
  return best;
}

Jet FullField::jet(const Point& z) const {
  if (z.size() != 2) throw Error(Status::dimension_mismatch, "full grids live on C^2");
  Jet j = node_jet(nearest_interior(to_real(z)));
  return j;
}

std::vector<SamplePoint> FullField::samples(const SampleOptions& opt) const {
  std::vector<SamplePoint> out;
  const auto& nodes = grid_->interior_nodes();
  const int stride = std::max(1, opt.stride);
  for (std::size_t k = 0; k < nodes.size(); k += stride) {
    Point z = from_real(grid_->point(nodes[k]));
    out.push_back({z, node_jet(nodes[k]), -1, RVec()});
  }
  const RingDomain& ring = grid_->ring();
  const int bstride = std::max<int>(stride, ring.samples0().size() / 200);
  for (std::size_t k = 0; k < ring.samples0().size(); k += bstride) {
    const auto& s = ring.samples0()[k];
    Jet j = jet(from_real(s.x));
    j.z = from_real(s.x);
    j.value = 0.0;
    out.push_back({j.z, j, 0, -s.normal});
  }
  for (std::size_t k = 0; k < ring.samples1().size(); k += bstride) {
    const auto& s = ring.samples1()[k];
    Jet j = jet(from_real(s.x));
    j.z = from_real(s.x);
    j.value = 1.0;
    out.push_back({j.z, j, 1, s.normal});
  }
  return out;
}

std::vector<SamplePoint> FullField::level_set(double t, const SampleOptions& opt) const {
  std::vector<SamplePoint> out;
  const auto& nodes = grid_->interior_nodes();
  const int stride = std::max(1, opt.stride);
  for (std::size_t k = 0; k < nodes.size(); k += stride) {
    int idx = nodes[k];
    for (int ax = 0; ax < 4; ++ax) {
      auto c = grid_->coords(idx);
      c[ax] += 1;
      int nb = grid_->index(c);
      if (nb < 0 || !grid_->interior(nb)) continue;
      double a = U_[idx] - t, b = U_[nb] - t;
      if (a == b || a * b > 0) continue;
      double th = a / (a - b);
      Jet j0 = node_jet(idx), j1 = node_jet(nb);
      Jet j;
      j.z = (1 - th) * j0.z + th * j1.z;
      j.value = t;
      j.grad = (1 - th) * j0.grad + th * j1.grad;
      j.herm = (1 - th) * j0.herm + th * j1.herm;
      j.hol = (1 - th) * j0.hol + th * j1.hol;
      out.push_back({j.z, j, -1, RVec()});
    }
  }
  if (out.empty()) throw Error(Status::out_of_support, "level set is empty on the full grid");
  return out;
}

std::vector<std::pair<Point, double>> FullField::node_values() const {
  std::vector<std::pair<Point, double>> out;
  for (int idx : grid_->interior_nodes()) out.emplace_back(from_real(grid_->point(idx)), U_[idx]);
  return out;
}

}  // namespace cmlab
