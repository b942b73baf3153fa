#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cmlab {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

enum class Status {
  ok = 0,
  invalid_argument,
  dimension_mismatch,
  not_positive_definite,
  nonconvex,
  singular,
  solver_failure,
  out_of_support,
  io_error,
  format_error,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status s, const std::string& msg) : std::runtime_error(msg), status_(s) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

// A point of C^n stored as complex coordinates.
using Point = CVec;

// Real coordinates (x1, y1, x2, y2, ...) of a point.
RVec to_real(const Point& z);
Point from_real(const RVec& v);

}  // namespace cmlab
