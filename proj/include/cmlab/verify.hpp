#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmlab/field.hpp"

namespace cmlab {

struct CheckReport {
  std::string id;
  bool pass = false;
  double margin = 0.0;  // signed slack; pass iff margin >= -tolerance
  double tolerance = 0.0;
  Point witness;
  std::vector<std::pair<std::string, double>> tolerances;  // every tolerance that entered
  std::vector<std::pair<std::string, double>> parts;       // sub-check margins and measured sides
  std::vector<double> trend;                               // margins over refinement levels, coarse first
  std::string note;
  int samples = 0;
  bool applicable = true;

  void settle();  // pass from margin and tolerance
};

struct VerifyOptions {
  SampleOptions sampling;
  std::optional<double> tol;  // overrides the discretization slack
  double S_undefined_fraction = 0.01;
};

// Discretization slack 5 h^2 * scale / L^2 (L the ring thickness); 1e-9 * scale for analytic fields.
double discretization_tolerance(const ScalarField& field, double scale);

// Ring of a field; radial fields get their ball ring.
RingDomain field_ring(const ScalarField& field);

// min_int S >= exp(-sqrt(eps) max_bd (W + |z|^2_G)) min_bd S and min_int |dPhi|^2 >= min_int S.
// At eps = 0, S is the leaf form.
CheckReport check_gradient_floor(const ScalarField& field, const MetricForm& G, double eps,
                                 const VerifyOptions& opt = {});

// E = sigma + sqrt(eps) (W + |z|^2_G) + eps^{3/4} V attains its maximum on the boundary.
// Throws Status::nonconvex with the witness when K >= 1 at some sample.
CheckReport check_sigma_max_principle(const ScalarField& field, const MetricForm& G, double eps,
                                      const VerifyOptions& opt = {});

// Smallest eigenvalue of the restricted Hessian A over interior samples.
double measure_sigma_tilde(const ScalarField& field, const MetricForm& G, const VerifyOptions& opt = {});

// det H >= eps s^{n-1}, sigma_{n-1}(H) >= s^{n-1} and e^Phi (H + grad grad^H) > 0 at interior samples,
// s = sigma_tilde (measured when absent).
CheckReport check_rank_estimates(const ScalarField& field, const MetricForm& G, double eps,
                                 std::optional<double> sigma_tilde = std::nullopt, const VerifyOptions& opt = {});

// Level-set C-convexity modulus min qc / max |dPhi| on {Phi = t} for each t; must be positive.
CheckReport check_level_sets(const ScalarField& field, const MetricForm& G, const std::vector<double>& levels,
                             const VerifyOptions& opt = {});

// qc >= min{1, sqrt2 mu} |dPhi| on each boundary component, and the normal derivative
// above the subsolution floor (inner) and the harmonic majorant floor (outer).
// Not applicable when the boundary values are not 0 / 1.
CheckReport check_boundary_conversion(const ScalarField& field, const RingDomain& ring, const MetricForm& G,
                                      const VerifyOptions& opt = {});

// Margins of the given levels collected as a trend on the finest report.
// The note records whether margins are monotone within 10%.
CheckReport with_refinement(std::vector<CheckReport> levels);

struct IPhiDiagnostic {
  double value = 0.0;
  double noise = 0.0;  // |I(delta) - I(2 delta)| / 3
  double delta = 0.0;
  bool unreliable = false;
};

// I_Phi = L^{p qbar} (Phi_{p vbar i} Phi^{u vbar} Phi_{qbar u jbar} + Phi_{p vbar jbar} Phi^{u vbar} Phi_{qbar u i}) G^{i jbar},
// L^{p qbar} = eps^2 Phi^{p vbar} G_{u vbar} Phi^{u qbar}; third derivatives by central differences of jets.
// delta <= 0 picks 1e-3 (analytic) or the grid spacing.
IPhiDiagnostic diagnostic_IPhi(const ScalarField& field, const MetricForm& G, double eps, const Point& p,
                               double delta = 0.0);

std::vector<std::string> check_names();
// Runs the named checks with defaults (levels 0.1..0.9, measured sigma_tilde).
std::vector<CheckReport> run_checks(const ScalarField& field, const MetricForm& G, double eps,
                                    const std::vector<std::string>& names, const VerifyOptions& opt = {});

}  // namespace cmlab
