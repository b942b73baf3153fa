#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/core.hpp"

namespace cmlab {

// P(z) = A_{ab} z^a conj(z^b) + Re(B_{ab} z^a z^b) + Re(L_a z^a)
struct QuadraticGauge {
  CMat A;
  CMat B;
  CVec L;

  // Validates A = A^H and B = B^T to 1e-12 relative and symmetrizes.
  static QuadraticGauge make(const CMat& A, const CMat& B, const CVec& L = CVec());
  int dim() const { return static_cast<int>(A.rows()); }
  double eval(const CVec& z) const;
};

struct MetricForm {
  CMat G;
  CMat Ginv;

  static MetricForm make(const CMat& G);
  static MetricForm identity(int m);
  int dim() const { return static_cast<int>(G.rows()); }
  // Lower Cholesky factor: z^T G conj(z) = |L^T z|^2.
  CMat chol() const;
};

// Modulus of convexity; `convex` false is the nonconvex marker, in which case
// `value` holds the (nonpositive) minimal generalized eigenvalue.
struct Convexity {
  bool convex = false;
  double value = 0.0;
};

struct KappaSpectrum {
  CMat K;
  std::vector<double> eigenvalues;  // descending
  std::optional<double> sigma;
  double max_imag = 0.0;
  double max_eig() const { return eigenvalues.empty() ? 0.0 : eigenvalues.front(); }
};

struct Takagi {
  CMat U;
  RVec D;  // descending, nonnegative
};

// Real 2m x 2m matrices M with form(z) = v^T M v, v = (Re z, Im z).
RMat real_form_hermitian(const CMat& A);
RMat real_form_symmetric(const CMat& B);

Convexity modulus_of_convexity(const QuadraticGauge& q, const MetricForm& g);

struct DegreeOptions {
  int random_directions = 256;
  int refine_steps = 400;
  int bisection_steps = 60;
  int polish_steps = 4000;
  std::uint64_t seed = 12345;
};

double degree_of_convexity(const QuadraticGauge& q, const MetricForm& g,
                           const DegreeOptions& opt = {});

Takagi takagi(const CMat& B);
KappaSpectrum kappa(const CMat& A, const CMat& B);

// g-weighted size of a symmetric matrix: sqrt of the top eigenvalue of
// W conj(G^-1) conj(W) G^-1.
double weighted_norm(const CMat& W, const MetricForm& g);

// Test hook: when set, takagi() drops the phase correction of its unitary.
void set_takagi_fault(bool on);
bool takagi_fault();

// Lemma-style conversions between modulus and robustness.
struct RobustnessContext {
  double c2_norm = 1.0;       // C^2 norm of the field
  double thickness = 1.0;     // ring thickness
  double diameter = 1.0;      // domain diameter
  double cn = 1.0;            // dimensional constant
  std::optional<double> C;    // explicit constant overrides the default
};

double default_robustness_constant(const RobustnessContext& ctx);
double modulus_to_robustness(double m, const RobustnessContext& ctx);
double robustness_to_modulus(double rho, const RobustnessContext& ctx);

// Boundary and level-set conversions.
double boundary_qc_bound(double mu_domain, double normal_derivative);
double levelset_modulus_bound(double qc_modulus, double max_gradient);

// Single-instance predicates: the conclusion is evaluated only when the hypothesis holds.
struct PredicateResult {
  bool hypothesis = false;
  bool conclusion = false;
  double margin = 0.0;  // slack of the conclusion, negative on failure
  std::string witness;
  bool passed() const { return !hypothesis || conclusion; }
};

// Modulus of P above delta, V <= delta/2 G, |W|_G <= delta/2  =>  P - V - Re(W z z) strongly convex.
PredicateResult predicate_half_perturbation(const QuadraticGauge& q, const MetricForm& g, double delta,
                                            const CMat& V, const CMat& W);
// |A_ij| < 1/k^2  =>  A < 1;  |B_ij| < 1/k^{3/2}  =>  B B^H < 1.
PredicateResult predicate_entry_size(const CMat& A, const CMat& B);
// A > delta G and max eig K < 1 - delta  =>  modulus > delta^2 / 2.
PredicateResult predicate_metric_kappa(const QuadraticGauge& q, const MetricForm& g, double delta);
// modulus > delta  =>  max eig K <= 1 - delta / (2 C2), C2 = max eig(A G^-1).
PredicateResult predicate_kappa_gap(const QuadraticGauge& q, const MetricForm& g, double delta);

// Property suites over random instances.
struct SuiteResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst_margin = 0.0;
  std::string witness;
  bool passed() const { return failures == 0; }
};

std::vector<std::string> lemma_suite_names();
SuiteResult run_lemma_suite(const std::string& name, int trials, std::uint64_t seed);

}  // namespace cmlab
