#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmlab/domain.hpp"
#include "cmlab/field.hpp"

namespace cmlab {

struct SolveConfig {
  double eps = 0.1;
  // Descending; the last entry must equal eps. Empty means {eps}.
  std::vector<double> eps_schedule;
  int resolution = 129;  // nodes per axis (radial: total nodes)
  double damping = 1.0;
  int max_iters = 80;
  double residual_tol = 1e-6;  // on tr(H^-1 G) - 1/eps
  double psd_floor = 1e-12;    // relative minimum eigenvalue kept by the step guard

  void validate() const;
  std::vector<double> schedule() const;
};

struct StageTrace {
  double eps = 0.0;
  double residual_inf = 0.0;
  int iterations = 0;
  double increment = 0.0;  // sup-norm change from the previous stage (0 for the first)
};

struct SolveReport {
  FieldPtr field;
  double eps = 0.0;
  double residual_inf = 0.0;  // max |tr(H^-1 G) - 1/eps| over equation nodes
  double psd_margin = 0.0;    // min over equation nodes of the smallest eigenvalue of H
  int iterations = 0;
  bool converged = false;
  std::string message;
  std::vector<StageTrace> eps_trace;
  // Per-node residuals in node_values() order; NaN at Dirichlet nodes.
  std::vector<double> node_residuals;
};

// tr(H^-1 G) - 1/eps from a jet; +inf when the complex Hessian is not positive definite.
double quotient_residual(const Jet& j, const MetricForm& G, double eps);
double min_hessian_eigenvalue(const Jet& j);

// Radial tier: f(s), s = log|z|, on cfg.resolution nodes; G = identity.
// Solutions exist only for eps below radial_eps_limit (sharp, by shooting).
double radial_eps_limit(int n, double r, double R);
SolveReport solve_radial(int n, double r, double R, const SolveConfig& cfg,
                         const std::vector<double>* warm = nullptr);

// Reinhardt tier: centered diagonal ellipsoids in C^2, G diagonal.
SolveReport solve_reinhardt(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg,
                            const std::vector<double>* warm = nullptr);

// Full 4-D tier by nonlinear Gauss-Seidel; cfg.resolution <= 24.
enum class InitialGuess { harmonic, subsolution };
struct FullOptions {
  InitialGuess start = InitialGuess::harmonic;
  double relaxation = 1.0;
  double margin = 0.02;
  SubsolutionOptions subsolution;
};
SolveReport solve_full(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg,
                       const FullOptions& opt = {}, const std::vector<double>* warm = nullptr);

// Shortley-Weller discrete harmonic function on a full grid (SOR), all grid nodes.
std::vector<double> full_harmonic_values(const FullGrid& grid, int max_sweeps, double tol);

enum class Tier { automatic, radial, reinhardt, full };
Tier select_tier(const RingDomain& ring, const MetricForm& G);

struct ContinuationResult {
  std::vector<SolveReport> stages;
  bool ok = true;
  std::string failure;  // first failing stage, if any
};
// Warm-started solves along cfg.schedule().
ContinuationResult continuation(const RingDomain& ring, const MetricForm& G, const SolveConfig& cfg,
                                Tier tier = Tier::automatic, const FullOptions& full = {});

// Independent re-evaluation of the residual through field jets at `count` random
// equation nodes; returns the largest disagreement with the stored node residuals.
struct AuditResult {
  int nodes = 0;
  double max_disagreement = 0.0;
  double max_residual = 0.0;
};
AuditResult audit_residual(const SolveReport& rep, int count = 100, std::uint64_t seed = 5);

// Discrete harmonic function with the same boundary values, in node_values() order.
std::vector<double> harmonic_majorant(const ScalarField& field);

}  // namespace cmlab
