#pragma once

#include <string>
#include <vector>

#include "faultloc/types.hpp"

namespace faultloc {

// Update-rule variant for the robust ADMM solver. The canonical rules are
// derived from the augmented Lagrangian of the L1-L1 objective (v-shrink
// 1/rho, theta-shrink lambda*tau with rho-scaled residual); the literal rules
// keep the printed thresholds rho/lambda and tau/rho instead. Canonical is
// the default; it is the variant that attains the minimum of the objective.
enum class ThresholdMode { kCanonical, kPaperLiteral };

struct SolverConfig {
  // Regularization weight. If <= 0, resolved as lambda_rel * ||B^T y||_inf.
  double lambda = 0.0;
  double lambda_rel = 0.01;
  // ADMM penalty.
  double rho = 1.0;
  // Step size for the linearized theta update. If <= 0, resolved as
  // tau_scale / sigma_max(B)^2, which keeps the prox step stable.
  double tau = 0.0;
  double tau_scale = 0.99;
  // Huber threshold (huber solver only). If <= 0, resolved as
  // huber_delta_rel * max|y|.
  double huber_delta = 0.0;
  double huber_delta_rel = 0.05;
  int max_iter = 10000;
  // Convergence threshold on the inf-norm change of successive iterates.
  double tol = 1e-8;
  ThresholdMode threshold_mode = ThresholdMode::kCanonical;
};

// Per-solve resolved parameters, kept for diagnostics.
struct ResolvedParams {
  double lambda = 0.0;
  double rho = 0.0;
  double tau = 0.0;
  double huber_delta = 0.0;
  double lipschitz = 0.0;  // sigma_max(B)^2
};

struct RecoveryResult {
  RVector theta;          // length 2N
  CVector theta_complex;  // complexify(theta), length N
  int iterations = 0;
  // Robust objective ||B theta - y||_1 + lambda ||theta||_1 after each
  // iteration, for every solver (common metric across methods).
  std::vector<double> objective_trace;
  bool converged = false;
  ResolvedParams params;
};

// ||B theta - y||_1 + lambda ||theta||_1.
double objective_l1l1(const RMatrix& B, const RVector& y, const RVector& theta, double lambda);

// Component-wise sign(v) * max(|v| - t, 0). Requires t >= 0.
RVector soft_threshold(const RVector& v, double t);

// Largest squared singular value of B by power iteration (100 iterations,
// relative tolerance 1e-6, deterministic start).
double largest_sq_singular_value(const RMatrix& B);

// Robust L1-L1 recovery: minimize ||B theta - y||_1 + lambda ||theta||_1 by
// ADMM over the splitting v = B theta - y, with a linearized soft-threshold
// update for theta and a dual ascent step for the multiplier. Starts from
// zero and stops when max(|dtheta|_inf, |dv|_inf) < tol or max_iter.
// Throws NumericalError if an iterate becomes non-finite.
RecoveryResult yall1_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg);

// Baseline: minimize 0.5 ||B theta - y||_2^2 + lambda ||theta||_1 by FISTA
// with step 1/sigma_max(B)^2.
RecoveryResult lasso_fista_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg);

// Baseline: minimize sum_i huber_delta((B theta - y)_i) + lambda ||theta||_1
// by FISTA. As huber_delta -> inf this coincides with the lasso baseline.
RecoveryResult huber_fista_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg);

// Direct minimizer of the L1-L1 objective for instances with dim(theta) <= 6:
// coarse grid search over a box known to contain every minimizer, followed by
// golden-section line-search refinement along coordinate and paired-coordinate
// directions. Accuracy within 1e-4 in objective value.
RVector oracle_solve_small(const RMatrix& B, const RVector& y, double lambda);

enum class SolverKind { kYall1, kLasso, kHuber };

const char* to_string(SolverKind kind);
SolverKind solver_kind_from_string(const std::string& name);

RecoveryResult solve_with(SolverKind kind, const RMatrix& B, const RVector& y,
                          const SolverConfig& cfg);

}  // namespace faultloc
