#include "faultloc/solvers.hpp"

#include <algorithm>
#include <cmath>

#include "faultloc/errors.hpp"
#include "faultloc/rng.hpp"
#include "faultloc/stacking.hpp"

namespace faultloc {

namespace {

constexpr double kTinyScale = 1e-30;

void validate_config(const SolverConfig& cfg) {
  if (cfg.max_iter < 1) {
    throw ValidationError("max_iter must be >= 1");
  }
  if (!(cfg.tol > 0.0) || !(cfg.rho > 0.0)) {
    throw ValidationError("tol and rho must be positive");
  }
  if (cfg.lambda <= 0.0 && !(cfg.lambda_rel > 0.0)) {
    throw ValidationError("lambda or lambda_rel must be positive");
  }
  if (cfg.tau <= 0.0 && !(cfg.tau_scale > 0.0)) {
    throw ValidationError("tau or tau_scale must be positive");
  }
}

ResolvedParams resolve_params(const RMatrix& B, const RVector& y, const SolverConfig& cfg) {
  ResolvedParams p;
  p.lipschitz = largest_sq_singular_value(B);
  p.rho = cfg.rho;
  p.lambda = cfg.lambda > 0.0
                 ? cfg.lambda
                 : cfg.lambda_rel * std::max((B.transpose() * y).cwiseAbs().maxCoeff(), kTinyScale);
  p.tau = cfg.tau > 0.0 ? cfg.tau : cfg.tau_scale / std::max(p.lipschitz, kTinyScale);
  p.huber_delta = cfg.huber_delta > 0.0
                      ? cfg.huber_delta
                      : cfg.huber_delta_rel * std::max(y.cwiseAbs().maxCoeff(), kTinyScale);
  return p;
}

// Both objective terms are 1-homogeneous in (theta, y), so each solve runs on
// data scaled to unit max-abs and the solution is scaled back. This keeps the
// iteration's thresholds matched to the residual scale regardless of the
// measurement units (amperes here).
double data_scale(const RVector& y) {
  const double s = y.cwiseAbs().maxCoeff();
  return s > 0.0 ? s : 1.0;
}

void finish_result(RecoveryResult& result) {
  // theta_complex is only meaningful for stacked problems; odd-dimensional
  // instances (tests, generic regressions) leave it empty.
  if (result.theta.size() % 2 == 0) {
    result.theta_complex = complexify(result.theta);
  }
}

// FISTA scaffold shared by the lasso and huber baselines; `clip` maps the
// residual to the data-fit gradient's residual term. Operates on unit-scaled
// data: the quadratic data terms need lambda (and the huber threshold)
// divided by the scale for the substitution theta = scale * u to be exact.
template <typename ResidualClip>
RecoveryResult fista_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg,
                           ResidualClip clip) {
  validate_config(cfg);
  const ResolvedParams p = resolve_params(B, y, cfg);
  const double scale = data_scale(y);
  const RVector y_unit = y / scale;
  const double lambda_unit = p.lambda / scale;
  const double step = 1.0 / std::max(p.lipschitz, kTinyScale);

  const Eigen::Index n = B.cols();
  RVector theta = RVector::Zero(n);
  RVector momentum = theta;
  RVector residual(B.rows()), grad(n), next(n);
  double t = 1.0;

  RecoveryResult result;
  result.params = p;
  result.objective_trace.reserve(64);

  for (int k = 0; k < cfg.max_iter; ++k) {
    residual.noalias() = B * momentum;
    residual -= y_unit;
    clip(residual);
    grad.noalias() = B.transpose() * residual;
    next = soft_threshold(momentum - step * grad, lambda_unit * step);
    if (!next.allFinite()) {
      throw NumericalError("solver diverged at iteration " + std::to_string(k + 1) +
                           ": non-finite iterate; try a smaller tau/step");
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    momentum = next + ((t - 1.0) / t_next) * (next - theta);
    const double dtheta = (next - theta).cwiseAbs().maxCoeff();
    theta = next;
    t = t_next;

    // Original-units robust objective at theta_orig = scale * theta:
    // ||B theta_orig - y||_1 + lambda ||theta_orig||_1.
    result.objective_trace.push_back(scale * ((B * theta - y_unit).lpNorm<1>() +
                                              p.lambda * theta.lpNorm<1>()));
    result.iterations = k + 1;
    if (dtheta < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.theta = scale * theta;
  finish_result(result);
  return result;
}

}  // namespace

double objective_l1l1(const RMatrix& B, const RVector& y, const RVector& theta, double lambda) {
  if (B.cols() != theta.size() || B.rows() != y.size()) {
    throw ValidationError("objective: dimension mismatch");
  }
  return (B * theta - y).lpNorm<1>() + lambda * theta.lpNorm<1>();
}

RVector soft_threshold(const RVector& v, double t) {
  if (t < 0.0) {
    throw ValidationError("soft threshold requires t >= 0");
  }
  return v.array().sign() * (v.array().abs() - t).max(0.0);
}

double largest_sq_singular_value(const RMatrix& B) {
  const Eigen::Index n = B.cols();
  if (n == 0 || B.rows() == 0) {
    return 0.0;
  }
  Rng rng(0x6a09e667f3bcc908ULL);
  RVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i) = rng.next_uniform(-1.0, 1.0);
  }
  v.normalize();

  double estimate = 0.0;
  RVector w(n);
  for (int it = 0; it < 100; ++it) {
    w.noalias() = B.transpose() * (B * v);
    const double norm = w.norm();
    if (norm == 0.0) {
      return 0.0;
    }
    const double next = v.dot(w);
    v = w / norm;
    if (it > 0 && std::abs(next - estimate) <= 1e-6 * std::abs(next)) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return std::max(estimate, 0.0);
}

RecoveryResult yall1_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg) {
  validate_config(cfg);
  const ResolvedParams p = resolve_params(B, y, cfg);
  // The substitution theta = scale * u leaves the L1-L1 problem unchanged
  // (same lambda), so iterate on unit-scaled data.
  const double scale = data_scale(y);
  const RVector y_unit = y / scale;

  const bool canonical = cfg.threshold_mode == ThresholdMode::kCanonical;
  const double v_shrink = canonical ? 1.0 / p.rho : p.rho / p.lambda;
  const double theta_shrink = canonical ? p.lambda * p.tau : p.tau / p.rho;
  const double grad_scale = canonical ? p.rho : 1.0;

  const Eigen::Index m = B.rows();
  const Eigen::Index n = B.cols();
  RVector theta = RVector::Zero(n);
  RVector v = RVector::Zero(m);
  RVector w = RVector::Zero(m);
  RVector a(m), v_next(m), b(n), theta_next(n), residual(m);

  RecoveryResult result;
  result.params = p;
  result.objective_trace.reserve(64);

  for (int k = 0; k < cfg.max_iter; ++k) {
    a.noalias() = B * theta;
    a -= y_unit + w / p.rho;
    v_next = soft_threshold(a, v_shrink);
    b.noalias() = theta - p.tau * grad_scale * (B.transpose() * (a - v_next));
    theta_next = soft_threshold(b, theta_shrink);
    residual.noalias() = B * theta_next;
    residual -= y_unit + v_next;
    w -= p.rho * residual;

    if (!theta_next.allFinite() || !v_next.allFinite() || !w.allFinite()) {
      throw NumericalError("solver diverged at iteration " + std::to_string(k + 1) +
                           ": non-finite iterate; try a smaller tau");
    }

    const double dtheta = (theta_next - theta).cwiseAbs().maxCoeff();
    const double dv = (v_next - v).cwiseAbs().maxCoeff();
    // Multiplier progress guards against a false stop in the first sweeps,
    // where theta and v can both sit at zero while w is still ramping up.
    const double dw = p.rho * residual.cwiseAbs().maxCoeff();
    theta = theta_next;
    v = v_next;

    // B*theta - y_unit == residual + v, sparing a matrix-vector product.
    result.objective_trace.push_back(scale * ((residual + v).lpNorm<1>() +
                                              p.lambda * theta.lpNorm<1>()));
    result.iterations = k + 1;
    if (std::max({dtheta, dv, dw}) < cfg.tol) {
      result.converged = true;
      break;
    }
  }
  result.theta = scale * theta;
  finish_result(result);
  return result;
}

RecoveryResult lasso_fista_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg) {
  return fista_solve(B, y, cfg, [](RVector&) {});
}

RecoveryResult huber_fista_solve(const RMatrix& B, const RVector& y, const SolverConfig& cfg) {
  validate_config(cfg);
  if (cfg.huber_delta <= 0.0 && !(cfg.huber_delta_rel > 0.0)) {
    throw ValidationError("huber_delta or huber_delta_rel must be positive");
  }
  const double delta = cfg.huber_delta > 0.0
                           ? cfg.huber_delta
                           : cfg.huber_delta_rel * std::max(y.cwiseAbs().maxCoeff(), kTinyScale);
  const double delta_unit = delta / data_scale(y);  // iteration runs on unit-scaled data
  return fista_solve(B, y, cfg, [delta_unit](RVector& r) {
    r = r.array().min(delta_unit).max(-delta_unit);
  });
}

const char* to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kYall1:
      return "yall1";
    case SolverKind::kLasso:
      return "lasso";
    case SolverKind::kHuber:
      return "huber";
  }
  return "unknown";
}

SolverKind solver_kind_from_string(const std::string& name) {
  if (name == "yall1") return SolverKind::kYall1;
  if (name == "lasso") return SolverKind::kLasso;
  if (name == "huber") return SolverKind::kHuber;
  throw ValidationError("unknown solver '" + name + "' (expected yall1, lasso, or huber)");
}

RecoveryResult solve_with(SolverKind kind, const RMatrix& B, const RVector& y,
                          const SolverConfig& cfg) {
  switch (kind) {
    case SolverKind::kYall1:
      return yall1_solve(B, y, cfg);
    case SolverKind::kLasso:
      return lasso_fista_solve(B, y, cfg);
    case SolverKind::kHuber:
      return huber_fista_solve(B, y, cfg);
  }
  throw ValidationError("unknown solver kind");
}

}  // namespace faultloc
