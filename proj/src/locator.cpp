#include "faultloc/locator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "faultloc/errors.hpp"
#include "faultloc/stacking.hpp"

namespace faultloc {

namespace {

constexpr double kSupportEps = 1e-12;   // relative threshold for a dead terminal
constexpr double kClampSlack = 0.05;    // tolerated overshoot past the endpoints

}  // namespace

LineSelection identify_faulted_line(const CVector& theta, const Network& net) {
  if (theta.size() != net.bus_count()) {
    throw ValidationError("injection vector length does not match bus count");
  }
  const double total = theta.cwiseAbs().sum();
  if (total == 0.0) {
    throw NoFaultDetected();
  }
  const Line* best = nullptr;
  double best_mass = -1.0;
  for (const Line& line : net.lines()) {
    const double mass = std::abs(theta(net.bus_index(line.from_bus))) +
                        std::abs(theta(net.bus_index(line.to_bus)));
    if (mass > best_mass) {
      best_mass = mass;
      best = &line;
    }
  }
  if (best == nullptr) {
    throw ValidationError("network has no lines");
  }
  return {best->id, best_mass / total};
}

LineLocation locate_on_line(Complex ratio, const Line& line) {
  if (!std::isfinite(std::abs(ratio))) {
    throw ValidationError("injection ratio must be finite");
  }
  const Complex gd = line.gamma_d();
  const Complex numer = std::exp(gd) + ratio;
  const Complex denom = std::exp(-gd) + ratio;
  const double denom_scale = std::max(std::abs(ratio), std::abs(std::exp(-gd)));
  if (std::abs(denom) <= 1e-12 * denom_scale) {
    throw NumericalError("degenerate ratio: -exp(-gamma*d) pole on line '" + line.id + "'");
  }
  const Complex x_complex = std::log(numer / denom) / (2.0 * gd);

  LineLocation loc;
  loc.imag_residual = std::abs(x_complex.imag());
  const double raw = x_complex.real();
  loc.reliable = raw >= -kClampSlack && raw <= 1.0 + kClampSlack;
  loc.clamped = raw < 0.0 || raw > 1.0;
  loc.x = std::clamp(raw, 0.0, 1.0);
  return loc;
}

double percentage_error(double x_hat, double x_true) {
  if (x_hat < 0.0 || x_hat > 1.0 || x_true < 0.0 || x_true > 1.0) {
    throw ValidationError("per-unit distances must lie in [0, 1]");
  }
  return std::abs(x_hat - x_true) * 100.0;
}

LocationResult locate_from_theta(const CVector& theta, const Network& net,
                                 const std::optional<GroundTruth>& truth) {
  const LineSelection selection = identify_faulted_line(theta, net);
  const Line& line = net.line(selection.line_id);
  const int i = net.bus_index(line.from_bus);
  const int j = net.bus_index(line.to_bus);
  const Complex theta_i = theta(i);
  const Complex theta_j = theta(j);
  const double peak = theta.cwiseAbs().maxCoeff();

  LocationResult result;
  result.line_id = selection.line_id;
  result.support_score = selection.score;

  if (std::abs(theta_j) < kSupportEps * peak) {
    // Single-terminal support: the from_bus carries everything.
    result.bus_fault = true;
    result.bus_fault_bus = line.from_bus;
    result.x_hat = 0.0;
    result.reliable = false;
    result.injection_ratio = Complex(std::numeric_limits<double>::infinity(), 0.0);
  } else if (std::abs(theta_i) < kSupportEps * peak) {
    result.bus_fault = true;
    result.bus_fault_bus = line.to_bus;
    result.x_hat = 1.0;
    result.reliable = false;
    result.injection_ratio = Complex(0.0, 0.0);
  } else {
    result.injection_ratio = theta_i / theta_j;
    const LineLocation loc = locate_on_line(result.injection_ratio, line);
    result.x_hat = loc.x;
    result.imag_residual = loc.imag_residual;
    result.clamped = loc.clamped;
    result.reliable = loc.reliable;
  }

  if (truth.has_value()) {
    result.x_error_percent = percentage_error(result.x_hat, truth->x);
    const double denom = truth->theta_complex.norm();
    if (denom > 0.0) {
      result.normalized_recovery_error = (theta - truth->theta_complex).norm() / denom;
    }
  }
  return result;
}

LocationResult locate_pipeline(const Network& net, const SensingMatrix& sensing,
                               const RVector& y_corrupted, SolverKind solver,
                               const SolverConfig& cfg,
                               const std::optional<GroundTruth>& truth,
                               RecoveryResult* recovery) {
  RecoveryResult rec = solve_with(solver, sensing.B_real, y_corrupted, cfg);
  LocationResult result = locate_from_theta(rec.theta_complex, net, truth);
  if (recovery != nullptr) {
    *recovery = std::move(rec);
  }
  return result;
}

}  // namespace faultloc
