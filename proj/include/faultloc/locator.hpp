#pragma once

#include <optional>
#include <string>

#include "faultloc/network.hpp"
#include "faultloc/solvers.hpp"
#include "faultloc/types.hpp"

namespace faultloc {

struct LineSelection {
  std::string line_id;
  double score = 0.0;  // (|theta_i| + |theta_j|) / ||theta||_1, in [0, 1]
};

// Picks the line whose terminal pair carries the largest combined injection
// magnitude. Throws NoFaultDetected on an all-zero vector.
LineSelection identify_faulted_line(const CVector& theta, const Network& net);

struct LineLocation {
  double x = 0.0;             // per-unit distance from from_bus, clamped to [0, 1]
  double imag_residual = 0.0; // |Im| of the complex distance before taking Re
  bool clamped = false;       // raw result fell outside [0, 1]
  bool reliable = true;       // false when the raw result missed [0, 1] by > 0.05
};

// Inverts the injection ratio dI_i/dI_j into the per-unit fault distance
// using the principal branch of the complex logarithm. Throws NumericalError
// when the ratio sits on the formula's pole at -exp(-gamma d).
LineLocation locate_on_line(Complex ratio, const Line& line);

// |x_hat - x_true| * 100, both arguments in [0, 1].
double percentage_error(double x_hat, double x_true);

struct GroundTruth {
  std::string line_id;
  double x = 0.0;
  CVector theta_complex;  // true injection vector, length N
};

struct LocationResult {
  std::string line_id;
  double x_hat = 0.0;
  Complex injection_ratio{0.0, 0.0};
  double support_score = 0.0;
  double imag_residual = 0.0;
  bool clamped = false;
  bool reliable = true;
  bool bus_fault = false;   // single-terminal support: fault at the bus itself
  int bus_fault_bus = 0;    // external id, meaningful when bus_fault
  std::optional<double> x_error_percent;
  std::optional<double> normalized_recovery_error;  // ||theta-theta*||_2/||theta*||_2
};

// Line identification, degeneracy handling, and distance inversion for an
// already-recovered injection vector. Ground truth, when given, fills the
// error metrics (normalized error only if truth.theta_complex is non-empty).
LocationResult locate_from_theta(const CVector& theta, const Network& net,
                                 const std::optional<GroundTruth>& truth = std::nullopt);

// Full chain: solve -> complexify -> locate_from_theta, with error metrics
// when ground truth is provided. The recovered vector is written to
// *recovery when non-null.
LocationResult locate_pipeline(const Network& net, const SensingMatrix& sensing,
                               const RVector& y_corrupted, SolverKind solver,
                               const SolverConfig& cfg,
                               const std::optional<GroundTruth>& truth = std::nullopt,
                               RecoveryResult* recovery = nullptr);

}  // namespace faultloc
