#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "faultloc/network.hpp"
#include "faultloc/rng.hpp"
#include "faultloc/types.hpp"

namespace faultloc {

enum class NoiseModel {
  kRealComponents,  // independent multiplicative noise on each stacked component
  kPhasorPolar,     // magnitude scaling and rotation of each complex phasor
};

struct FaultScenario {
  std::string line_id;
  double x = 0.5;  // per-unit distance from from_bus, in (0, 1)
  Complex fault_current{1000.0, 0.0};  // amperes
  double noise_rel = 0.0;
  double outlier_fraction = 0.0;
  double outlier_scale = 1.0;
  std::uint64_t seed = 0;
  NoiseModel noise_model = NoiseModel::kRealComponents;
};

// Sparse complex injection vector together with the internal indices of the
// faulted line's terminals.
struct InjectionVector {
  CVector theta;        // length N, zero outside {support_i, support_j}
  int support_i = -1;   // internal index of from_bus
  int support_j = -1;   // internal index of to_bus
};

struct MeasurementSet {
  RVector y_clean;
  RVector y_noisy;
  RVector y_corrupted;
  std::vector<int> outlier_indices;  // sorted positions in the stacked vector
};

// Terminal injections equivalent to a fault at per-unit distance x along the
// line: (sinh(gd(1-x))/sinh(gd) * I_f, sinh(gd x)/sinh(gd) * I_f).
// Endpoints x = 0 and x = 1 are allowed.
std::pair<Complex, Complex> equivalent_injections(const Line& line, double x, Complex fault_current);

InjectionVector scenario_to_injection(const FaultScenario& scn, const Network& net);

// Complex measurement vector B_complex * theta.
CVector forward_measurements(const SensingMatrix& sensing, const InjectionVector& injection);

// Component-wise y_k * (1 + u_k), u_k uniform on [-noise_rel, +noise_rel].
RVector add_noise(const RVector& y, double noise_rel, Rng& rng);

// Polar variant: scales each phasor magnitude by (1 + u1) and rotates it by
// u2 * noise_rel radians, u1, u2 uniform on [-noise_rel, +noise_rel] and
// [-1, 1] respectively.
CVector add_noise_polar(const CVector& y, double noise_rel, Rng& rng);

// Corrupts round(fraction * len) positions, chosen uniformly without
// replacement, with additive gross errors of random sign and magnitude
// uniform on [0.5, 1.0] * scale * max|y|.
std::pair<RVector, std::vector<int>> inject_outliers(const RVector& y, double fraction,
                                                     double scale, Rng& rng);

// Full synthetic-measurement pipeline:
// scenario -> injection -> forward -> realify -> noise -> outliers.
std::pair<MeasurementSet, InjectionVector> generate_case(const FaultScenario& scn,
                                                         const Network& net,
                                                         const SensingMatrix& sensing);

}  // namespace faultloc
