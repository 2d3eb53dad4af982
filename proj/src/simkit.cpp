#include "faultloc/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "faultloc/errors.hpp"
#include "faultloc/stacking.hpp"

namespace faultloc {

std::pair<Complex, Complex> equivalent_injections(const Line& line, double x,
                                                  Complex fault_current) {
  if (x < 0.0 || x > 1.0) {
    throw ValidationError("fault distance x must lie in [0, 1], got " + std::to_string(x));
  }
  const Complex gd = line.gamma_d();
  const Complex denom = std::sinh(gd);
  const Complex di_i = std::sinh(gd * (1.0 - x)) / denom * fault_current;
  const Complex di_j = std::sinh(gd * x) / denom * fault_current;
  if (!std::isfinite(std::abs(di_i)) || !std::isfinite(std::abs(di_j))) {
    throw NumericalError("non-finite equivalent injection on line '" + line.id + "'");
  }
  return {di_i, di_j};
}

InjectionVector scenario_to_injection(const FaultScenario& scn, const Network& net) {
  if (!(scn.x > 0.0 && scn.x < 1.0)) {
    throw ValidationError("scenario fault distance must lie in (0, 1), got " +
                          std::to_string(scn.x));
  }
  const Line& line = net.line(scn.line_id);
  const auto [di_i, di_j] = equivalent_injections(line, scn.x, scn.fault_current);

  InjectionVector inj;
  inj.theta = CVector::Zero(net.bus_count());
  inj.support_i = net.bus_index(line.from_bus);
  inj.support_j = net.bus_index(line.to_bus);
  inj.theta(inj.support_i) = di_i;
  inj.theta(inj.support_j) = di_j;
  return inj;
}

CVector forward_measurements(const SensingMatrix& sensing, const InjectionVector& injection) {
  if (sensing.B_complex.cols() != injection.theta.size()) {
    throw ValidationError("sensing matrix has " + std::to_string(sensing.B_complex.cols()) +
                          " columns but injection vector has length " +
                          std::to_string(injection.theta.size()));
  }
  return sensing.B_complex * injection.theta;
}

RVector add_noise(const RVector& y, double noise_rel, Rng& rng) {
  if (noise_rel < 0.0) {
    throw ValidationError("noise_rel must be >= 0");
  }
  if (noise_rel == 0.0) {
    return y;
  }
  RVector out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    out(k) = y(k) * (1.0 + rng.next_uniform(-noise_rel, noise_rel));
  }
  return out;
}

CVector add_noise_polar(const CVector& y, double noise_rel, Rng& rng) {
  if (noise_rel < 0.0) {
    throw ValidationError("noise_rel must be >= 0");
  }
  if (noise_rel == 0.0) {
    return y;
  }
  CVector out(y.size());
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double mag_factor = 1.0 + rng.next_uniform(-noise_rel, noise_rel);
    const double angle = rng.next_uniform(-1.0, 1.0) * noise_rel;
    out(k) = y(k) * mag_factor * std::polar(1.0, angle);
  }
  return out;
}

std::pair<RVector, std::vector<int>> inject_outliers(const RVector& y, double fraction,
                                                     double scale, Rng& rng) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw ValidationError("outlier fraction must lie in [0, 1)");
  }
  const int len = static_cast<int>(y.size());
  const int count = static_cast<int>(std::lround(fraction * len));
  if (count == 0) {
    return {y, {}};
  }

  std::vector<int> indices(len);
  std::iota(indices.begin(), indices.end(), 0);
  for (int t = 0; t < count; ++t) {
    const int j = t + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(len - t)));
    std::swap(indices[t], indices[j]);
  }
  std::vector<int> chosen(indices.begin(), indices.begin() + count);
  std::sort(chosen.begin(), chosen.end());

  const double base = scale * y.cwiseAbs().maxCoeff();
  RVector out = y;
  for (const int pos : chosen) {
    const double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
    out(pos) += sign * rng.next_uniform(0.5, 1.0) * base;
  }
  return {out, chosen};
}

std::pair<MeasurementSet, InjectionVector> generate_case(const FaultScenario& scn,
                                                         const Network& net,
                                                         const SensingMatrix& sensing) {
  InjectionVector injection = scenario_to_injection(scn, net);
  const CVector y_complex = forward_measurements(sensing, injection);

  Rng rng(scn.seed);
  MeasurementSet set;
  set.y_clean = realify(y_complex);
  if (scn.noise_model == NoiseModel::kPhasorPolar) {
    set.y_noisy = realify(add_noise_polar(y_complex, scn.noise_rel, rng));
  } else {
    set.y_noisy = add_noise(set.y_clean, scn.noise_rel, rng);
  }
  std::tie(set.y_corrupted, set.outlier_indices) =
      inject_outliers(set.y_noisy, scn.outlier_fraction, scn.outlier_scale, rng);
  return {std::move(set), std::move(injection)};
}

}  // namespace faultloc
