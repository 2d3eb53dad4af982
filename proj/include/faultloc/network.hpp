#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "faultloc/types.hpp"

namespace faultloc {

// External bus id plus the equivalent source/load shunt admittance seen at
// the bus. Shunts are what make the bus-admittance matrix invertible; a
// network must have at least one nonzero shunt.
struct Bus {
  int id = 0;
  Complex shunt_admittance{0.0, 0.0};  // siemens
};

// Oriented distributed-parameter transmission line. The from_bus terminal is
// the measurement terminal when the line is monitored.
struct Line {
  std::string id;
  int from_bus = 0;
  int to_bus = 0;
  Complex surge_impedance{0.0, 0.0};  // ohms
  Complex propagation{0.0, 0.0};      // 1/km
  double length_km = 0.0;

  Complex gamma_d() const { return propagation * length_km; }
};

// Exact pi-equivalent admittances of a distributed-parameter line.
struct LineAdmittance {
  Complex series;          // 1 / (z sinh(gd))
  Complex shunt_terminal;  // tanh(gd / 2) / z, at each terminal
};

LineAdmittance line_admittance(const Line& line);

// Validated positive-sequence network, immutable after construction.
// External bus ids are mapped to contiguous internal indices in ascending id
// order; matrices use internal indices, reports use external ids.
class Network {
 public:
  Network(std::vector<Bus> buses, std::vector<Line> lines);

  int bus_count() const { return static_cast<int>(buses_.size()); }
  const std::vector<Bus>& buses() const { return buses_; }
  const std::vector<Line>& lines() const { return lines_; }

  bool has_bus(int external_id) const;
  int bus_index(int external_id) const;  // internal 0-based index
  int bus_id(int internal_index) const;  // external id
  bool has_line(const std::string& line_id) const;
  const Line& line(const std::string& line_id) const;

  // Reciprocal condition estimate of the bus-admittance matrix, from the
  // load-time nonsingularity check.
  double ybus_rcond() const { return ybus_rcond_; }

 private:
  std::vector<Bus> buses_;  // sorted by external id
  std::vector<Line> lines_;
  std::unordered_map<int, int> bus_index_;
  std::unordered_map<std::string, std::size_t> line_index_;
  double ybus_rcond_ = 0.0;
};

// Assembles the bus-admittance matrix for a raw bus/line collection, mapping
// bus ids by position in `buses`. Topology is not validated here; use the
// Network overload for checked assembly.
CMatrix assemble_ybus(const std::vector<Bus>& buses, const std::vector<Line>& lines);

CMatrix build_ybus(const Network& net);

struct ZBus {
  CMatrix Z;          // N x N bus-impedance matrix, ohms
  double rcond = 0.0; // reciprocal condition estimate of the inverted Y
};

// Dense LU inversion with conditioning, identity-residual, and symmetry
// checks. Throws NumericalError on singular or ill-conditioned input.
ZBus build_zbus(const CMatrix& ybus);

// Transfer coefficient mapping a unit injection at internal bus index `bus`
// to the superimposed current sensed at the from_bus terminal of `line`.
Complex beta_coefficient(const Network& net, const Line& line, int bus, const ZBus& zbus);

// Monitored branches, in measurement order.
struct SensorSet {
  std::vector<std::string> monitored_line_ids;
};

// Checks M >= 1, existence in the network, and uniqueness.
void validate_sensors(const Network& net, const SensorSet& sensors);

// Complex branch-bus matrix and its real stacking.
struct SensingMatrix {
  CMatrix B_complex;                   // M x N
  RMatrix B_real;                      // 2M x 2N
  std::vector<std::string> row_lines;  // monitored line id per complex row
  std::vector<int> column_buses;       // external bus id per complex column
};

SensingMatrix build_sensing_matrix(const Network& net, const SensorSet& sensors, const ZBus& zbus);

}  // namespace faultloc
