#include "faultloc/network.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <unordered_set>
#include <utility>

#include "faultloc/errors.hpp"
#include "faultloc/stacking.hpp"

namespace faultloc {

namespace {

bool finite(Complex c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

void validate_line(const Line& line) {
  if (line.id.empty()) {
    throw ValidationError("line with empty id");
  }
  if (line.from_bus == line.to_bus) {
    throw ValidationError("line '" + line.id + "': from and to buses must differ");
  }
  if (std::abs(line.surge_impedance) == 0.0) {
    throw ValidationError("line '" + line.id + "': surge impedance must be nonzero");
  }
  if (!(line.length_km > 0.0)) {
    throw ValidationError("line '" + line.id + "': length must be positive");
  }
  if (line.propagation.real() < 0.0) {
    throw ValidationError("line '" + line.id + "': propagation constant must have Re >= 0");
  }
  const Complex sinh_gd = std::sinh(line.gamma_d());
  if (!finite(sinh_gd)) {
    throw NumericalError("line '" + line.id + "': non-finite sinh(gamma*d)");
  }
  if (std::abs(sinh_gd) <= 1e-12) {
    throw ValidationError("line '" + line.id + "': |sinh(gamma*d)| must exceed 1e-12");
  }
}

}  // namespace

LineAdmittance line_admittance(const Line& line) {
  const Complex gd = line.gamma_d();
  const Complex series = 1.0 / (line.surge_impedance * std::sinh(gd));
  const Complex shunt = std::tanh(gd * 0.5) / line.surge_impedance;
  if (!finite(series) || !finite(shunt)) {
    throw NumericalError("line '" + line.id + "': non-finite hyperbolic evaluation");
  }
  return {series, shunt};
}

Network::Network(std::vector<Bus> buses, std::vector<Line> lines)
    : buses_(std::move(buses)), lines_(std::move(lines)) {
  if (buses_.empty()) {
    throw ValidationError("network has no buses");
  }
  std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
  for (int i = 0; i < static_cast<int>(buses_.size()); ++i) {
    if (!bus_index_.emplace(buses_[i].id, i).second) {
      throw ValidationError("duplicate bus id " + std::to_string(buses_[i].id));
    }
  }

  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const Line& line = lines_[i];
    validate_line(line);
    if (!bus_index_.count(line.from_bus)) {
      throw ValidationError("line '" + line.id + "': unknown from bus " +
                            std::to_string(line.from_bus));
    }
    if (!bus_index_.count(line.to_bus)) {
      throw ValidationError("line '" + line.id + "': unknown to bus " +
                            std::to_string(line.to_bus));
    }
    if (!line_index_.emplace(line.id, i).second) {
      throw ValidationError("duplicate line id '" + line.id + "'");
    }
  }

  // Connectivity over the line graph.
  if (buses_.size() > 1) {
    std::vector<std::vector<int>> adj(buses_.size());
    for (const Line& line : lines_) {
      const int a = bus_index_.at(line.from_bus);
      const int b = bus_index_.at(line.to_bus);
      adj[a].push_back(b);
      adj[b].push_back(a);
    }
    std::vector<char> seen(buses_.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      for (const int q : adj[p]) {
        if (!seen[q]) {
          seen[q] = 1;
          stack.push_back(q);
        }
      }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
      if (!seen[i]) {
        throw ValidationError("network graph is disconnected: bus " +
                              std::to_string(buses_[i].id) + " unreachable from bus " +
                              std::to_string(buses_[0].id));
      }
    }
  }

  const bool any_shunt = std::any_of(buses_.begin(), buses_.end(), [](const Bus& b) {
    return std::abs(b.shunt_admittance) > 0.0;
  });
  if (!any_shunt) {
    throw ValidationError("at least one bus must have a nonzero shunt_admittance");
  }

  const CMatrix y = assemble_ybus(buses_, lines_);
  Eigen::PartialPivLU<CMatrix> lu(y);
  ybus_rcond_ = lu.rcond();
  if (!(ybus_rcond_ > 1e-12)) {
    throw ValidationError("singular admittance matrix: reciprocal condition estimate " +
                          std::to_string(ybus_rcond_));
  }
}

bool Network::has_bus(int external_id) const { return bus_index_.count(external_id) > 0; }

int Network::bus_index(int external_id) const {
  const auto it = bus_index_.find(external_id);
  if (it == bus_index_.end()) {
    throw ValidationError("unknown bus id " + std::to_string(external_id));
  }
  return it->second;
}

int Network::bus_id(int internal_index) const {
  if (internal_index < 0 || internal_index >= bus_count()) {
    throw ValidationError("internal bus index out of range: " + std::to_string(internal_index));
  }
  return buses_[internal_index].id;
}

bool Network::has_line(const std::string& line_id) const {
  return line_index_.count(line_id) > 0;
}

const Line& Network::line(const std::string& line_id) const {
  const auto it = line_index_.find(line_id);
  if (it == line_index_.end()) {
    throw ValidationError("unknown line id '" + line_id + "'");
  }
  return lines_[it->second];
}

CMatrix assemble_ybus(const std::vector<Bus>& buses, const std::vector<Line>& lines) {
  std::unordered_map<int, int> index;
  for (int i = 0; i < static_cast<int>(buses.size()); ++i) {
    index.emplace(buses[i].id, i);
  }
  CMatrix y = CMatrix::Zero(buses.size(), buses.size());
  for (std::size_t i = 0; i < buses.size(); ++i) {
    y(i, i) += buses[i].shunt_admittance;
  }
  for (const Line& line : lines) {
    const LineAdmittance adm = line_admittance(line);
    const int a = index.at(line.from_bus);
    const int b = index.at(line.to_bus);
    y(a, a) += adm.series + adm.shunt_terminal;
    y(b, b) += adm.series + adm.shunt_terminal;
    y(a, b) -= adm.series;
    y(b, a) -= adm.series;
  }
  if (!y.allFinite()) {
    throw NumericalError("non-finite entry in assembled admittance matrix");
  }
  return y;
}

CMatrix build_ybus(const Network& net) { return assemble_ybus(net.buses(), net.lines()); }

ZBus build_zbus(const CMatrix& ybus) {
  if (ybus.rows() != ybus.cols()) {
    throw ValidationError("admittance matrix must be square");
  }
  Eigen::PartialPivLU<CMatrix> lu(ybus);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12) || !std::isfinite(rcond)) {
    throw NumericalError("admittance matrix is singular or ill-conditioned (rcond " +
                         std::to_string(rcond) + ")");
  }
  ZBus zbus;
  zbus.Z = lu.inverse();
  zbus.rcond = rcond;
  if (!zbus.Z.allFinite()) {
    throw NumericalError("admittance matrix inversion produced non-finite entries");
  }

  const double scale = ybus.cwiseAbs().maxCoeff() * zbus.Z.cwiseAbs().maxCoeff();
  const double residual =
      (zbus.Z * ybus - CMatrix::Identity(ybus.rows(), ybus.cols())).cwiseAbs().maxCoeff();
  if (residual > 1e-9 * std::max(scale, 1.0)) {
    throw NumericalError("inversion residual too large: " + std::to_string(residual));
  }
  const double asym = (zbus.Z - zbus.Z.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * std::max(zbus.Z.cwiseAbs().maxCoeff(), 1.0)) {
    throw NumericalError("bus-impedance matrix is not symmetric: deviation " +
                         std::to_string(asym));
  }
  return zbus;
}

Complex beta_coefficient(const Network& net, const Line& line, int bus, const ZBus& zbus) {
  if (bus < 0 || bus >= zbus.Z.rows()) {
    throw ValidationError("bus index out of range: " + std::to_string(bus));
  }
  const int s = net.bus_index(line.from_bus);
  const int r = net.bus_index(line.to_bus);
  const Complex gd = line.gamma_d();
  const Complex z = line.surge_impedance;
  const Complex beta =
      zbus.Z(s, bus) / z * std::tanh(gd * 0.5) + (zbus.Z(s, bus) - zbus.Z(r, bus)) / (z * std::sinh(gd));
  if (!finite(beta)) {
    throw NumericalError("non-finite beta coefficient for line '" + line.id + "'");
  }
  return beta;
}

void validate_sensors(const Network& net, const SensorSet& sensors) {
  if (sensors.monitored_line_ids.empty()) {
    throw ValidationError("sensor set must monitor at least one line");
  }
  std::unordered_set<std::string> seen;
  for (const std::string& id : sensors.monitored_line_ids) {
    if (!net.has_line(id)) {
      throw ValidationError("monitored line '" + id + "' does not exist in the network");
    }
    if (!seen.insert(id).second) {
      throw ValidationError("monitored line '" + id + "' listed twice");
    }
  }
}

SensingMatrix build_sensing_matrix(const Network& net, const SensorSet& sensors,
                                   const ZBus& zbus) {
  validate_sensors(net, sensors);
  const int m = static_cast<int>(sensors.monitored_line_ids.size());
  const int n = net.bus_count();

  SensingMatrix sensing;
  sensing.B_complex.resize(m, n);
  sensing.row_lines = sensors.monitored_line_ids;
  sensing.column_buses.reserve(n);
  for (int k = 0; k < n; ++k) {
    sensing.column_buses.push_back(net.bus_id(k));
  }
  for (int row = 0; row < m; ++row) {
    const Line& line = net.line(sensors.monitored_line_ids[row]);
    for (int k = 0; k < n; ++k) {
      sensing.B_complex(row, k) = beta_coefficient(net, line, k, zbus);
    }
  }
  sensing.B_real = realify_matrix(sensing.B_complex);
  return sensing;
}

}  // namespace faultloc
