#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "faultloc/locator.hpp"
#include "faultloc/network.hpp"
#include "faultloc/simkit.hpp"
#include "faultloc/solvers.hpp"

namespace faultloc {

// Shortest-round-trip formatting ("%.17g"); used for every CSV/JSON number so
// reruns are byte-identical.
std::string format_double(double v);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// Network document: {"buses": [{"id", "shunt_admittance": {re, im}}],
// "lines": [{"id", "from", "to", "z": {re, im}, "gamma": {re, im},
// "length_km"}]}. SI units throughout.
Network load_network(const std::string& json_text);
Network load_network_file(const std::filesystem::path& path);

// {"monitored_lines": ["L1", ...]}
SensorSet load_sensors(const std::string& json_text);
SensorSet load_sensors_file(const std::filesystem::path& path);

// A single scenario object or a list of them.
std::vector<FaultScenario> load_scenarios(const std::string& json_text);
std::vector<FaultScenario> load_scenarios_file(const std::filesystem::path& path);

SolverConfig solver_config_from_json(const nlohmann::json& j);
SolverConfig load_solver_config_file(const std::filesystem::path& path);

nlohmann::json location_result_to_json(const LocationResult& result);

// CSV with columns index, y_clean, y_noisy, y_corrupted, is_outlier.
void write_measurements_csv(const std::filesystem::path& path, const MeasurementSet& set);
MeasurementSet read_measurements_csv(const std::filesystem::path& path);

// CSV with columns iteration, objective.
void write_objective_trace_csv(const std::filesystem::path& path,
                               const std::vector<double>& trace);

}  // namespace faultloc
