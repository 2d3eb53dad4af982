#include "faultloc/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "faultloc/errors.hpp"

namespace faultloc {

namespace {

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw ValidationError(std::string(what) + ": malformed JSON");
  }
  return j;
}

Complex parse_complex(const json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("re") || !j.contains("im")) {
    throw ValidationError(context + ": complex values must be {\"re\": ..., \"im\": ...}");
  }
  if (!j["re"].is_number() || !j["im"].is_number()) {
    throw ValidationError(context + ": complex parts must be numbers");
  }
  return {j["re"].get<double>(), j["im"].get<double>()};
}

json complex_to_json(Complex c) { return json{{"re", c.real()}, {"im", c.imag()}}; }

double require_number(const json& j, const char* key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ValidationError(context + ": missing or non-numeric field '" + key + "'");
  }
  return j[key].get<double>();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "' for reading");
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

Network load_network(const std::string& json_text) {
  const json j = parse_json(json_text, "network document");
  if (!j.is_object() || !j.contains("buses") || !j.contains("lines") ||
      !j["buses"].is_array() || !j["lines"].is_array()) {
    throw ValidationError("network document: expected object with 'buses' and 'lines' arrays");
  }

  std::vector<Bus> buses;
  for (const json& jb : j["buses"]) {
    Bus bus;
    if (!jb.contains("id") || !jb["id"].is_number_integer()) {
      throw ValidationError("bus entry without integer 'id'");
    }
    bus.id = jb["id"].get<int>();
    const std::string ctx = "bus " + std::to_string(bus.id);
    if (jb.contains("shunt_admittance")) {
      bus.shunt_admittance = parse_complex(jb["shunt_admittance"], ctx);
    }
    buses.push_back(bus);
  }

  std::vector<Line> lines;
  for (const json& jl : j["lines"]) {
    Line line;
    if (!jl.contains("id") || !jl["id"].is_string()) {
      throw ValidationError("line entry without string 'id'");
    }
    line.id = jl["id"].get<std::string>();
    const std::string ctx = "line '" + line.id + "'";
    if (!jl.contains("from") || !jl["from"].is_number_integer() || !jl.contains("to") ||
        !jl["to"].is_number_integer()) {
      throw ValidationError(ctx + ": 'from' and 'to' must be integer bus ids");
    }
    line.from_bus = jl["from"].get<int>();
    line.to_bus = jl["to"].get<int>();
    if (!jl.contains("z") || !jl.contains("gamma")) {
      throw ValidationError(ctx + ": missing 'z' or 'gamma'");
    }
    line.surge_impedance = parse_complex(jl["z"], ctx);
    line.propagation = parse_complex(jl["gamma"], ctx);
    line.length_km = require_number(jl, "length_km", ctx);
    lines.push_back(line);
  }
  return Network(std::move(buses), std::move(lines));
}

Network load_network_file(const std::filesystem::path& path) {
  return load_network(read_text_file(path));
}

SensorSet load_sensors(const std::string& json_text) {
  const json j = parse_json(json_text, "sensor document");
  if (!j.is_object() || !j.contains("monitored_lines") || !j["monitored_lines"].is_array()) {
    throw ValidationError("sensor document: expected {\"monitored_lines\": [...]}");
  }
  SensorSet sensors;
  for (const json& id : j["monitored_lines"]) {
    if (!id.is_string()) {
      throw ValidationError("sensor document: monitored line ids must be strings");
    }
    sensors.monitored_line_ids.push_back(id.get<std::string>());
  }
  return sensors;
}

SensorSet load_sensors_file(const std::filesystem::path& path) {
  return load_sensors(read_text_file(path));
}

namespace {

FaultScenario parse_scenario(const json& j) {
  if (!j.is_object() || !j.contains("line_id") || !j["line_id"].is_string()) {
    throw ValidationError("scenario entry: missing string 'line_id'");
  }
  FaultScenario scn;
  scn.line_id = j["line_id"].get<std::string>();
  const std::string ctx = "scenario on line '" + scn.line_id + "'";
  scn.x = require_number(j, "x", ctx);
  if (j.contains("fault_current")) {
    scn.fault_current = parse_complex(j["fault_current"], ctx);
  }
  if (j.contains("noise_rel")) scn.noise_rel = require_number(j, "noise_rel", ctx);
  if (j.contains("outlier_fraction")) {
    scn.outlier_fraction = require_number(j, "outlier_fraction", ctx);
  }
  if (j.contains("outlier_scale")) scn.outlier_scale = require_number(j, "outlier_scale", ctx);
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
      throw ValidationError(ctx + ": 'seed' must be an integer");
    }
    scn.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("noise_model")) {
    const std::string model = j["noise_model"].get<std::string>();
    if (model == "real_components") {
      scn.noise_model = NoiseModel::kRealComponents;
    } else if (model == "phasor_polar") {
      scn.noise_model = NoiseModel::kPhasorPolar;
    } else {
      throw ValidationError(ctx + ": unknown noise_model '" + model + "'");
    }
  }
  return scn;
}

}  // namespace

std::vector<FaultScenario> load_scenarios(const std::string& json_text) {
  const json j = parse_json(json_text, "scenario document");
  std::vector<FaultScenario> scenarios;
  if (j.is_array()) {
    for (const json& entry : j) {
      scenarios.push_back(parse_scenario(entry));
    }
  } else {
    scenarios.push_back(parse_scenario(j));
  }
  if (scenarios.empty()) {
    throw ValidationError("scenario document contains no scenarios");
  }
  return scenarios;
}

std::vector<FaultScenario> load_scenarios_file(const std::filesystem::path& path) {
  return load_scenarios(read_text_file(path));
}

SolverConfig solver_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ValidationError("solver config must be a JSON object");
  }
  SolverConfig cfg;
  const auto num = [&](const char* key, double& field) {
    if (j.contains(key)) field = j[key].get<double>();
  };
  num("lambda", cfg.lambda);
  num("lambda_rel", cfg.lambda_rel);
  num("rho", cfg.rho);
  num("tau", cfg.tau);
  num("tau_scale", cfg.tau_scale);
  num("huber_delta", cfg.huber_delta);
  num("huber_delta_rel", cfg.huber_delta_rel);
  num("tol", cfg.tol);
  if (j.contains("max_iter")) cfg.max_iter = j["max_iter"].get<int>();
  if (j.contains("threshold_mode")) {
    const std::string mode = j["threshold_mode"].get<std::string>();
    if (mode == "canonical") {
      cfg.threshold_mode = ThresholdMode::kCanonical;
    } else if (mode == "paper-literal" || mode == "paper_literal") {
      cfg.threshold_mode = ThresholdMode::kPaperLiteral;
    } else {
      throw ValidationError("unknown threshold_mode '" + mode + "'");
    }
  }
  return cfg;
}

SolverConfig load_solver_config_file(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path), "config file");
  if (j.contains("solver")) {
    return solver_config_from_json(j["solver"]);
  }
  return solver_config_from_json(j);
}

nlohmann::json location_result_to_json(const LocationResult& result) {
  json j{{"fault_detected", true},
         {"line_id", result.line_id},
         {"x_hat", result.x_hat},
         {"support_score", result.support_score},
         {"imag_residual", result.imag_residual},
         {"clamped", result.clamped},
         {"reliable", result.reliable},
         {"bus_fault", result.bus_fault}};
  if (std::isfinite(std::abs(result.injection_ratio))) {
    j["injection_ratio"] = complex_to_json(result.injection_ratio);
  }
  if (result.bus_fault) {
    j["bus_fault_bus"] = result.bus_fault_bus;
  }
  if (result.x_error_percent.has_value()) {
    j["x_error_percent"] = *result.x_error_percent;
  }
  if (result.normalized_recovery_error.has_value()) {
    j["normalized_recovery_error"] = *result.normalized_recovery_error;
  }
  return j;
}

void write_measurements_csv(const std::filesystem::path& path, const MeasurementSet& set) {
  std::ostringstream out;
  out << "index,y_clean,y_noisy,y_corrupted,is_outlier\n";
  std::size_t outlier_pos = 0;
  for (Eigen::Index k = 0; k < set.y_clean.size(); ++k) {
    bool is_outlier = false;
    if (outlier_pos < set.outlier_indices.size() &&
        set.outlier_indices[outlier_pos] == static_cast<int>(k)) {
      is_outlier = true;
      ++outlier_pos;
    }
    out << k << ',' << format_double(set.y_clean(k)) << ',' << format_double(set.y_noisy(k))
        << ',' << format_double(set.y_corrupted(k)) << ',' << (is_outlier ? 1 : 0) << '\n';
  }
  write_text_file(path, out.str());
}

void write_objective_trace_csv(const std::filesystem::path& path,
                               const std::vector<double>& trace) {
  std::ostringstream out;
  out << "iteration,objective\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << (k + 1) << ',' << format_double(trace[k]) << '\n';
  }
  write_text_file(path, out.str());
}

MeasurementSet read_measurements_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string header;
  if (!std::getline(in, header) || header != "index,y_clean,y_noisy,y_corrupted,is_outlier") {
    throw ValidationError("measurement CSV '" + path.string() + "': unexpected header");
  }
  std::vector<double> clean, noisy, corrupted;
  std::vector<int> outliers;
  std::string row;
  while (std::getline(in, row)) {
    if (row.empty()) continue;
    std::istringstream cells(row);
    std::string cell;
    std::vector<std::string> fields;
    while (std::getline(cells, cell, ',')) {
      fields.push_back(cell);
    }
    if (fields.size() != 5) {
      throw ValidationError("measurement CSV '" + path.string() + "': malformed row '" + row + "'");
    }
    clean.push_back(std::stod(fields[1]));
    noisy.push_back(std::stod(fields[2]));
    corrupted.push_back(std::stod(fields[3]));
    if (fields[4] == "1") {
      outliers.push_back(static_cast<int>(clean.size()) - 1);
    }
  }
  MeasurementSet set;
  set.y_clean = Eigen::Map<const RVector>(clean.data(), clean.size());
  set.y_noisy = Eigen::Map<const RVector>(noisy.data(), noisy.size());
  set.y_corrupted = Eigen::Map<const RVector>(corrupted.data(), corrupted.size());
  set.outlier_indices = std::move(outliers);
  return set;
}

}  // namespace faultloc
