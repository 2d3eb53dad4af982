#include "faultloc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "faultloc/errors.hpp"
#include "faultloc/io.hpp"
#include "faultloc/rng.hpp"
#include "faultloc/stacking.hpp"

namespace faultloc {

namespace {

using nlohmann::json;

std::string sanitize(std::string text) {
  for (char& c : text) {
    if (c == ',' || c == '\n' || c == '\r') {
      c = ' ';
    }
  }
  return text;
}

double median_of(std::vector<double> values) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) {
    return values[mid];
  }
  return 0.5 * (values[mid - 1] + values[mid]);
}

struct ScenarioTask {
  std::string line_id;
  double x = 0.0;
  double noise_rel = 0.0;
  double outlier_fraction = 0.0;
  int repetition = 0;
  std::uint64_t seed = 0;
};

}  // namespace

std::uint64_t derive_scenario_seed(std::uint64_t base_seed, const std::string& line_id,
                                   double x, double noise_rel, double outlier_fraction,
                                   int repetition) {
  std::ostringstream key;
  key << line_id << '|' << format_double(x) << '|' << format_double(noise_rel) << '|'
      << format_double(outlier_fraction) << '|' << repetition;
  return base_seed ^ fnv1a64(key.str());
}

BenchmarkReport run_benchmark(const BenchmarkSpec& spec, const Network& net,
                              const SensingMatrix& sensing) {
  if (spec.repetitions < 1) {
    throw ValidationError("benchmark repetitions must be >= 1");
  }
  if (spec.solvers.empty()) {
    throw ValidationError("benchmark needs at least one solver");
  }
  for (const double x : spec.x_values) {
    if (!(x > 0.0 && x < 1.0)) {
      throw ValidationError("benchmark x values must lie in (0, 1)");
    }
  }

  std::vector<std::string> lines = spec.line_ids;
  if (lines.empty()) {
    for (const Line& line : net.lines()) {
      lines.push_back(line.id);
    }
  }

  std::vector<ScenarioTask> tasks;
  for (const std::string& line_id : lines) {
    for (const double x : spec.x_values) {
      for (const double noise : spec.noise_levels) {
        for (const double outlier : spec.outlier_fractions) {
          for (int rep = 0; rep < spec.repetitions; ++rep) {
            ScenarioTask task{line_id, x, noise, outlier, rep,
                              derive_scenario_seed(spec.base_seed, line_id, x, noise,
                                                   outlier, rep)};
            tasks.push_back(std::move(task));
          }
        }
      }
    }
  }

  const std::size_t solver_count = spec.solvers.size();
  BenchmarkReport report;
  report.rows.resize(tasks.size() * solver_count);

  const auto started = std::chrono::steady_clock::now();
  std::atomic<std::size_t> cursor{0};
  const auto worker = [&]() {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= tasks.size()) {
        return;
      }
      const ScenarioTask& task = tasks[t];
      FaultScenario scn;
      scn.line_id = task.line_id;
      scn.x = task.x;
      scn.fault_current = spec.fault_current;
      scn.noise_rel = task.noise_rel;
      scn.outlier_fraction = task.outlier_fraction;
      scn.outlier_scale = spec.outlier_scale;
      scn.seed = task.seed;

      for (std::size_t s = 0; s < solver_count; ++s) {
        BenchmarkRow& row = report.rows[t * solver_count + s];
        row.line_id = task.line_id;
        row.x_true = task.x;
        row.noise_rel = task.noise_rel;
        row.outlier_fraction = task.outlier_fraction;
        row.repetition = task.repetition;
        row.solver = to_string(spec.solvers[s]);
        row.seed = task.seed;
        try {
          const auto [measurements, injection] = generate_case(scn, net, sensing);
          GroundTruth truth{task.line_id, task.x, injection.theta};
          RecoveryResult recovery;
          const LocationResult loc =
              locate_pipeline(net, sensing, measurements.y_corrupted, spec.solvers[s],
                              spec.solver_config, truth, &recovery);
          row.identified_line = loc.line_id;
          row.x_hat = loc.x_hat;
          row.error_percent = loc.x_error_percent.value_or(0.0);
          row.normalized_error = loc.normalized_recovery_error.value_or(0.0);
          row.support_score = loc.support_score;
          row.iterations = recovery.iterations;
          row.converged = recovery.converged;
        } catch (const NoFaultDetected& err) {
          row.status = sanitize(std::string("error: ") + err.what());
        } catch (const std::exception& err) {
          row.status = sanitize(std::string("error: ") + err.what());
        }
      }
    }
  };

  const int workers = std::max(1, spec.workers);
  if (workers == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const int spawn = std::min<std::size_t>(workers, tasks.size());
    pool.reserve(spawn);
    for (int i = 0; i < spawn; ++i) {
      pool.emplace_back(worker);
    }
    for (std::thread& th : pool) {
      th.join();
    }
  }

  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BenchmarkRow& a, const BenchmarkRow& b) {
                     return std::tie(a.line_id, a.x_true, a.noise_rel, a.outlier_fraction,
                                     a.repetition, a.solver) <
                            std::tie(b.line_id, b.x_true, b.noise_rel, b.outlier_fraction,
                                     b.repetition, b.solver);
                   });
  report.aggregates = aggregate_rows(report.rows);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<CellAggregate> aggregate_rows(const std::vector<BenchmarkRow>& rows) {
  using Key = std::tuple<std::string, std::string, double, double, double>;
  std::map<Key, std::vector<const BenchmarkRow*>> cells;
  for (const BenchmarkRow& row : rows) {
    cells[{row.line_id, row.solver, row.noise_rel, row.outlier_fraction, row.x_true}]
        .push_back(&row);
  }

  std::vector<CellAggregate> aggregates;
  aggregates.reserve(cells.size());
  for (const auto& [key, cell_rows] : cells) {
    CellAggregate agg;
    agg.line_id = std::get<0>(key);
    agg.solver = std::get<1>(key);
    agg.noise_rel = std::get<2>(key);
    agg.outlier_fraction = std::get<3>(key);
    agg.x_true = std::get<4>(key);
    std::vector<double> errors, normalized;
    for (const BenchmarkRow* row : cell_rows) {
      ++agg.count;
      if (row->status != "ok") {
        ++agg.errors;
        continue;
      }
      errors.push_back(row->error_percent);
      normalized.push_back(row->normalized_error);
    }
    if (!errors.empty()) {
      double sum = 0.0, nsum = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < errors.size(); ++i) {
        sum += errors[i];
        nsum += normalized[i];
        peak = std::max(peak, errors[i]);
      }
      agg.mean_error_percent = sum / static_cast<double>(errors.size());
      agg.mean_normalized_error = nsum / static_cast<double>(normalized.size());
      agg.max_error_percent = peak;
      agg.median_error_percent = median_of(errors);
      agg.median_normalized_error = median_of(normalized);
    }
    aggregates.push_back(std::move(agg));
  }
  return aggregates;
}

void write_rows_csv(const std::filesystem::path& path, const std::vector<BenchmarkRow>& rows) {
  std::ostringstream out;
  out << "line,x_true,noise_rel,outlier_fraction,repetition,solver,seed,status,"
         "identified_line,x_hat,error_percent,normalized_error,support_score,iterations,"
         "converged\n";
  for (const BenchmarkRow& row : rows) {
    out << row.line_id << ',' << format_double(row.x_true) << ','
        << format_double(row.noise_rel) << ',' << format_double(row.outlier_fraction) << ','
        << row.repetition << ',' << row.solver << ',' << row.seed << ','
        << sanitize(row.status) << ',' << row.identified_line << ','
        << format_double(row.x_hat) << ',' << format_double(row.error_percent) << ','
        << format_double(row.normalized_error) << ',' << format_double(row.support_score)
        << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<BenchmarkRow> read_rows_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string header;
  std::getline(in, header);
  std::vector<BenchmarkRow> rows;
  std::string row_text;
  while (std::getline(in, row_text)) {
    if (row_text.empty()) continue;
    std::istringstream cells(row_text);
    std::string cell;
    std::vector<std::string> fields;
    while (std::getline(cells, cell, ',')) {
      fields.push_back(cell);
    }
    if (fields.size() != 15) {
      throw ValidationError("rows CSV '" + path.string() + "': malformed row '" + row_text + "'");
    }
    BenchmarkRow row;
    row.line_id = fields[0];
    row.x_true = std::stod(fields[1]);
    row.noise_rel = std::stod(fields[2]);
    row.outlier_fraction = std::stod(fields[3]);
    row.repetition = std::stoi(fields[4]);
    row.solver = fields[5];
    row.seed = std::stoull(fields[6]);
    row.status = fields[7];
    row.identified_line = fields[8];
    row.x_hat = std::stod(fields[9]);
    row.error_percent = std::stod(fields[10]);
    row.normalized_error = std::stod(fields[11]);
    row.support_score = std::stod(fields[12]);
    row.iterations = std::stoi(fields[13]);
    row.converged = fields[14] == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<CellAggregate>& aggregates,
                         const std::vector<double>& x_values) {
  std::ostringstream out;
  out << "line,solver,noise_rel,outlier_fraction,metric";
  for (const double x : x_values) {
    out << ",x_" << format_double(x);
  }
  out << '\n';

  using GroupKey = std::tuple<std::string, std::string, double, double>;
  std::map<GroupKey, std::map<double, const CellAggregate*>> groups;
  for (const CellAggregate& agg : aggregates) {
    groups[{agg.line_id, agg.solver, agg.noise_rel, agg.outlier_fraction}][agg.x_true] = &agg;
  }

  const auto emit = [&](const GroupKey& key,
                        const std::map<double, const CellAggregate*>& by_x,
                        const char* metric, auto getter) {
    out << std::get<0>(key) << ',' << std::get<1>(key) << ','
        << format_double(std::get<2>(key)) << ',' << format_double(std::get<3>(key)) << ','
        << metric;
    for (const double x : x_values) {
      out << ',';
      const auto it = by_x.find(x);
      if (it != by_x.end()) {
        out << getter(*it->second);
      }
    }
    out << '\n';
  };

  for (const auto& [key, by_x] : groups) {
    emit(key, by_x, "mean_error_percent",
         [](const CellAggregate& a) { return format_double(a.mean_error_percent); });
    emit(key, by_x, "median_error_percent",
         [](const CellAggregate& a) { return format_double(a.median_error_percent); });
    emit(key, by_x, "max_error_percent",
         [](const CellAggregate& a) { return format_double(a.max_error_percent); });
    emit(key, by_x, "mean_normalized_error",
         [](const CellAggregate& a) { return format_double(a.mean_normalized_error); });
    emit(key, by_x, "median_normalized_error",
         [](const CellAggregate& a) { return format_double(a.median_normalized_error); });
    emit(key, by_x, "count", [](const CellAggregate& a) { return std::to_string(a.count); });
    emit(key, by_x, "errors", [](const CellAggregate& a) { return std::to_string(a.errors); });
  }
  write_text_file(path, out.str());
}

void write_summary_json(const std::filesystem::path& path, const BenchmarkSpec& spec,
                        const BenchmarkReport& report) {
  json aggregates = json::array();
  for (const CellAggregate& agg : report.aggregates) {
    aggregates.push_back(json{{"line", agg.line_id},
                              {"solver", agg.solver},
                              {"noise_rel", agg.noise_rel},
                              {"outlier_fraction", agg.outlier_fraction},
                              {"x_true", agg.x_true},
                              {"count", agg.count},
                              {"errors", agg.errors},
                              {"mean_error_percent", agg.mean_error_percent},
                              {"median_error_percent", agg.median_error_percent},
                              {"max_error_percent", agg.max_error_percent},
                              {"mean_normalized_error", agg.mean_normalized_error},
                              {"median_normalized_error", agg.median_normalized_error}});
  }
  json solvers = json::array();
  for (const SolverKind kind : spec.solvers) {
    solvers.push_back(to_string(kind));
  }
  const json j{{"network", spec.network_file.string()},
               {"sensors", spec.sensors_file.string()},
               {"base_seed", spec.base_seed},
               {"repetitions", spec.repetitions},
               {"solvers", solvers},
               {"rows", report.rows.size()},
               {"wall_seconds", report.wall_seconds},
               {"aggregates", aggregates}};
  write_text_file(path, j.dump(2) + "\n");
}

// ---- CLI command layer -----------------------------------------------------

namespace {

struct LoadedCase {
  Network net;
  SensorSet sensors;
  ZBus zbus;
  SensingMatrix sensing;
};

LoadedCase load_case(const std::filesystem::path& network_file,
                     const std::filesystem::path& sensors_file) {
  Network net = load_network_file(network_file);
  SensorSet sensors = load_sensors_file(sensors_file);
  validate_sensors(net, sensors);
  ZBus zbus = build_zbus(build_ybus(net));
  SensingMatrix sensing = build_sensing_matrix(net, sensors, zbus);
  return {std::move(net), std::move(sensors), std::move(zbus), std::move(sensing)};
}

FaultScenario pick_scenario(const std::filesystem::path& scenario_file, int index,
                            const std::optional<std::uint64_t>& seed_override) {
  const std::vector<FaultScenario> scenarios = load_scenarios_file(scenario_file);
  if (index < 0 || index >= static_cast<int>(scenarios.size())) {
    throw ValidationError("scenario index " + std::to_string(index) + " out of range (file has " +
                          std::to_string(scenarios.size()) + " scenarios)");
  }
  FaultScenario scn = scenarios[index];
  if (seed_override.has_value()) {
    scn.seed = *seed_override;
  }
  return scn;
}

std::filesystem::path resolve_against(const std::filesystem::path& base,
                                      const std::filesystem::path& p) {
  if (p.is_absolute()) {
    return p;
  }
  return base / p;
}

}  // namespace

void cmd_simulate(const SimulateArgs& args) {
  const LoadedCase loaded = load_case(args.network_file, args.sensors_file);
  const FaultScenario scn = pick_scenario(args.scenario_file, args.scenario_index,
                                          args.seed_override);
  const auto [measurements, injection] = generate_case(scn, loaded.net, loaded.sensing);
  write_measurements_csv(args.out_csv, measurements);
  std::cout << "simulated fault on line " << scn.line_id << " at x=" << scn.x << ", "
            << measurements.y_clean.size() << " stacked measurements ("
            << measurements.outlier_indices.size() << " outliers) -> " << args.out_csv.string()
            << '\n';
}

LocateOutcome cmd_locate(const LocateArgs& args) {
  const LoadedCase loaded = load_case(args.network_file, args.sensors_file);
  const MeasurementSet measurements = read_measurements_csv(args.measurements_csv);
  if (measurements.y_corrupted.size() != loaded.sensing.B_real.rows()) {
    throw ValidationError("measurement CSV has " + std::to_string(measurements.y_corrupted.size()) +
                          " rows but the sensor set implies " +
                          std::to_string(loaded.sensing.B_real.rows()));
  }
  SolverConfig cfg;
  if (args.config_file.has_value()) {
    cfg = load_solver_config_file(*args.config_file);
  }
  const SolverKind kind = solver_kind_from_string(args.solver);

  std::optional<GroundTruth> truth;
  if (args.truth_line.has_value() && args.truth_x.has_value()) {
    truth = GroundTruth{*args.truth_line, *args.truth_x, CVector()};
  }

  LocateOutcome outcome;
  RecoveryResult recovery;
  try {
    outcome.result = locate_pipeline(loaded.net, loaded.sensing, measurements.y_corrupted,
                                     kind, cfg, truth, &recovery);
    outcome.fault_detected = true;
  } catch (const NoFaultDetected&) {
    outcome.fault_detected = false;
    write_text_file(args.out_json, json{{"fault_detected", false}}.dump(2) + "\n");
    std::cout << "no fault detected\n";
    return outcome;
  }

  write_text_file(args.out_json, location_result_to_json(outcome.result).dump(2) + "\n");
  if (args.trace_csv.has_value()) {
    write_objective_trace_csv(*args.trace_csv, recovery.objective_trace);
  }
  std::cout << "fault located on line " << outcome.result.line_id
            << " at x=" << outcome.result.x_hat << " (score " << outcome.result.support_score
            << ")";
  if (outcome.result.x_error_percent.has_value()) {
    std::cout << ", error " << *outcome.result.x_error_percent << "%";
  }
  std::cout << " -> " << args.out_json.string() << '\n';
  return outcome;
}

BenchmarkSpec load_benchmark_spec_file(const std::filesystem::path& path) {
  const json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ValidationError("benchmark spec '" + path.string() + "': malformed JSON");
  }
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";

  BenchmarkSpec spec;
  if (!j.contains("network") || !j.contains("sensors")) {
    throw ValidationError("benchmark spec needs 'network' and 'sensors' paths");
  }
  spec.network_file = resolve_against(base, j["network"].get<std::string>());
  spec.sensors_file = resolve_against(base, j["sensors"].get<std::string>());
  if (j.contains("lines") && j["lines"].is_array()) {
    for (const json& id : j["lines"]) {
      spec.line_ids.push_back(id.get<std::string>());
    }
  }
  const auto fill_doubles = [&](const char* key, std::vector<double>& target) {
    if (j.contains(key)) {
      target.clear();
      for (const json& v : j[key]) {
        target.push_back(v.get<double>());
      }
    }
  };
  fill_doubles("x_values", spec.x_values);
  fill_doubles("noise_levels", spec.noise_levels);
  fill_doubles("outlier_fractions", spec.outlier_fractions);
  if (j.contains("outlier_scale")) spec.outlier_scale = j["outlier_scale"].get<double>();
  if (j.contains("fault_current")) {
    spec.fault_current = {j["fault_current"]["re"].get<double>(),
                          j["fault_current"]["im"].get<double>()};
  }
  if (j.contains("repetitions")) spec.repetitions = j["repetitions"].get<int>();
  if (j.contains("solvers")) {
    spec.solvers.clear();
    for (const json& name : j["solvers"]) {
      spec.solvers.push_back(solver_kind_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("base_seed")) spec.base_seed = j["base_seed"].get<std::uint64_t>();
  if (j.contains("workers")) spec.workers = j["workers"].get<int>();
  if (j.contains("solver")) spec.solver_config = solver_config_from_json(j["solver"]);
  return spec;
}

BenchmarkReport cmd_benchmark(const BenchmarkArgs& args, std::filesystem::path* out_dir_used) {
  BenchmarkSpec spec = load_benchmark_spec_file(args.spec_file);
  if (args.seed_override.has_value()) {
    spec.base_seed = *args.seed_override;
  }
  if (args.workers_override.has_value()) {
    spec.workers = *args.workers_override;
  }
  std::filesystem::path out_dir = args.out_dir.value_or(std::filesystem::path("bench_out"));
  if (out_dir_used != nullptr) {
    *out_dir_used = out_dir;
  }

  const LoadedCase loaded = load_case(spec.network_file, spec.sensors_file);
  const BenchmarkReport report = run_benchmark(spec, loaded.net, loaded.sensing);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  write_rows_csv(out_dir / "rows.csv", report.rows);
  write_aggregate_csv(out_dir / "aggregate.csv", report.aggregates, spec.x_values);
  write_summary_json(out_dir / "summary.json", spec, report);

  std::cout << "benchmark: " << report.rows.size() << " rows in " << report.wall_seconds
            << " s -> " << out_dir.string() << '\n';
  for (const CellAggregate& agg : report.aggregates) {
    std::cout << "  " << agg.line_id << " x=" << agg.x_true << " noise=" << agg.noise_rel
              << " outliers=" << agg.outlier_fraction << " " << agg.solver
              << ": mean err " << agg.mean_error_percent << "%"
              << " (n=" << agg.count << ", failures=" << agg.errors << ")\n";
  }
  return report;
}

std::vector<SolverComparison> cmd_compare_solvers(const CompareArgs& args) {
  const LoadedCase loaded = load_case(args.network_file, args.sensors_file);
  const FaultScenario scn = pick_scenario(args.scenario_file, args.scenario_index,
                                          args.seed_override);
  SolverConfig cfg;
  if (args.config_file.has_value()) {
    cfg = load_solver_config_file(*args.config_file);
  }
  const auto [measurements, injection] = generate_case(scn, loaded.net, loaded.sensing);
  const GroundTruth truth{scn.line_id, scn.x, injection.theta};

  std::error_code ec;
  std::filesystem::create_directories(args.out_dir, ec);

  std::vector<SolverComparison> table;
  json summary = json::array();
  for (const SolverKind kind : {SolverKind::kYall1, SolverKind::kHuber, SolverKind::kLasso}) {
    SolverComparison cmp;
    cmp.solver = to_string(kind);
    RecoveryResult recovery;
    const LocationResult loc = locate_pipeline(loaded.net, loaded.sensing,
                                               measurements.y_corrupted, kind, cfg, truth,
                                               &recovery);
    cmp.normalized_error = loc.normalized_recovery_error.value_or(0.0);
    cmp.identified_line = loc.line_id;
    cmp.x_hat = loc.x_hat;
    cmp.error_percent = loc.x_error_percent.value_or(0.0);
    cmp.objective = recovery.objective_trace.empty() ? 0.0 : recovery.objective_trace.back();
    cmp.iterations = recovery.iterations;
    cmp.converged = recovery.converged;

    std::ostringstream dump;
    dump << "index,theta\n";
    for (Eigen::Index k = 0; k < recovery.theta.size(); ++k) {
      dump << k << ',' << format_double(recovery.theta(k)) << '\n';
    }
    write_text_file(args.out_dir / ("theta_" + cmp.solver + ".csv"), dump.str());
    write_objective_trace_csv(args.out_dir / ("trace_" + cmp.solver + ".csv"),
                              recovery.objective_trace);

    summary.push_back(json{{"solver", cmp.solver},
                           {"normalized_error", cmp.normalized_error},
                           {"identified_line", cmp.identified_line},
                           {"x_hat", cmp.x_hat},
                           {"error_percent", cmp.error_percent},
                           {"objective", cmp.objective},
                           {"iterations", cmp.iterations},
                           {"converged", cmp.converged}});
    table.push_back(std::move(cmp));
  }

  std::ostringstream csv;
  csv << "solver,normalized_error,identified_line,x_hat,error_percent,objective,iterations,"
         "converged\n";
  for (const SolverComparison& cmp : table) {
    csv << cmp.solver << ',' << format_double(cmp.normalized_error) << ','
        << cmp.identified_line << ',' << format_double(cmp.x_hat) << ','
        << format_double(cmp.error_percent) << ',' << format_double(cmp.objective) << ','
        << cmp.iterations << ',' << (cmp.converged ? 1 : 0) << '\n';
  }
  write_text_file(args.out_dir / "comparison.csv", csv.str());
  write_text_file(args.out_dir / "comparison.json", summary.dump(2) + "\n");

  std::cout << "solver comparison on line " << scn.line_id << " (x=" << scn.x
            << ", noise=" << scn.noise_rel << ", outliers=" << scn.outlier_fraction << "):\n";
  for (const SolverComparison& cmp : table) {
    std::cout << "  " << cmp.solver << ": normalized error " << cmp.normalized_error
              << ", line " << cmp.identified_line << ", x=" << cmp.x_hat << " (err "
              << cmp.error_percent << "%)\n";
  }
  return table;
}

}  // namespace faultloc
