#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "faultloc/bench.hpp"
#include "faultloc/errors.hpp"
#include "faultloc/io.hpp"

#include "test_util.hpp"

using namespace faultloc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::current_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& path, const std::string& text) {
  write_text_file(path, text);
  return path;
}

const char* kScenarioJson = R"([{
  "line_id": "L2-3",
  "x": 0.45,
  "fault_current": {"re": 310.6, "im": -1159.1},
  "noise_rel": 0.0,
  "outlier_fraction": 0.0,
  "seed": 7
}])";

const char* kNoiselessConfig = R"({
  "solver": {"lambda_rel": 1e-4, "tol": 1e-12, "max_iter": 300000}
})";

}  // namespace

TEST_CASE("cmd_simulate writes a deterministic measurement dump") {
  TempDir tmp("cli_tmp_simulate");
  const fs::path scenario = write_file(tmp.path / "scenario.json", kScenarioJson);

  SimulateArgs args;
  args.network_file = testutil::data_dir() / "bench6_network.json";
  args.sensors_file = testutil::data_dir() / "bench6_sensors.json";
  args.scenario_file = scenario;
  args.out_csv = tmp.path / "measurements.csv";
  cmd_simulate(args);

  const MeasurementSet set = read_measurements_csv(args.out_csv);
  CHECK(set.y_corrupted.size() == 10);  // 2M rows for M = 5 sensors

  const std::string first = read_text_file(args.out_csv);
  args.out_csv = tmp.path / "measurements2.csv";
  cmd_simulate(args);
  CHECK(read_text_file(args.out_csv) == first);

  SUBCASE("missing network file raises an io error") {
    args.network_file = tmp.path / "missing.json";
    CHECK_THROWS_AS(cmd_simulate(args), IoError);
  }
  SUBCASE("out-of-range scenario index raises a validation error") {
    args.scenario_index = 5;
    CHECK_THROWS_AS(cmd_simulate(args), ValidationError);
  }
}

TEST_CASE("cmd_locate") {
  TempDir tmp("cli_tmp_locate");
  const fs::path scenario = write_file(tmp.path / "scenario.json", kScenarioJson);
  const fs::path config = write_file(tmp.path / "config.json", kNoiselessConfig);

  SimulateArgs sim;
  sim.network_file = testutil::data_dir() / "bench6_network.json";
  sim.sensors_file = testutil::data_dir() / "bench6_sensors.json";
  sim.scenario_file = scenario;
  sim.out_csv = tmp.path / "measurements.csv";
  cmd_simulate(sim);

  LocateArgs args;
  args.network_file = sim.network_file;
  args.sensors_file = sim.sensors_file;
  args.measurements_csv = sim.out_csv;
  args.config_file = config;
  args.out_json = tmp.path / "result.json";
  args.truth_line = "L2-3";
  args.truth_x = 0.45;

  SUBCASE("noiseless fixture is located essentially exactly") {
    const LocateOutcome outcome = cmd_locate(args);
    REQUIRE(outcome.fault_detected);
    CHECK(outcome.result.line_id == "L2-3");
    REQUIRE(outcome.result.x_error_percent.has_value());
    CHECK(*outcome.result.x_error_percent <= 1e-6);

    const auto j = nlohmann::json::parse(read_text_file(args.out_json));
    CHECK(j["fault_detected"].get<bool>());
    CHECK(j["line_id"].get<std::string>() == "L2-3");
  }
  SUBCASE("all-zero measurements report no fault") {
    MeasurementSet zeros;
    zeros.y_clean = RVector::Zero(10);
    zeros.y_noisy = zeros.y_clean;
    zeros.y_corrupted = zeros.y_clean;
    write_measurements_csv(tmp.path / "zeros.csv", zeros);
    args.measurements_csv = tmp.path / "zeros.csv";
    const LocateOutcome outcome = cmd_locate(args);
    CHECK(!outcome.fault_detected);
    const auto j = nlohmann::json::parse(read_text_file(args.out_json));
    CHECK(!j["fault_detected"].get<bool>());
  }
  SUBCASE("unknown solver name is rejected") {
    args.solver = "magic";
    CHECK_THROWS_AS(cmd_locate(args), ValidationError);
  }
}

TEST_CASE("derived scenario seeds are stable and order independent") {
  const std::uint64_t a = derive_scenario_seed(42, "L1-2", 0.3, 0.01, 0.0, 5);
  const std::uint64_t b = derive_scenario_seed(42, "L1-2", 0.3, 0.01, 0.0, 5);
  CHECK(a == b);
  CHECK(a != derive_scenario_seed(42, "L1-2", 0.3, 0.01, 0.0, 6));
  CHECK(a != derive_scenario_seed(42, "L1-2", 0.5, 0.01, 0.0, 5));
  CHECK(a != derive_scenario_seed(43, "L1-2", 0.3, 0.01, 0.0, 5));
}

TEST_CASE("cmd_benchmark") {
  TempDir tmp("cli_tmp_benchmark");
  const std::string spec_json = std::string(R"({
    "network": ")") + (testutil::data_dir() / "bench6_network.json").string() + R"(",
    "sensors": ")" + (testutil::data_dir() / "bench6_sensors.json").string() + R"(",
    "lines": ["L2-3"],
    "x_values": [0.3],
    "noise_levels": [0.01],
    "outlier_fractions": [0.0],
    "repetitions": 2,
    "solvers": ["yall1"],
    "base_seed": 2024,
    "workers": 2,
    "solver": {"lambda_rel": 1e-4, "tol": 1e-9, "max_iter": 20000}
  })";
  const fs::path spec = write_file(tmp.path / "spec.json", spec_json);

  BenchmarkArgs args;
  args.spec_file = spec;
  args.out_dir = tmp.path / "out1";
  const BenchmarkReport report = cmd_benchmark(args);
  CHECK(report.rows.size() == 2);  // 1 line x 1 x x 1 noise x 1 fraction x 2 reps x 1 solver
  CHECK(report.aggregates.size() == 1);
  CHECK(report.aggregates[0].count == 2);
  CHECK(report.aggregates[0].errors == 0);
  CHECK(report.aggregates[0].mean_error_percent < 0.5);

  SUBCASE("rerun with the same base seed is byte-identical") {
    args.out_dir = tmp.path / "out2";
    cmd_benchmark(args);
    CHECK(read_text_file(tmp.path / "out1" / "rows.csv") ==
          read_text_file(tmp.path / "out2" / "rows.csv"));
    CHECK(read_text_file(tmp.path / "out1" / "aggregate.csv") ==
          read_text_file(tmp.path / "out2" / "aggregate.csv"));
  }
  SUBCASE("aggregates recomputed from the rows file match") {
    const auto rows = read_rows_csv(tmp.path / "out1" / "rows.csv");
    REQUIRE(rows.size() == report.rows.size());
    const auto recomputed = aggregate_rows(rows);
    REQUIRE(recomputed.size() == report.aggregates.size());
    for (std::size_t i = 0; i < recomputed.size(); ++i) {
      CHECK(std::abs(recomputed[i].mean_error_percent -
                     report.aggregates[i].mean_error_percent) <= 1e-12);
      CHECK(std::abs(recomputed[i].median_normalized_error -
                     report.aggregates[i].median_normalized_error) <= 1e-12);
      CHECK(recomputed[i].count == report.aggregates[i].count);
    }
  }
}

TEST_CASE("cmd_compare_solvers on an easy instance") {
  TempDir tmp("cli_tmp_compare");
  const fs::path scenario = write_file(tmp.path / "scenario.json", kScenarioJson);
  const fs::path config = write_file(tmp.path / "config.json", kNoiselessConfig);

  CompareArgs args;
  args.network_file = testutil::data_dir() / "bench6_network.json";
  args.sensors_file = testutil::data_dir() / "bench6_sensors.json";
  args.scenario_file = scenario;
  args.config_file = config;
  args.out_dir = tmp.path / "cmp";

  const auto table = cmd_compare_solvers(args);
  REQUIRE(table.size() == 3);
  for (const SolverComparison& cmp : table) {
    CHECK(cmp.identified_line == "L2-3");  // outlier-free: all solvers agree
  }

  for (const char* solver : {"yall1", "huber", "lasso"}) {
    const std::string dump =
        read_text_file(args.out_dir / (std::string("theta_") + solver + ".csv"));
    // header plus 2N = 12 entries
    CHECK(std::count(dump.begin(), dump.end(), '\n') == 13);

    const std::string trace =
        read_text_file(args.out_dir / (std::string("trace_") + solver + ".csv"));
    CHECK(trace.rfind("iteration,objective\n", 0) == 0);
    CHECK(std::count(trace.begin(), trace.end(), '\n') >= 2);
  }
}

TEST_CASE("cmd_locate can dump the objective trace") {
  TempDir tmp("cli_tmp_trace");
  const fs::path scenario = write_file(tmp.path / "scenario.json", kScenarioJson);

  SimulateArgs sim;
  sim.network_file = testutil::data_dir() / "bench6_network.json";
  sim.sensors_file = testutil::data_dir() / "bench6_sensors.json";
  sim.scenario_file = scenario;
  sim.out_csv = tmp.path / "m.csv";
  cmd_simulate(sim);

  LocateArgs args;
  args.network_file = sim.network_file;
  args.sensors_file = sim.sensors_file;
  args.measurements_csv = sim.out_csv;
  args.config_file = write_file(tmp.path / "config.json", kNoiselessConfig);
  args.out_json = tmp.path / "loc.json";
  args.trace_csv = tmp.path / "trace.csv";
  cmd_locate(args);

  const std::string trace = read_text_file(*args.trace_csv);
  CHECK(trace.rfind("iteration,objective\n", 0) == 0);
  // one row per iteration, monotone iteration numbers starting at 1
  std::istringstream in(trace);
  std::string line;
  std::getline(in, line);
  int expected = 1;
  while (std::getline(in, line)) {
    CHECK(line.rfind(std::to_string(expected) + ",", 0) == 0);
    ++expected;
  }
  CHECK(expected > 2);
}
