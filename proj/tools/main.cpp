#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "faultloc/bench.hpp"
#include "faultloc/errors.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Wide-area fault location from sparse branch current measurements"};
  app.require_subcommand(1);

  // simulate -------------------------------------------------------------
  faultloc::SimulateArgs sim;
  std::optional<std::uint64_t> sim_seed;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Generate a synthetic corrupted measurement set for one fault scenario");
  simulate->add_option("--network", sim.network_file, "Network JSON file")->required();
  simulate->add_option("--sensors", sim.sensors_file, "Sensor-set JSON file")->required();
  simulate->add_option("--scenario", sim.scenario_file, "Scenario JSON file")->required();
  simulate->add_option("--index", sim.scenario_index, "Scenario index when the file is a list");
  simulate->add_option("--out", sim.out_csv, "Output measurement CSV")->required();
  simulate->add_option("--seed", sim_seed, "Override the scenario RNG seed");

  // locate ---------------------------------------------------------------
  faultloc::LocateArgs loc;
  std::optional<std::string> loc_config;
  std::optional<std::string> loc_trace;
  std::optional<std::string> truth_line;
  std::optional<double> truth_x;
  CLI::App* locate = app.add_subcommand(
      "locate", "Recover the fault injection vector from a measurement CSV and locate the fault");
  locate->add_option("--network", loc.network_file, "Network JSON file")->required();
  locate->add_option("--sensors", loc.sensors_file, "Sensor-set JSON file")->required();
  locate->add_option("--measurements", loc.measurements_csv, "Measurement CSV")->required();
  locate->add_option("--solver", loc.solver, "Solver: yall1, lasso, or huber");
  locate->add_option("--config", loc_config, "Solver config JSON file");
  locate->add_option("--out", loc.out_json, "Output result JSON")->required();
  locate->add_option("--trace", loc_trace, "Dump the solver's objective trace CSV here");
  locate->add_option("--truth-line", truth_line, "Ground-truth line id (error reporting)");
  locate->add_option("--truth-x", truth_x, "Ground-truth per-unit distance");

  // benchmark ------------------------------------------------------------
  faultloc::BenchmarkArgs bench;
  std::optional<std::string> bench_out;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_workers;
  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Run a Monte-Carlo scenario grid and write rows/aggregate CSV reports");
  benchmark->add_option("--spec", bench.spec_file, "Benchmark spec JSON file")->required();
  benchmark->add_option("--out", bench_out, "Output directory (default bench_out)");
  benchmark->add_option("--seed", bench_seed, "Override the base seed");
  benchmark->add_option("--workers", bench_workers, "Override the worker count");

  // compare-solvers ------------------------------------------------------
  faultloc::CompareArgs cmp;
  std::optional<std::string> cmp_config;
  std::optional<std::uint64_t> cmp_seed;
  CLI::App* compare = app.add_subcommand(
      "compare-solvers", "Run one scenario through all three solvers and dump recovered vectors");
  compare->add_option("--network", cmp.network_file, "Network JSON file")->required();
  compare->add_option("--sensors", cmp.sensors_file, "Sensor-set JSON file")->required();
  compare->add_option("--scenario", cmp.scenario_file, "Scenario JSON file")->required();
  compare->add_option("--index", cmp.scenario_index, "Scenario index when the file is a list");
  compare->add_option("--config", cmp_config, "Solver config JSON file");
  compare->add_option("--out", cmp.out_dir, "Output directory")->required();
  compare->add_option("--seed", cmp_seed, "Override the scenario RNG seed");

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    sim.seed_override = sim_seed;
    faultloc::cmd_simulate(sim);
  } else if (locate->parsed()) {
    if (loc_config) loc.config_file = *loc_config;
    if (loc_trace) loc.trace_csv = *loc_trace;
    loc.truth_line = truth_line;
    loc.truth_x = truth_x;
    faultloc::cmd_locate(loc);
  } else if (benchmark->parsed()) {
    if (bench_out) bench.out_dir = *bench_out;
    bench.seed_override = bench_seed;
    bench.workers_override = bench_workers;
    faultloc::cmd_benchmark(bench);
  } else if (compare->parsed()) {
    if (cmp_config) cmp.config_file = *cmp_config;
    cmp.seed_override = cmp_seed;
    faultloc::cmd_compare_solvers(cmp);
  }
  return faultloc::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const faultloc::ValidationError& err) {
    std::cerr << "validation error: " << err.what() << '\n';
    return faultloc::kExitValidation;
  } catch (const faultloc::IoError& err) {
    std::cerr << "i/o error: " << err.what() << '\n';
    return faultloc::kExitIo;
  } catch (const faultloc::NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << '\n';
    return faultloc::kExitNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
}
