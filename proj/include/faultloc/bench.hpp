#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "faultloc/locator.hpp"
#include "faultloc/network.hpp"
#include "faultloc/simkit.hpp"
#include "faultloc/solvers.hpp"

namespace faultloc {

// Monte-Carlo grid: lines x distances x noise levels x outlier fractions x
// repetitions, each solved by every listed solver.
struct BenchmarkSpec {
  std::filesystem::path network_file;
  std::filesystem::path sensors_file;
  std::vector<std::string> line_ids;  // empty = every line in the network
  std::vector<double> x_values{0.1, 0.3, 0.5, 0.9};
  std::vector<double> noise_levels{0.01};
  std::vector<double> outlier_fractions{0.0};
  double outlier_scale = 1.0;
  Complex fault_current{310.6, -1159.1};
  int repetitions = 1;
  std::vector<SolverKind> solvers{SolverKind::kYall1};
  std::uint64_t base_seed = 0;
  int workers = 1;
  SolverConfig solver_config;
};

struct BenchmarkRow {
  std::string line_id;
  double x_true = 0.0;
  double noise_rel = 0.0;
  double outlier_fraction = 0.0;
  int repetition = 0;
  std::string solver;
  std::uint64_t seed = 0;
  std::string status = "ok";  // "ok" or an error note
  std::string identified_line;
  double x_hat = 0.0;
  double error_percent = 0.0;
  double normalized_error = 0.0;
  double support_score = 0.0;
  int iterations = 0;
  bool converged = false;
};

// One aggregate cell per (line, solver, noise, outlier fraction, x).
struct CellAggregate {
  std::string line_id;
  std::string solver;
  double noise_rel = 0.0;
  double outlier_fraction = 0.0;
  double x_true = 0.0;
  int count = 0;
  int errors = 0;
  double mean_error_percent = 0.0;
  double median_error_percent = 0.0;
  double max_error_percent = 0.0;
  double mean_normalized_error = 0.0;
  double median_normalized_error = 0.0;
};

struct BenchmarkReport {
  std::vector<BenchmarkRow> rows;
  std::vector<CellAggregate> aggregates;
  double wall_seconds = 0.0;
};

// Stable per-scenario seed: base XOR FNV-1a of the scenario key, so results
// do not depend on grid enumeration or worker scheduling.
std::uint64_t derive_scenario_seed(std::uint64_t base_seed, const std::string& line_id,
                                   double x, double noise_rel, double outlier_fraction,
                                   int repetition);

BenchmarkReport run_benchmark(const BenchmarkSpec& spec, const Network& net,
                              const SensingMatrix& sensing);

std::vector<CellAggregate> aggregate_rows(const std::vector<BenchmarkRow>& rows);

void write_rows_csv(const std::filesystem::path& path, const std::vector<BenchmarkRow>& rows);
std::vector<BenchmarkRow> read_rows_csv(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path,
                         const std::vector<CellAggregate>& aggregates,
                         const std::vector<double>& x_values);
void write_summary_json(const std::filesystem::path& path, const BenchmarkSpec& spec,
                        const BenchmarkReport& report);

// ---- CLI command layer -----------------------------------------------------

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

struct SimulateArgs {
  std::filesystem::path network_file;
  std::filesystem::path sensors_file;
  std::filesystem::path scenario_file;
  int scenario_index = 0;
  std::filesystem::path out_csv;
  std::optional<std::uint64_t> seed_override;
};

// Generates one synthetic measurement set and writes the CSV dump.
void cmd_simulate(const SimulateArgs& args);

struct LocateArgs {
  std::filesystem::path network_file;
  std::filesystem::path sensors_file;
  std::filesystem::path measurements_csv;
  std::string solver = "yall1";
  std::optional<std::filesystem::path> config_file;
  std::filesystem::path out_json;
  std::optional<std::filesystem::path> trace_csv;  // objective trace dump
  std::optional<std::string> truth_line;
  std::optional<double> truth_x;
};

struct LocateOutcome {
  bool fault_detected = false;
  LocationResult result;
};

LocateOutcome cmd_locate(const LocateArgs& args);

struct BenchmarkArgs {
  std::filesystem::path spec_file;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed_override;
  std::optional<int> workers_override;
};

BenchmarkReport cmd_benchmark(const BenchmarkArgs& args, std::filesystem::path* out_dir_used = nullptr);

struct CompareArgs {
  std::filesystem::path network_file;
  std::filesystem::path sensors_file;
  std::filesystem::path scenario_file;
  int scenario_index = 0;
  std::optional<std::filesystem::path> config_file;
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed_override;
};

struct SolverComparison {
  std::string solver;
  double normalized_error = 0.0;
  std::string identified_line;
  double x_hat = 0.0;
  double error_percent = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Runs one scenario through all three solvers and dumps the recovered
// vectors plus an error table.
std::vector<SolverComparison> cmd_compare_solvers(const CompareArgs& args);

// Parses a benchmark spec JSON document.
BenchmarkSpec load_benchmark_spec_file(const std::filesystem::path& path);

}  // namespace faultloc
