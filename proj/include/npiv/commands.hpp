#pragma once

#include "npiv/error.hpp"
#include "npiv/execution.hpp"
#include "npiv/synth.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace npiv {

enum class Command { estimate, simulate, oracle, bias, reduced_form };

struct RunConfig {
  Command command = Command::estimate;

  // Data source: exactly one of input_path and dgp.
  std::string input_path;
  std::optional<ContinuousDGPParams> dgp;
  long n = 2000;
  std::uint64_t seed = 1;

  std::vector<double> b_sweep{0.005, 0.02, 0.05};
  std::vector<double> c_sweep{1.0, 2.0, 5.0};
  std::string shape_path;  // overrides the c sweep when set

  int k_dim = 10;
  int l_dim = 6;
  int spline_order = 4;
  int x_grid = 100;
  int z_grid = 100;
  double trim = 0.005;

  // oracle / bias / discrete simulate
  std::string model_path;
  std::vector<double> w;
  std::vector<double> h0_values;
  std::vector<double> u0_values;
  double h_lo = 0.0;
  double h_hi = 1.0;
  std::optional<double> second_diff_bound;
  double noise_sd = 0.05;

  std::string output_path;
  Execution exec = Execution::parallel;

  /// Throws ConfigError when the configuration is inconsistent.
  void validate() const;
};

/// CLI exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitData = 3,
  kExitInfeasible = 4,
  kExitNumerical = 5,
};

int exit_code_for(ErrorKind kind);

struct CommandResult {
  nlohmann::json document;  // null for commands that emit CSV
  std::string csv;          // simulate output
  int exit_code = kExitOk;
};

CommandResult run_estimate(const RunConfig& config);
CommandResult run_reduced_form(const RunConfig& config);
CommandResult run_simulate(const RunConfig& config);
CommandResult run_oracle(const RunConfig& config);
CommandResult run_bias(const RunConfig& config);
CommandResult run_command(const RunConfig& config);

/// Serialization used for every JSON document the CLI writes.
std::string dump_document(const nlohmann::json& doc);

}  // namespace npiv
