#pragma once

// relguide command line: gen, train, eval, sim, serve. Every command writes a
// manifest.json next to its outputs; passing that manifest back through
// --config reruns the command with the same resolved settings and inputs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relguide/neural_guidance.hpp"
#include "relguide/oracle_solver.hpp"
#include "relguide/rdp_generator.hpp"

namespace relguide {

inline constexpr const char* kToolVersion = "0.4.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitUsage = 2,
  kExitMissingFile = 3,
  kExitSchema = 4,
  kExitDivergence = 5,
  kExitInfeasible = 6,
};

struct EvalSettings {
  double position_tolerance = 1e-6;
  double heading_tolerance = 1e-9;
  double ratio_bound = 1.10;
  std::size_t max_states = 0;  // 0 = all; otherwise an evenly strided subset
};

struct RunConfig {
  RdpConfig rdp;
  TrainConfig train;
  EvalSettings eval;
  std::uint64_t seed = 1;
  bool parallel = true;
};

/// Parses a config document. Every section and key is optional; unknown
/// keys are schema errors so typos do not pass silently.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);
/// Accepts either a config file or a manifest written by a previous run.
RunConfig load_run_config(const std::string& path);

/// Entry point; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relguide
