#pragma once

// Exhaustive forward enumeration of the gridded regular-trajectory family.
// Every triplet but the last is enumerated on the grid. The last triplet is
// closed analytically: its turn angle from the heading condition and its
// segment length from the along-track condition, both then snapped to the
// grid and verified. Branches whose accumulated cost exceeds the incumbent
// are cut.

#include <cstddef>
#include <optional>
#include <vector>

#include "relguide/exec_policy.hpp"
#include "relguide/rdp_generator.hpp"

namespace relguide {

inline constexpr int kOracleMaxOrder = 4;

struct OracleConfig {
  PlanGrid grid;
  ConvergenceSpec spec;
  double phi_max = 0.4363323129985824;
  RelativeState start;
  double position_tolerance = 1e-6;  // m
  double heading_tolerance = 1e-9;   // rad

  double r_min() const;
};

/// Oracle settings sharing the generator's plan family.
OracleConfig oracle_config_from(const RdpConfig& rdp);

struct OracleResult {
  bool feasible = false;
  ManeuverPlan plan;
  double cost = 0.0;  // path length, m
  std::size_t closures_tested = 0;
};

/// Throws std::invalid_argument when grid.max_order exceeds kOracleMaxOrder.
OracleResult best_plan(const OracleConfig& cfg);

/// Relative state after flying one triplet from `start` (forward counterpart
/// of rewind_triplet).
Rewind advance_triplet(const RelativeState& start, const PlanTriplet& tr, double r_min,
                       const SpeedPair& speeds);

struct CostRatioStats {
  std::vector<double> ratios;  // evaluated samples only, input order
  std::size_t evaluated = 0;
  std::size_t infeasible = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
};

/// Oracle cost for each state; nullopt when infeasible. cfg.start is ignored.
std::vector<std::optional<double>> oracle_costs(const std::vector<RelativeState>& states,
                                                const OracleConfig& cfg, Exec exec);

/// Ratio plan_cost / oracle_cost per state; 0/0 counts as 1.
CostRatioStats cost_ratios(const std::vector<double>& plan_costs,
                           const std::vector<std::optional<double>>& oracle);

CostRatioStats evaluate_against(const std::vector<TrainingSample>& samples,
                                const OracleConfig& cfg, Exec exec = Exec::kParallel);

}  // namespace relguide
