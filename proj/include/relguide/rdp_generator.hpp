#pragma once

// Reverse dynamic-programming generator of minimum-time convergence samples.
//
// The tree is rooted at the converged state (-D, 0, 0) in the leader's
// concurrent track frame. Each expansion prepends one (turn, segment) pair to
// a node's plan by rewinding the pursuer along the pair and the leader along
// its track by the pair's flight time. Per state cell only the earliest
// converging sample is kept and expanded further.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "relguide/exec_policy.hpp"
#include "relguide/plan_geometry.hpp"
#include "relguide/relative_frame.hpp"

namespace relguide {

/// Discretized plan family: theta_k = k * delta_theta for k < n_theta and
/// l_h = h * delta_len for h < n_len. Plans carry at most max_order - 1
/// triplets.
struct PlanGrid {
  double delta_theta = 0.17453292519943295;  // 10 deg
  int n_theta = 36;
  double delta_len = 2500.0;
  int n_len = 41;
  int max_order = 4;

  double theta(int k) const { return k * delta_theta; }
  double len(int h) const { return h * delta_len; }
};

void validate_grid(const PlanGrid& grid);

struct CellSize {
  double dx = 5000.0;
  double dy = 5000.0;
  double dpsi = 0.08726646259971647;  // 5 deg
};

struct RegionBox {
  double along_min = -150000.0;
  double along_max = 150000.0;
  double cross_max = 150000.0;
  bool enabled = true;

  bool contains(const RelativeState& s) const;
};

struct RdpConfig {
  PlanGrid grid;
  ConvergenceSpec spec;
  double phi_max = 0.4363323129985824;  // 25 deg
  CellSize cell;
  RegionBox region;
  std::uint64_t seed = 1;
  Exec exec = Exec::kParallel;

  double r_min() const;
};

struct TrainingSample {
  RelativeState state;
  ManeuverPlan plan;
  double time_to_converge = 0.0;

  bool operator==(const TrainingSample&) const = default;
};

struct RdpStats {
  std::vector<std::size_t> candidates_per_level;
  std::vector<std::size_t> winners_per_level;
  std::size_t pruned_region = 0;
  std::size_t pruned_separation = 0;
  std::string diagnostic;
};

struct RdpResult {
  std::vector<TrainingSample> samples;  // root first, then in creation order
  RdpStats stats;
};

using CellIndex = std::array<long, 3>;
CellIndex cell_of(const RelativeState& s, const CellSize& cell);

/// One backward expansion: the state that reaches `parent` by flying `tr`.
/// Returns its relative state and the pair's flight time.
struct Rewind {
  RelativeState state;
  double duration = 0.0;
};
Rewind rewind_triplet(const RelativeState& parent, const PlanTriplet& tr, double r_min,
                      const SpeedPair& speeds);

/// Separation check of one (turn, segment) pair flown from `start`, leader at
/// the origin at that instant. Includes the start point.
bool pair_separation_ok(const RelativeState& start, const PlanTriplet& tr, double r_min,
                        const ConvergenceSpec& spec);

RdpResult generate_tree(const RdpConfig& cfg);

struct CoverageReport {
  CellSize cell;
  std::map<CellIndex, std::size_t> counts;
  std::size_t total = 0;
  RelativeState min_extent;
  RelativeState max_extent;

  /// Largest distance behind the leader or abeam the track reached by a sample.
  double reach() const;
};

CoverageReport coverage_report(const std::vector<TrainingSample>& samples, const CellSize& cell);

/// CSV with header dx_m,dy_m,dpsi_rad,time_s,plan.
void export_dataset(const std::vector<TrainingSample>& samples, const std::string& path);
/// r_min is not stored in the file and must come from the generating config.
std::vector<TrainingSample> import_dataset(const std::string& path, double r_min);

std::string format_plan_field(const ManeuverPlan& plan);
ManeuverPlan parse_plan_field(const std::string& field, double r_min);

}  // namespace relguide
