#pragma once

// Regular trajectories: maximum-bank arcs joined by straight segments.
//
// Geometry is expressed in the convergence frame: the leader flies along +x
// (track heading pi/2) on the line y = 0 from (leader_start_x, 0). Triplets
// are stored in execution order, first flown first.

#include <cstddef>
#include <optional>
#include <vector>

#include "relguide/kinematics.hpp"

namespace relguide {

struct PlanTriplet {
  int eps = 1;         // +1 left turn, -1 right turn
  double theta = 0.0;  // turn angle magnitude (rad)
  double len = 0.0;    // straight segment length (m)

  bool operator==(const PlanTriplet&) const = default;
};

/// Lexicographic order on (eps, theta, len); used for deterministic tie-breaks.
bool triplet_less(const PlanTriplet& a, const PlanTriplet& b);

struct ManeuverPlan {
  std::vector<PlanTriplet> triplets;
  double r_min = 1.0;

  bool operator==(const ManeuverPlan&) const = default;
};

bool plan_less(const ManeuverPlan& a, const ManeuverPlan& b);

/// Throws std::invalid_argument if a triplet violates eps in {-1,+1},
/// theta >= 0, len >= 0, or r_min <= 0.
void validate_plan(const ManeuverPlan& plan);

struct ConvergenceSpec {
  double capture_distance = 15000.0;  // D
  double min_separation = 9260.0;     // d_min
  double leader_heading = 1.5707963267948966;
  SpeedPair speeds{200.0, 240.0};
};

void validate_spec(const ConvergenceSpec& spec);

struct Rollout {
  std::vector<PlanarPose> poses;  // start, then (arc end, segment end) per triplet
  double length = 0.0;
};

/// Pose after flying an arc of angle theta at radius r_min in direction eps.
PlanarPose fly_arc(const PlanarPose& p, int eps, double theta, double r_min);
/// Pose after a straight segment of length len (negative rewinds).
PlanarPose fly_straight(const PlanarPose& p, double len);

Rollout rollout_plan(const ManeuverPlan& plan, const PlanarPose& start);

/// Path length sum(len + r_min * theta).
double plan_cost(const ManeuverPlan& plan);
inline double plan_time(const ManeuverPlan& plan, double v_p) { return plan_cost(plan) / v_p; }

struct ConvergenceResidual {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  double position_norm() const;
};

ConvergenceResidual convergence_residual(const ManeuverPlan& plan, const PlanarPose& start,
                                         const ConvergenceSpec& spec, double leader_start_x);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct SegmentMotion {
  PlanarPose pursuer_start;
  double v_p = 0.0;
  Vec2 leader_start;
  Vec2 leader_velocity;
  double duration = 0.0;
};

struct ClosestApproach {
  double t_star = 0.0;  // unclamped
  double d_star = 0.0;
};

/// Point of closest approach of two constant-velocity points.
ClosestApproach closest_approach(const SegmentMotion& seg);

enum class SeparationCheck { kStart, kArcSample, kSegmentStart, kSegmentEnd, kSegmentInterior };

struct SeparationViolation {
  std::size_t triplet = 0;
  SeparationCheck check = SeparationCheck::kStart;
  double time = 0.0;
  double distance = 0.0;
};

struct SeparationReport {
  bool ok = true;
  double min_distance = 0.0;
  std::optional<SeparationViolation> first_violation;
};

/// Arc separation is sampled at this turn-angle spacing.
inline constexpr double kArcSampleStep = 0.017453292519943295;  // 1 deg

/// Checks d >= d_min over one (arc, segment) pair that starts at time t0 with
/// the pursuer at `start`. Updates only report fields; returns false on the
/// first violation. Allocation free.
bool check_triplet_separation(const PlanTriplet& tr, std::size_t index, const PlanarPose& start,
                              double t0, double r_min, const ConvergenceSpec& spec,
                              double leader_start_x, SeparationReport& report);

SeparationReport separation_ok(const ManeuverPlan& plan, const PlanarPose& start,
                               const ConvergenceSpec& spec, double leader_start_x);

}  // namespace relguide
