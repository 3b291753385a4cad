#pragma once

#include "relguide/kinematics.hpp"

namespace relguide {

/// Pursuer pose in the leader's track frame at the same instant: dx along the
/// track (negative = behind), dy across it (positive = left of track), dpsi the
/// pursuer heading relative to the track heading.
struct RelativeState {
  double dx = 0.0;
  double dy = 0.0;
  double dpsi = 0.0;

  bool operator==(const RelativeState&) const = default;
};

/// Track heading of the canonical frame: leader at the origin flying along +x.
inline constexpr double kTrackHeading = 1.5707963267948966;

RelativeState relative_state(const PlanarPose& leader, const PlanarPose& pursuer);
PlanarPose pursuer_pose(const RelativeState& rel, const PlanarPose& leader);

/// Pursuer pose with the leader at the origin heading along +x.
PlanarPose canonical_pose(const RelativeState& rel);
RelativeState from_canonical(const PlanarPose& p);

/// Reflection across the leader track.
RelativeState mirrored(const RelativeState& rel);

}  // namespace relguide
