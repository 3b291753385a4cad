#include "relguide/relative_frame.hpp"

#include <cmath>

#include "relguide/angles.hpp"

namespace relguide {

RelativeState relative_state(const PlanarPose& leader, const PlanarPose& pursuer) {
  const double tx = std::sin(leader.psi);
  const double ty = std::cos(leader.psi);
  const double ex = pursuer.x - leader.x;
  const double ey = pursuer.y - leader.y;
  // Left normal of the track direction (tx, ty) is (-ty, tx).
  return RelativeState{ex * tx + ey * ty, -ex * ty + ey * tx, wrap_pi(pursuer.psi - leader.psi)};
}

PlanarPose pursuer_pose(const RelativeState& rel, const PlanarPose& leader) {
  const double tx = std::sin(leader.psi);
  const double ty = std::cos(leader.psi);
  return PlanarPose{leader.x + rel.dx * tx - rel.dy * ty, leader.y + rel.dx * ty + rel.dy * tx,
                    wrap_pi(leader.psi + rel.dpsi)};
}

PlanarPose canonical_pose(const RelativeState& rel) {
  return PlanarPose{rel.dx, rel.dy, wrap_pi(kTrackHeading + rel.dpsi)};
}

RelativeState from_canonical(const PlanarPose& p) {
  return RelativeState{p.x, p.y, wrap_pi(p.psi - kTrackHeading)};
}

RelativeState mirrored(const RelativeState& rel) {
  return RelativeState{rel.dx, -rel.dy, wrap_pi(-rel.dpsi)};
}

}  // namespace relguide
