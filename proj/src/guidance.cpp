#include <algorithm>
#include <cmath>

#include "relguide/angles.hpp"
#include "relguide/neural_guidance.hpp"

namespace relguide {

namespace {

// Segments shorter than this are not treated as a hold-heading action.
constexpr double kMinSegment = 100.0;

}  // namespace

std::string directive_code(const Directive& d) {
  switch (d.kind) {
    case DirectiveKind::kTurn:
      return d.eps > 0 ? "turn_left" : "turn_right";
    case DirectiveKind::kHoldHeading:
      return "hold";
    case DirectiveKind::kTrackHold:
      return "track";
  }
  return "hold";
}

std::vector<Vec2> plan_polyline(const ManeuverPlan& plan, const PlanarPose& start, double step) {
  std::vector<Vec2> pts{{start.x, start.y}};
  PlanarPose p = start;
  for (const auto& t : plan.triplets) {
    if (t.theta > 0.0) {
      const int n = std::max(1, static_cast<int>(std::ceil(t.theta / step)));
      for (int j = 1; j <= n; ++j) {
        const PlanarPose q = fly_arc(p, t.eps, t.theta * j / n, plan.r_min);
        pts.push_back({q.x, q.y});
      }
      p = fly_arc(p, t.eps, t.theta, plan.r_min);
    }
    if (t.len > 0.0) {
      p = fly_straight(p, t.len);
      pts.push_back({p.x, p.y});
    }
  }
  return pts;
}

GuidanceOutput guidance_query(const NetworkParams& p, const TrackReference& leader,
                              const PlanarPose& pursuer, double pursuer_speed,
                              const std::optional<TrackReference>& intent,
                              const ConvergenceSpec& spec, const GuidanceConfig& cfg) {
  const TrackReference& ref = intent ? *intent : leader;
  GuidanceOutput out;
  out.relative = relative_state(ref.leader, pursuer);
  out.in_region = in_trained_region(p, out.relative);
  out.outputs = forward_outputs(p, out.relative);
  out.plan = decode_plan(out.outputs, p.r_min);
  out.polyline = plan_polyline(out.plan, pursuer, cfg.polyline_step);

  const RelativeState& rel = out.relative;
  if (std::abs(rel.dy) < cfg.capture.cross_track && std::abs(rel.dpsi) < cfg.capture.heading &&
      -rel.dx >= spec.min_separation) {
    out.directive.kind = DirectiveKind::kTrackHold;
    out.directive.track = ref.leader;
    out.directive.target_heading = ref.leader.psi;
    return out;
  }

  out.directive.kind = DirectiveKind::kHoldHeading;
  out.directive.target_heading = pursuer.psi;
  // The eps channel is a regression onto +-1; where neighbouring optimal
  // plans turn opposite ways it drifts toward 0. The turn flown is scaled
  // by its magnitude so an undecided direction yields a small correction
  // rather than a full turn either way.
  for (std::size_t i = 0; i < out.plan.triplets.size(); ++i) {
    const PlanTriplet& t = out.plan.triplets[i];
    const double turn = t.theta * std::min(1.0, std::abs(out.outputs[3 * i]));
    if (turn >= cfg.min_turn) {
      out.directive.kind = DirectiveKind::kTurn;
      out.directive.eps = t.eps;
      out.directive.turn_angle = turn;
      out.directive.target_heading = wrap_pi(pursuer.psi - t.eps * turn);
      out.directive.turn_rate = -t.eps * pursuer_speed / p.r_min;
      break;
    }
    if (t.len >= kMinSegment) break;
  }
  return out;
}

}  // namespace relguide
