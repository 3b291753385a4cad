#include "relguide/plan_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "relguide/angles.hpp"

namespace relguide {

bool triplet_less(const PlanTriplet& a, const PlanTriplet& b) {
  return std::tie(a.eps, a.theta, a.len) < std::tie(b.eps, b.theta, b.len);
}

bool plan_less(const ManeuverPlan& a, const ManeuverPlan& b) {
  return std::lexicographical_compare(a.triplets.begin(), a.triplets.end(), b.triplets.begin(),
                                      b.triplets.end(), triplet_less);
}

void validate_plan(const ManeuverPlan& plan) {
  if (!(plan.r_min > 0.0)) throw std::invalid_argument("plan: r_min must be positive");
  for (const auto& t : plan.triplets) {
    if (t.eps != 1 && t.eps != -1) throw std::invalid_argument("plan: eps must be +1 or -1");
    if (!(t.theta >= 0.0)) throw std::invalid_argument("plan: theta must be non-negative");
    if (!(t.len >= 0.0)) throw std::invalid_argument("plan: len must be non-negative");
  }
}

void validate_spec(const ConvergenceSpec& spec) {
  if (!(spec.min_separation > 0.0)) throw std::invalid_argument("spec: d_min must be positive");
  if (!(spec.capture_distance >= spec.min_separation)) {
    throw std::invalid_argument("spec: capture distance must be >= d_min");
  }
  if (!(spec.speeds.v_l > 0.0 && spec.speeds.v_p > 0.0)) {
    throw std::invalid_argument("spec: speeds must be positive");
  }
}

PlanarPose fly_arc(const PlanarPose& p, int eps, double theta, double r_min) {
  if (theta == 0.0) return p;
  // Unit speed: "time" is path length. A left turn (eps = +1) decreases the
  // clockwise heading.
  return propagate_pose(p, 1.0, -static_cast<double>(eps) / r_min, r_min * theta);
}

PlanarPose fly_straight(const PlanarPose& p, double len) {
  return PlanarPose{p.x + len * std::sin(p.psi), p.y + len * std::cos(p.psi), p.psi};
}

Rollout rollout_plan(const ManeuverPlan& plan, const PlanarPose& start) {
  Rollout out;
  out.poses.reserve(1 + 2 * plan.triplets.size());
  out.poses.push_back(start);
  PlanarPose p = start;
  for (const auto& t : plan.triplets) {
    p = fly_arc(p, t.eps, t.theta, plan.r_min);
    out.poses.push_back(p);
    p = fly_straight(p, t.len);
    out.poses.push_back(p);
    out.length += t.len + plan.r_min * t.theta;
  }
  return out;
}

double plan_cost(const ManeuverPlan& plan) {
  double length = 0.0;
  for (const auto& t : plan.triplets) length += t.len + plan.r_min * t.theta;
  return length;
}

double ConvergenceResidual::position_norm() const { return std::hypot(x, y); }

ConvergenceResidual convergence_residual(const ManeuverPlan& plan, const PlanarPose& start,
                                         const ConvergenceSpec& spec, double leader_start_x) {
  const Rollout r = rollout_plan(plan, start);
  const PlanarPose& end = r.poses.back();
  const double alpha = spec.speeds.ratio();
  ConvergenceResidual res;
  res.x = end.x - (leader_start_x + alpha * r.length - spec.capture_distance);
  res.y = end.y;
  res.psi = wrap_pi(end.psi - spec.leader_heading);
  return res;
}

ClosestApproach closest_approach(const SegmentMotion& seg) {
  const double rx = seg.pursuer_start.x - seg.leader_start.x;
  const double ry = seg.pursuer_start.y - seg.leader_start.y;
  const double vx = seg.v_p * std::sin(seg.pursuer_start.psi) - seg.leader_velocity.x;
  const double vy = seg.v_p * std::cos(seg.pursuer_start.psi) - seg.leader_velocity.y;
  const double vv = vx * vx + vy * vy;
  if (vv < 1e-12) return ClosestApproach{0.0, std::hypot(rx, ry)};
  const double t = -(rx * vx + ry * vy) / vv;
  return ClosestApproach{t, std::hypot(rx + t * vx, ry + t * vy)};
}

namespace {

bool record(SeparationReport& report, std::size_t index, SeparationCheck check, double time,
            double distance, double d_min) {
  report.min_distance = std::min(report.min_distance, distance);
  if (distance >= d_min) return true;
  if (report.ok) {
    report.ok = false;
    report.first_violation = SeparationViolation{index, check, time, distance};
  }
  return false;
}

}  // namespace

bool check_triplet_separation(const PlanTriplet& tr, std::size_t index, const PlanarPose& start,
                              double t0, double r_min, const ConvergenceSpec& spec,
                              double leader_start_x, SeparationReport& report) {
  const double v_p = spec.speeds.v_p;
  const double v_l = spec.speeds.v_l;
  const double d_min = spec.min_separation;

  PlanarPose seg_start = start;
  double t_seg = t0;
  if (tr.theta > 0.0) {
    const int steps = std::max(1, static_cast<int>(std::ceil(tr.theta / kArcSampleStep - 1e-9)));
    const double dtheta = tr.theta / steps;
    // Between consecutive samples the relative motion is replaced by its chord;
    // the sagitta at 1 deg is under 4e-5 R.
    double px = start.x - (leader_start_x + v_l * t0);
    double py = start.y;
    for (int j = 1; j <= steps; ++j) {
      const double a = dtheta * j;
      const PlanarPose q = fly_arc(start, tr.eps, a, r_min);
      const double t = t0 + r_min * a / v_p;
      const double qx = q.x - (leader_start_x + v_l * t);
      const double qy = q.y;
      const double ex = qx - px;
      const double ey = qy - py;
      const double ee = ex * ex + ey * ey;
      double s = ee > 0.0 ? -(px * ex + py * ey) / ee : 1.0;
      s = std::clamp(s, 0.0, 1.0);
      const double d = std::hypot(px + s * ex, py + s * ey);
      const double ts = t - (1.0 - s) * r_min * dtheta / v_p;
      if (!record(report, index, SeparationCheck::kArcSample, ts, d, d_min)) return false;
      px = qx;
      py = qy;
    }
    seg_start = fly_arc(start, tr.eps, tr.theta, r_min);
    t_seg = t0 + r_min * tr.theta / v_p;
  }
  if (tr.len > 0.0) {
    SegmentMotion seg;
    seg.pursuer_start = seg_start;
    seg.v_p = v_p;
    seg.leader_start = Vec2{leader_start_x + v_l * t_seg, 0.0};
    seg.leader_velocity = Vec2{v_l, 0.0};
    seg.duration = tr.len / v_p;
    const ClosestApproach ca = closest_approach(seg);
    const double rx = seg.pursuer_start.x - seg.leader_start.x;
    const double ry = seg.pursuer_start.y;
    const double vx = v_p * std::sin(seg_start.psi) - v_l;
    const double vy = v_p * std::cos(seg_start.psi);
    if (ca.t_star <= 0.0) {
      if (!record(report, index, SeparationCheck::kSegmentStart, t_seg, std::hypot(rx, ry), d_min))
        return false;
    } else if (ca.t_star >= seg.duration) {
      const double d = std::hypot(rx + seg.duration * vx, ry + seg.duration * vy);
      if (!record(report, index, SeparationCheck::kSegmentEnd, t_seg + seg.duration, d, d_min))
        return false;
    } else {
      if (!record(report, index, SeparationCheck::kSegmentInterior, t_seg + ca.t_star, ca.d_star,
                  d_min))
        return false;
    }
  }
  return true;
}

SeparationReport separation_ok(const ManeuverPlan& plan, const PlanarPose& start,
                               const ConvergenceSpec& spec, double leader_start_x) {
  SeparationReport report;
  report.min_distance = std::hypot(start.x - leader_start_x, start.y);
  if (report.min_distance < spec.min_separation) {
    report.ok = false;
    report.first_violation =
        SeparationViolation{0, SeparationCheck::kStart, 0.0, report.min_distance};
    return report;
  }
  PlanarPose p = start;
  double t = 0.0;
  for (std::size_t i = 0; i < plan.triplets.size(); ++i) {
    const auto& tr = plan.triplets[i];
    if (!check_triplet_separation(tr, i, p, t, plan.r_min, spec, leader_start_x, report)) break;
    p = fly_straight(fly_arc(p, tr.eps, tr.theta, plan.r_min), tr.len);
    t += (tr.len + plan.r_min * tr.theta) / spec.speeds.v_p;
  }
  return report;
}

}  // namespace relguide
