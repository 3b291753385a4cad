#include "relguide/kinematics.hpp"

#include <cmath>
#include <stdexcept>

#include "relguide/angles.hpp"

namespace relguide {

BankEnvelope BankEnvelope::symmetric(double phi_max_rad) {
  if (!(phi_max_rad > 0.0 && phi_max_rad < kPi / 2.0)) {
    throw std::invalid_argument("bank envelope: phi_max must lie in (0, pi/2)");
  }
  return BankEnvelope{-phi_max_rad, phi_max_rad, kGravity};
}

RelativeRates relative_derivatives(const PolarRelativeState& s, const SpeedPair& v, double psi_l,
                                   double r_p) {
  if (!(s.d > 0.0)) throw std::domain_error("relative_derivatives: separation must be positive");
  const double a_l = s.theta - psi_l;
  const double a_p = s.theta - s.psi_p;
  RelativeRates out;
  out.d_dot = v.v_l * std::cos(a_l) - v.v_p * std::cos(a_p);
  out.theta_dot = (-v.v_l * std::sin(a_l) + v.v_p * std::sin(a_p)) / s.d;
  out.psi_dot = r_p;
  return out;
}

double bank_to_turn_rate(double phi, double v_p, double g) {
  if (!(std::abs(phi) < kPi / 2.0)) throw std::domain_error("bank_to_turn_rate: |phi| >= pi/2");
  if (!(v_p > 0.0)) throw std::domain_error("bank_to_turn_rate: speed must be positive");
  return g / v_p * std::tan(phi);
}

double min_turn_radius(double v_p, double phi_max, double g) {
  if (!(v_p > 0.0)) throw std::domain_error("min_turn_radius: speed must be positive");
  if (!(phi_max > 0.0 && phi_max < kPi / 2.0)) {
    throw std::domain_error("min_turn_radius: phi_max must lie in (0, pi/2)");
  }
  return v_p * v_p / (g * std::tan(phi_max));
}

PlanarPose propagate_pose(const PlanarPose& p, double v, double r, double dt) {
  PlanarPose out;
  if (std::abs(r) < kStraightTurnRate) {
    out.x = p.x + v * dt * std::sin(p.psi);
    out.y = p.y + v * dt * std::cos(p.psi);
    out.psi = wrap_pi(p.psi);
    return out;
  }
  const double psi1 = p.psi + r * dt;
  const double radius = v / r;
  out.x = p.x + radius * (std::cos(p.psi) - std::cos(psi1));
  out.y = p.y + radius * (std::sin(psi1) - std::sin(p.psi));
  out.psi = wrap_pi(psi1);
  return out;
}

PlanarPose step_pose(const PlanarPose& p, double v, double r, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_pose: dt must be positive");
  return propagate_pose(p, v, r, dt);
}

PolarRelativeState polar_from_poses(const PlanarPose& leader, const PlanarPose& pursuer) {
  const double ex = leader.x - pursuer.x;
  const double ey = leader.y - pursuer.y;
  return PolarRelativeState{std::hypot(ex, ey), wrap_pi(std::atan2(ex, ey)), wrap_pi(pursuer.psi)};
}

}  // namespace relguide
