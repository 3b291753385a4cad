#pragma once

// Planar point-mass kinematics shared by the planner and the simulator.
//
// Heading convention: clockwise from north (+y), so an aircraft with heading
// psi and speed V moves with velocity (V sin psi, V cos psi). Heading 90 deg
// is due east. A positive bank angle gives a positive turn rate, i.e. a right
// turn. All quantities are SI.

namespace relguide {

inline constexpr double kGravity = 9.81;
/// Turn rates below this magnitude are propagated as straight flight.
inline constexpr double kStraightTurnRate = 1e-9;

/// Pursuer state relative to the leader in polar form. theta is the bearing of
/// the pursuer-to-leader sight line in the earth frame.
struct PolarRelativeState {
  double d = 0.0;
  double theta = 0.0;
  double psi_p = 0.0;
};

struct SpeedPair {
  double v_l = 0.0;
  double v_p = 0.0;

  double ratio() const { return v_l / v_p; }
};

struct BankEnvelope {
  double phi_min = -0.4363323129985824;  // -25 deg
  double phi_max = 0.4363323129985824;
  double g = kGravity;

  static BankEnvelope symmetric(double phi_max_rad);
};

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;

  bool operator==(const PlanarPose&) const = default;
};

struct RelativeRates {
  double d_dot = 0.0;
  double theta_dot = 0.0;
  double psi_dot = 0.0;
};

/// Right-hand sides of the relative polar equations of motion.
/// Throws std::domain_error when s.d <= 0.
RelativeRates relative_derivatives(const PolarRelativeState& s, const SpeedPair& v, double psi_l,
                                   double r_p);

/// Coordinated-turn rate (g / v) tan(phi). Throws std::domain_error when
/// |phi| >= pi/2 or v_p <= 0.
double bank_to_turn_rate(double phi, double v_p, double g = kGravity);

/// Turn radius at maximum bank, v^2 / (g tan(phi_max)).
double min_turn_radius(double v_p, double phi_max, double g = kGravity);

/// Advances a pose by dt seconds at constant speed and turn rate using exact
/// arc geometry. Throws std::invalid_argument when dt <= 0.
PlanarPose step_pose(const PlanarPose& p, double v, double r, double dt);

/// Same as step_pose but accepts any sign of dt, so it also rewinds.
PlanarPose propagate_pose(const PlanarPose& p, double v, double r, double dt);

/// Polar relative state of pursuer with respect to leader.
PolarRelativeState polar_from_poses(const PlanarPose& leader, const PlanarPose& pursuer);

}  // namespace relguide
