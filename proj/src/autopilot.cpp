#include <algorithm>
#include <cmath>

#include "relguide/angles.hpp"
#include "relguide/flight_sim.hpp"

namespace relguide {

AutopilotOutput autopilot_step(double heading_error, const AircraftState& state,
                               const AutopilotGains& gains, const BankEnvelope& env, double dt,
                               AutopilotMemory& memory) {
  const double heading_rate = env.g / state.speed * std::tan(state.bank);
  const double unclamped =
      gains.kp * heading_error + gains.ki * memory.integral - gains.kd * heading_rate;
  const double cmd = std::clamp(unclamped, env.phi_min, env.phi_max);
  if (cmd == unclamped && gains.ki != 0.0) {
    memory.integral = std::clamp(memory.integral + heading_error * dt, -gains.integral_limit,
                                 gains.integral_limit);
  }
  const double decay = std::exp(-dt / gains.tau_bank);
  AutopilotOutput out;
  out.bank_command = cmd;
  out.bank = cmd + (state.bank - cmd) * decay;
  out.bank_rate = (out.bank - state.bank) / dt;
  return out;
}

double heading_error(const Directive& d, const PlanarPose& pose, const TrackHoldLaw& law) {
  switch (d.kind) {
    case DirectiveKind::kTurn: {
      double e = wrap_pi(d.target_heading - pose.psi);
      // Keep turning the commanded way through the half-circle boundary.
      if (d.eps < 0 && e < -kPi / 2.0) e += kTwoPi;
      if (d.eps > 0 && e > kPi / 2.0) e -= kTwoPi;
      return e;
    }
    case DirectiveKind::kHoldHeading:
      return wrap_pi(d.target_heading - pose.psi);
    case DirectiveKind::kTrackHold: {
      const RelativeState rel = relative_state(d.track, pose);
      const double intercept =
          std::clamp(std::atan(rel.dy / law.lookahead), -law.max_intercept, law.max_intercept);
      return wrap_pi(d.track.psi + intercept - pose.psi);
    }
  }
  return 0.0;
}

}  // namespace relguide
