#include "relguide/pontryagin.hpp"

#include <cmath>
#include <stdexcept>

namespace relguide {

double hamiltonian(const PolarRelativeState& s, const AdjointState& a, double psi_l,
                   const SpeedPair& v, double r_p, double d_min) {
  if (!(s.d > 0.0)) throw std::domain_error("hamiltonian: separation must be positive");
  const double a_l = s.theta - psi_l;
  const double a_p = s.theta - s.psi_p;
  const double range_rate = v.v_l * std::cos(a_l) - v.v_p * std::cos(a_p);
  const double bearing_term = (-v.v_l * std::sin(a_l) + v.v_p * std::sin(a_p)) / s.d;
  return 1.0 + a.lam_d * range_rate + a.lam_theta * bearing_term + a.lam_psi * r_p +
         a.mu * (d_min - s.d);
}

AdjointRates adjoint_derivatives(const PolarRelativeState& s, const AdjointState& a, double psi_l,
                                 const SpeedPair& v) {
  if (!(s.d > 0.0)) throw std::domain_error("adjoint_derivatives: separation must be positive");
  const double a_l = s.theta - psi_l;
  const double a_p = s.theta - s.psi_p;
  const double sin_mix = -v.v_l * std::sin(a_l) + v.v_p * std::sin(a_p);
  const double cos_mix = -v.v_l * std::cos(a_l) + v.v_p * std::cos(a_p);
  AdjointRates out;
  out.lam_d_dot = a.lam_theta / (s.d * s.d) * sin_mix + a.mu;
  out.lam_theta_dot = -a.lam_theta / s.d * cos_mix - a.lam_d * sin_mix;
  out.lam_psi_dot =
      a.lam_theta / s.d * (v.v_p * std::cos(a_p)) + a.lam_d * v.v_p * std::sin(a_p);
  return out;
}

double switch_bank(double lam_psi, const BankEnvelope& env, double tol) {
  if (lam_psi > tol) return env.phi_min;
  if (lam_psi < -tol) return env.phi_max;
  return 0.0;
}

bool complementarity_holds(double mu, double d, double d_min) {
  if (mu < 0.0) return false;
  return d <= d_min || mu == 0.0;
}

}  // namespace relguide
