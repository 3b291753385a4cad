#pragma once

// Hamiltonian, costate dynamics and switching law of the minimum-time
// convergence problem. Evaluation only: the boundary-value problem that fixes
// the terminal constants is not solved here.

#include "relguide/kinematics.hpp"

namespace relguide {

struct AdjointState {
  double lam_d = 0.0;
  double lam_theta = 0.0;
  double lam_psi = 0.0;
  double mu = 0.0;  // influence variable of the d >= d_min constraint
  double nu_d = 0.0;
  double nu_theta = 0.0;
  double nu_psi = 0.0;
};

struct AdjointRates {
  double lam_d_dot = 0.0;
  double lam_theta_dot = 0.0;
  double lam_psi_dot = 0.0;
};

/// Throws std::domain_error when s.d <= 0.
double hamiltonian(const PolarRelativeState& s, const AdjointState& a, double psi_l,
                   const SpeedPair& v, double r_p, double d_min);

/// Euler-Lagrange costate rates. Throws std::domain_error when s.d <= 0.
AdjointRates adjoint_derivatives(const PolarRelativeState& s, const AdjointState& a, double psi_l,
                                 const SpeedPair& v);

inline constexpr double kSingularTolerance = 1e-9;

/// Bank minimizing the Hamiltonian: phi_min for lam_psi > tol, phi_max for
/// lam_psi < -tol, zero (singular arc, straight flight) otherwise.
double switch_bank(double lam_psi, const BankEnvelope& env, double tol = kSingularTolerance);

/// True when (mu, d) satisfy the complementarity condition of the separation
/// constraint: mu >= 0, and mu == 0 whenever d > d_min.
bool complementarity_holds(double mu, double d, double d_min);

}  // namespace relguide
