#ifndef NLCH_STATIONARY_HPP
#define NLCH_STATIONARY_HPP

#include "nlch/kernel.hpp"
#include "nlch/potential.hpp"

namespace nlch {

struct StationaryOptions {
  int max_outer = 500;
  /// Fixed-point damping; halved whenever the residual would grow. The
  /// undamped degenerate map can 2-cycle for wide kernels.
  double damping = 0.5;
};

struct StationaryResult {
  Field phi_star;
  double mu_star = 0.0; // the constant chemical potential
  /// solve_stationary: sup |a phi - J*phi + F'(phi) - mu*|.
  /// degenerate_equilibrium: sup |phi - 1/(exp(w - mu*) + 1)|.
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// sup-norm residual of the constant-chemical-potential stationary equation.
double stationary_residual(const Kernel& k, const Potential& p, const Field& phi,
                           double mu);

/// Mass-constrained solve of  a phi - J*phi + F'(phi) = mu*, <phi> = mass.
///
/// Outer damped fixed point: freeze J*phi and the expansive slope, solve the
/// cellwise monotone equation a(x)phi + Fc'(phi) = mu + (J*phi_prev)(x)
/// - Fe'(phi_prev)(x) by bisection-safeguarded Newton, and adjust the scalar
/// mu each sweep so the mean hits the mass (the map mu -> mean is strictly
/// increasing). Returns converged = false with the best iterate if the
/// residual never reaches tol; many stationary profiles coexist, and the
/// solver returns the one in the basin of `init`.
StationaryResult solve_stationary(const Kernel& k, const Potential& p, double mass,
                                  const Field& init, double tol,
                                  const StationaryOptions& opt = {});

/// Damped fixed point of the degenerate-mobility closed form
///   phi = 1/(exp(w - mu*) + 1),  w = a - 2 J*phi,  <phi> = mass in (0,1).
StationaryResult degenerate_equilibrium(const Kernel& k, double mass,
                                        const Field& init, double tol,
                                        const StationaryOptions& opt = {});

} // namespace nlch

#endif
