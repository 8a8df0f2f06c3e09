#ifndef NLCH_ANALYSIS_HPP
#define NLCH_ANALYSIS_HPP

#include <array>

#include "nlch/kernel.hpp"
#include "nlch/potential.hpp"
#include "nlch/trajectory.hpp"

namespace nlch {

/// Free energy
///   E(phi) = 1/4 iint J(x-y)(phi(x)-phi(y))^2 + int F(phi)
/// computed through the convolution identity
///   1/4 iint J (phi(x)-phi(y))^2 = 1/2 ( <a phi, phi> - <J*phi, phi> ),
/// which is exact at the discrete level and avoids the O(N^2) double sum.
double energy(const Field& phi, const Kernel& k, const Potential& p);

struct EnergyLedger {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> cumulative_dissipation;
  std::vector<double> identity_residual; // |E(t) + cumdiss - E(0)|
  double max_residual() const;
};

/// Per-step energy balance of a variant A/B trajectory. The discrete
/// dissipation uses right-endpoint rectangles, matching the backward-Euler
/// defect, so the residual is O(dt) and halves under dt halving.
EnergyLedger energy_identity_residual(const Trajectory& traj);

struct DissipativeFit {
  double k = 0.0;
  double C = 0.0;
};

/// Fits the absorbing-set bound E(t) <= E(0) e^{-kt} + C over the ledger:
/// C(k) is the smallest feasible constant for a given rate, and the fit
/// returns the largest k whose C(k) stays at the trailing energy plateau
/// (k = 0 always feasible; the fit seeks a nontrivial rate).
DissipativeFit dissipative_fit(const Trajectory& traj, double mass_bound);

/// sup over snapshots with t >= 2*tau of max|phi|.
double linf_track(const Trajectory& traj, double tau);

struct SeparationReport {
  double t_start = 0.0, t_end = 0.0;
  /// min over window snapshots of the pointwise distance of phi to the
  /// admissible endpoints; > 0 means separated.
  double delta = 0.0;
  /// Quarter-window deltas are non-decreasing (transient has settled).
  bool monotone_tail = false;
  std::array<double, 4> quarter_deltas{};
};

SeparationReport separation(const Trajectory& traj, double t_start, double t_end);

struct ContractionReport {
  std::vector<double> times;
  /// d(t) = sqrt( ||dphi||_{V'}^2 + alpha ||dphi||_H^2 ) per snapshot.
  std::vector<double> distance;
  /// Least kappa with d(t) <= d(0) exp(kappa t / 2) at every sample.
  double kappa = 0.0;
};

/// Continuous-dependence distance between two equal-mean trajectories that
/// share grid, kernel, potential, config and snapshot times.
ContractionReport vprime_contraction(const Trajectory& a, const Trajectory& b);

struct ConvergenceReport {
  std::vector<double> times, dist_h, dist_sup;
  bool fit_done = false;
  double rho = 0.0, r2_power = 0.0; // ||phi(t)-phi*||_H ~ (1+t)^(-1/rho)
  double exp_rate = 0.0, r2_exp = 0.0;
  double terminal_h = 0.0, terminal_sup = 0.0;
};

/// Distance of an equilibrated trajectory to a candidate equilibrium, with a
/// trailing-window algebraic-rate fit and an exponential fit alongside.
ConvergenceReport convergence_report(const Trajectory& traj, const Field& phi_star);

} // namespace nlch

#endif
