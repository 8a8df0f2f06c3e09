#ifndef NLCH_DYNAMICS_HPP
#define NLCH_DYNAMICS_HPP

#include <memory>

#include "nlch/kernel.hpp"
#include "nlch/potential.hpp"
#include "nlch/spectral.hpp"
#include "nlch/trajectory.hpp"

namespace nlch {

/// Time integrator for the four model variants with exact discrete mass
/// conservation and, for A/B, unconditional discrete energy decrease.
///
/// Variants A/B advance  (phi^{n+1} - phi^n)/dt = Lap mu^{n+1}  with the
/// convex-splitting chemical potential
///   mu^{n+1} = a phi^{n+1} + Fc'(phi^{n+1}) + (alpha/dt)(phi^{n+1}-phi^n)
///            + Fe'(phi^n) - J*phi^n,
/// solved by Newton in the V'-preconditioned form; the line search keeps
/// iterates at distance >= interior_margin from singular endpoints, so the
/// logarithmic barrier stays finite without any clipping.
///
/// Variant C integrates the flux form
///   d_t phi = div( b0 grad phi + b0 phi(1-phi) grad w ),  w = a - 2 J*phi,
/// diffusion implicit, nonlocal advection explicit. Variant D treats
/// Lap phi implicitly and Lap tanh(beta J*phi^n) explicitly.
///
/// A step that fails (Newton stall, admissibility exit, NaN) is retried with
/// dt/2, at most max_halvings times, then raises StepFailureError.
/// One Simulator is confined to a single thread at a time.
class Simulator {
public:
  Simulator(const ModelConfig& cfg, const Kernel& kernel, const Potential& pot,
            Field phi0);

  const ModelConfig& config() const { return cfg_; }
  const Kernel& kernel() const { return kernel_; }
  const Potential& potential() const { return pot_; }
  const Field& phi() const { return phi_; }
  /// Chemical potential of the last completed step (at t = 0: the alpha
  /// d_t phi term is taken as zero, which makes initialization idempotent).
  const Field& mu() const { return mu_; }
  double t() const { return t_; }
  long step_count() const { return step_count_; }
  /// Conserved mean of the order parameter.
  double mass() const { return mass_; }
  double energy() const { return energy_; }

  /// Advance one step of size config().dt (or less, after halvings).
  StepDiagnostics step() { return step(cfg_.dt); }
  StepDiagnostics step(double dt_target);

  /// March to t_end, recording snapshots and diagnostics. Ends early with
  /// status `equilibrated` once ||d_t phi||_{V'} stays below
  /// newton_tol * 1e-2 for 100 consecutive steps. Step failures return the
  /// partial trajectory with status `failed` instead of throwing.
  Trajectory run(double t_end);

  /// ||g - <g>||_H with g = a phi - J*phi + F'(phi); zero exactly at
  /// solutions of the constant-chemical-potential stationary problem.
  double pde_residual() const;

private:
  struct Attempt {
    bool ok = false;
    Field phi_new, mu_new;
    int newton_iters = 0;
    double dissipation_increment = 0.0;
    double energy_new = 0.0;
    std::string why;
  };
  Attempt attempt_ab(double dt);
  Attempt attempt_c(double dt);
  Attempt attempt_d(double dt);

  void restore_mass(Field& f) const;

  ModelConfig cfg_;
  const Kernel& kernel_;
  const Potential& pot_;
  Spectral spectral_;
  Field phi_, mu_;
  double t_ = 0.0;
  long step_count_ = 0;
  double mass_ = 0.0;
  double energy_ = 0.0; // NaN for variant D (no energy functional applies)
};

} // namespace nlch

#endif
