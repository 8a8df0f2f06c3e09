#ifndef NLCH_TRAJECTORY_HPP
#define NLCH_TRAJECTORY_HPP

#include <string>
#include <vector>

#include "nlch/model.hpp"

namespace nlch {

class Kernel;
class Potential;

struct StepDiagnostics {
  long step = 0;
  double t = 0.0;       // time after the step
  double dt_used = 0.0; // after any adaptive halving
  double energy_before = 0.0;
  double energy_after = 0.0;
  /// dt * (||grad mu||_H^2 + alpha ||dphi/dt||_H^2); nonnegative.
  double dissipation_increment = 0.0;
  int newton_iters = 0;
  double mass = 0.0;
  double phi_min = 0.0;
  double phi_max = 0.0;
  /// ||(phi^{n+1} - phi^n)/dt||_{V'}, the equilibration residual.
  double dphi_vprime = 0.0;
};

enum class RunStatus { running, equilibrated, failed };

std::string to_string(RunStatus s);

struct TimedField {
  double t;
  Field phi;
};

/// Time series of snapshots plus the per-step diagnostics ledger.
/// kernel/potential are non-owning back-references for post-processing and
/// stay valid as long as the objects handed to the simulator do.
struct Trajectory {
  std::vector<TimedField> snapshots;
  std::vector<StepDiagnostics> ledger;
  RunStatus status = RunStatus::running;
  std::string error;

  ModelConfig config;
  const Kernel* kernel = nullptr;
  const Potential* potential = nullptr;

  double t_begin() const { return snapshots.empty() ? 0.0 : snapshots.front().t; }
  double t_final() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }
};

} // namespace nlch

#endif
