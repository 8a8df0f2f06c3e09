#include "nlch/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlch/errors.hpp"
#include "nlch/spectral.hpp"

namespace nlch {

double energy(const Field& phi, const Kernel& k, const Potential& p) {
  require_same_grid(phi.grid, k.grid(), "energy");
  if (p.singular()) {
    for (std::size_t i = 0; i < phi.size(); ++i)
      if (!p.admissible(phi.values[i]))
        throw PotentialDomainError("energy: order parameter is inadmissible at cell " +
                                       std::to_string(i),
                                   phi.values[i]);
  }
  const Field conv = k.convolve(phi);
  Field aphi(phi.grid);
  for (std::size_t i = 0; i < phi.size(); ++i)
    aphi.values[i] = k.ambient().values[i] * phi.values[i];
  const double interaction = 0.5 * (inner(aphi, phi) - inner(conv, phi));
  std::vector<double> fv(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) fv[i] = p.F(phi.values[i]);
  const double bulk = kahan_sum(fv) * phi.grid.cell_volume();
  return interaction + bulk;
}

double EnergyLedger::max_residual() const {
  double m = 0.0;
  for (double r : identity_residual) m = std::max(m, r);
  return m;
}

EnergyLedger energy_identity_residual(const Trajectory& traj) {
  if (traj.config.variant != Variant::A && traj.config.variant != Variant::B)
    throw UsageError("energy identity applies to variants A and B only");
  if (traj.ledger.empty())
    throw UsageError("energy identity needs a nonempty ledger");
  EnergyLedger led;
  const double e0 = traj.ledger.front().energy_before;
  double cum = 0.0;
  for (const auto& d : traj.ledger) {
    cum += d.dissipation_increment;
    led.times.push_back(d.t);
    led.energy.push_back(d.energy_after);
    led.cumulative_dissipation.push_back(cum);
    led.identity_residual.push_back(std::fabs(d.energy_after + cum - e0));
  }
  return led;
}

DissipativeFit dissipative_fit(const Trajectory& traj, double mass_bound) {
  if (traj.ledger.size() < 50)
    throw UsageError("dissipative fit needs at least 50 ledger entries");
  for (const auto& d : traj.ledger)
    if (std::fabs(d.mass) > mass_bound + 1e-12)
      throw UsageError("trajectory mass exceeds the stated bound m");

  const double t0 = traj.t_begin();
  std::vector<double> ts, es;
  for (const auto& d : traj.ledger) {
    ts.push_back(d.t - t0);
    es.push_back(d.energy_after);
  }
  const double e0 = traj.ledger.front().energy_before;

  auto C_of = [&](double k) {
    double c = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i)
      c = std::max(c, es[i] - e0 * std::exp(-k * ts[i]));
    return c; // smallest feasible C >= 0 for this rate
  };

  // target: the trailing energy plateau (the absorbing level)
  double plateau = -std::numeric_limits<double>::infinity();
  for (std::size_t i = (3 * ts.size()) / 4; i < ts.size(); ++i)
    plateau = std::max(plateau, es[i]);
  const double C_target = std::max(0.0, plateau);

  DissipativeFit fit;
  fit.k = 0.0;
  fit.C = C_of(0.0);
  const double kmax = 50.0 / std::max(ts.front(), 1e-12);
  for (int i = 0; i <= 400; ++i) {
    double k = kmax * std::pow(10.0, -6.0 * (1.0 - i / 400.0));
    double c = C_of(k);
    if (c <= C_target * (1.0 + 1e-9) + 1e-12) {
      fit.k = k;
      fit.C = c;
    } else {
      break; // C(k) is nondecreasing in k
    }
  }
  return fit;
}

double linf_track(const Trajectory& traj, double tau) {
  if (!(tau >= 0.0)) throw UsageError("linf_track needs tau >= 0");
  double sup = -1.0;
  for (const auto& s : traj.snapshots)
    if (s.t >= 2.0 * tau) sup = std::max(sup, max_abs(s.phi));
  if (sup < 0.0)
    throw UsageError("linf_track: no snapshots at t >= 2 tau (window empty)");
  return sup;
}

SeparationReport separation(const Trajectory& traj, double t_start, double t_end) {
  const Variant v = traj.config.variant;
  if (v != Variant::B && v != Variant::C)
    throw UsageError("separation applies to variants B and C only "
                     "(no separation claim for A or D)");
  if (!(t_start < t_end))
    throw UsageError("separation: empty window");
  if (traj.snapshots.empty() || t_start < traj.t_begin() - 1e-12 ||
      t_end > traj.t_final() + 1e-12)
    throw UsageError("separation: window outside the trajectory span");
  const double lo = v == Variant::B ? -1.0 : 0.0;
  const double hi = 1.0;

  SeparationReport rep;
  rep.t_start = t_start;
  rep.t_end = t_end;
  rep.delta = std::numeric_limits<double>::infinity();
  rep.quarter_deltas.fill(std::numeric_limits<double>::infinity());
  bool any = false;
  for (const auto& s : traj.snapshots) {
    if (s.t < t_start - 1e-12 || s.t > t_end + 1e-12) continue;
    any = true;
    double d = std::numeric_limits<double>::infinity();
    for (double x : s.phi.values)
      d = std::min(d, std::min(x - lo, hi - x));
    rep.delta = std::min(rep.delta, d);
    double frac = (s.t - t_start) / (t_end - t_start);
    int q = std::min(3, static_cast<int>(frac * 4.0));
    rep.quarter_deltas[q] = std::min(rep.quarter_deltas[q], d);
  }
  if (!any) throw UsageError("separation: no snapshots inside the window");
  rep.monotone_tail = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (double q : rep.quarter_deltas) {
    if (!std::isfinite(q)) continue;
    if (q < prev - 1e-12) rep.monotone_tail = false;
    prev = q;
  }
  if (rep.delta < 0.0) rep.delta = 0.0;
  return rep;
}

ContractionReport vprime_contraction(const Trajectory& ta, const Trajectory& tb) {
  if (ta.snapshots.empty() || tb.snapshots.empty())
    throw UsageError("contraction needs nonempty trajectories");
  if (ta.snapshots.size() != tb.snapshots.size())
    throw UsageError("contraction: trajectories have different snapshot counts");
  const Field& fa = ta.snapshots.front().phi;
  const Field& fb = tb.snapshots.front().phi;
  require_same_grid(fa.grid, fb.grid, "contraction");
  if (ta.config.variant != tb.config.variant || ta.config.alpha != tb.config.alpha ||
      ta.config.dt != tb.config.dt)
    throw UsageError("contraction: trajectories were produced by different configs");
  const double ma = mean(fa), mb = mean(fb);
  if (std::fabs(ma - mb) > 1e-10 * (1.0 + std::fabs(ma)))
    throw UsageError("contraction requires equal means; the |M1 - M2| correction "
                     "terms are not implemented");

  const double alpha = ta.config.alpha;
  ContractionReport rep;
  for (std::size_t i = 0; i < ta.snapshots.size(); ++i) {
    const auto& sa = ta.snapshots[i];
    const auto& sb = tb.snapshots[i];
    if (std::fabs(sa.t - sb.t) > 1e-9 * (1.0 + std::fabs(sa.t)))
      throw UsageError("contraction: snapshot times do not line up");
    Field d = sa.phi;
    for (std::size_t k = 0; k < d.size(); ++k) d.values[k] -= sb.phi.values[k];
    const double vp = vprime_norm(d);
    const double h = l2_norm(d);
    rep.times.push_back(sa.t - ta.t_begin());
    rep.distance.push_back(std::sqrt(vp * vp + alpha * h * h));
  }
  rep.kappa = 0.0;
  const double d0 = rep.distance.front();
  if (d0 > 0.0) {
    for (std::size_t i = 1; i < rep.distance.size(); ++i) {
      if (rep.times[i] <= 0.0) continue;
      if (rep.distance[i] <= 0.0) continue;
      rep.kappa = std::max(rep.kappa,
                           2.0 * std::log(rep.distance[i] / d0) / rep.times[i]);
    }
  }
  return rep;
}

namespace {
struct LineFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
};
LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const std::size_t n = x.size();
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}
} // namespace

ConvergenceReport convergence_report(const Trajectory& traj, const Field& phi_star) {
  if (traj.status != RunStatus::equilibrated) {
    const double res =
        traj.ledger.empty() ? std::numeric_limits<double>::quiet_NaN()
                            : traj.ledger.back().dphi_vprime;
    throw UsageError("convergence_report needs an equilibrated trajectory "
                     "(current ||d_t phi||_{V'} = " +
                     std::to_string(res) + ")");
  }
  require_same_grid(traj.snapshots.front().phi.grid, phi_star.grid,
                    "convergence_report");

  ConvergenceReport rep;
  for (const auto& s : traj.snapshots) {
    Field d = s.phi;
    for (std::size_t k = 0; k < d.size(); ++k) d.values[k] -= phi_star.values[k];
    rep.times.push_back(s.t);
    rep.dist_h.push_back(l2_norm(d));
    rep.dist_sup.push_back(max_abs(d));
  }
  rep.terminal_h = rep.dist_h.back();
  rep.terminal_sup = rep.dist_sup.back();

  // trailing half of the snapshots, positive distances only
  std::vector<double> lx_pow, ly, lx_exp;
  for (std::size_t i = rep.times.size() / 2; i < rep.times.size(); ++i) {
    if (rep.dist_h[i] <= 0.0) continue;
    lx_pow.push_back(std::log1p(rep.times[i]));
    lx_exp.push_back(rep.times[i]);
    ly.push_back(std::log(rep.dist_h[i]));
  }
  if (ly.size() < 3) {
    rep.fit_done = false;
    return rep;
  }
  LineFit pw = least_squares(lx_pow, ly);
  LineFit ex = least_squares(lx_exp, ly);
  rep.fit_done = true;
  rep.rho = pw.slope < 0.0 ? -1.0 / pw.slope : std::numeric_limits<double>::infinity();
  rep.r2_power = pw.r2;
  rep.exp_rate = -ex.slope;
  rep.r2_exp = ex.r2;
  return rep;
}

} // namespace nlch
