#include "nlch/app.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "nlch/analysis.hpp"
#include "nlch/dynamics.hpp"
#include "nlch/errors.hpp"
#include "nlch/snapshot_io.hpp"
#include "nlch/stationary.hpp"
#include "nlch/version.hpp"

namespace nlch::app {

namespace {

namespace fs = std::filesystem;

void write_manifest(const fs::path& dir, const RunConfig& cfg) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << "nlch " << kVersion << "\n";
  for (const auto& [k, v] : cfg.resolved()) out << k << " = " << v << "\n";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Checks {
  std::ostream& out;
  bool all_ok = true;
  void line(bool ok, const std::string& name, const std::string& detail) {
    out << (ok ? "PASS" : "FAIL") << " " << name << ": " << detail << "\n";
    all_ok &= ok;
  }
};

Field direct_convolve(const Kernel& k, const Field& f) {
  const Grid& g = f.grid;
  Field out(g);
  const int nx = g.nx(), ny = g.ny();
  const double vol = g.cell_volume();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      double s = 0.0;
      for (int j2 = 0; j2 < ny; ++j2)
        for (int i2 = 0; i2 < nx; ++i2)
          s += k.table_at(i - i2, j - j2) * f.at(i2, j2);
      out.at(i, j) = s * vol;
    }
  return out;
}

Field perturbed(const Field& base, double amplitude, unsigned long long seed) {
  NoiseStream rng(seed);
  std::vector<double> r(base.size());
  for (double& v : r) v = 2.0 * rng.next_unit() - 1.0;
  double m = kahan_sum(r) / static_cast<double>(r.size());
  Field out = base;
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] += amplitude * (r[i] - m);
  return out;
}

} // namespace

int run(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_manifest(out_dir, cfg);

  Grid g = cfg.make_grid();
  Kernel kernel = build_kernel(cfg.make_kernel_spec(), g);
  Potential pot = cfg.make_potential();
  Field phi0 = cfg.make_initial_field(g);

  Simulator sim(cfg.make_model_config(), kernel, pot, std::move(phi0));
  Trajectory traj = sim.run(cfg.dynamics.t_end);

  char name[64];
  for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
    std::snprintf(name, sizeof(name), "snap_%08zu.bin", i);
    write_snapshot(out_dir / name, traj.snapshots[i].phi, traj.snapshots[i].t);
  }
  if (!traj.snapshots.empty())
    write_snapshot(out_dir / "final.bin", traj.snapshots.back().phi,
                   traj.snapshots.back().t);
  write_diagnostics_csv(out_dir / "diagnostics.csv", traj);

  log << "status " << to_string(traj.status) << ", " << traj.ledger.size()
      << " steps, t = " << (traj.snapshots.empty() ? 0.0 : traj.t_final()) << "\n";
  if (traj.status == RunStatus::failed) {
    log << "error: " << traj.error << "\n";
    return 1;
  }
  return 0;
}

namespace {

int verify_kernel_oracle(const RunConfig& cfg, Checks& c) {
  Grid g = cfg.make_grid();
  if (g.size() > 16384)
    throw UsageError("kernel-oracle preset runs the O(N^2) reference; use a grid "
                     "with at most 16384 cells");
  Kernel k = build_kernel(cfg.make_kernel_spec(), g);
  Field f(g);
  NoiseStream rng(cfg.ic_seed);
  for (double& v : f.values) v = 2.0 * rng.next_unit() - 1.0;

  Field fft = k.convolve(f);
  Field ref = direct_convolve(k, f);
  double scale = max_abs(ref);
  double dev = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    dev = std::max(dev, std::fabs(fft.values[i] - ref.values[i]));
  double rel = scale > 0.0 ? dev / scale : dev;
  c.line(rel <= 1e-10, "convolution-oracle",
         "max relative deviation " + num(rel) + " (tol 1e-10)");

  Field unit(g, 1.0);
  Field amb = k.convolve(unit);
  double adev = 0.0;
  for (std::size_t i = 0; i < amb.size(); ++i)
    adev = std::max(adev, std::fabs(amb.values[i] - k.ambient().values[i]));
  c.line(adev <= 1e-13, "ambient-cache",
         "J*1 vs cached ambient, max deviation " + num(adev) + " (tol 1e-13)");
  return c.all_ok ? 0 : 1;
}

int verify_hypotheses(const RunConfig& cfg, Checks& c) {
  Grid g = cfg.make_grid();
  Kernel k = build_kernel(cfg.make_kernel_spec(), g);
  Potential p = cfg.make_potential();
  HypothesisReport rep = check_hypotheses(p, k, cfg.dynamics.alpha);
  c.line(rep.h2, "H2-coercivity",
         "c0 = inf F'' + min a = " + num(rep.c0) + " (needs > 0)");
  c.line(rep.h3, "H3-quadratic-growth",
         "c1 = " + num(rep.c1) + ", c2 = " + num(rep.c2) + ", margin c1 - ||J||_1/2 = " +
             num(rep.c1_margin) + " (needs > 0; ||J||_1 = " + num(rep.kernel_l1) + ")");
  c.line(rep.h4, "H4-subgradient-growth",
         rep.h4 ? "largest passing p = " + num(rep.h4_p)
                : "no exponent p in (1,2] passes (singular potentials fail by design)");
  c.line(rep.h5, "H5-superquadratic",
         rep.h5 ? "largest passing q = " + num(rep.h5_q) : "no q passes");
  const double min_fe2 = rep.h10_margin - cfg.dynamics.alpha - rep.min_ambient;
  c.line(rep.h10, "H10-viscous-margin",
         "alpha + beta + min Fe'' = " + num(cfg.dynamics.alpha) + " + " +
             num(rep.min_ambient) + " + (" + num(min_fe2) + ") = " +
             num(rep.h10_margin) + " (needs > 0; inf Fc'' = " +
             num(rep.h10_f1_min) + ")");
  c.out << "info lbbb: F'(s)s >= F(s) - C_F holds with C_F = " << num(rep.lbbb_cf)
        << "\n";
  return c.all_ok ? 0 : 1;
}

struct BuiltRun {
  Grid grid;
  Kernel kernel;
  Potential pot;
  Trajectory traj;
  double final_pde_residual = 0.0;
  double final_mass = 0.0;
  Field final_phi;
};

BuiltRun do_run(const RunConfig& cfg, double dt, unsigned long long seed_shift = 0,
                double extra_noise = 0.0) {
  Grid g = cfg.make_grid();
  BuiltRun br{g, build_kernel(cfg.make_kernel_spec(), g), cfg.make_potential(), {}, 0, 0, {}};
  Field phi0 = cfg.make_initial_field(g);
  if (extra_noise != 0.0) phi0 = perturbed(phi0, extra_noise, cfg.ic_seed + 7777 + seed_shift);
  ModelConfig mc = cfg.make_model_config();
  mc.dt = dt;
  Simulator sim(mc, br.kernel, br.pot, std::move(phi0));
  br.traj = sim.run(mc.t_end);
  if (br.traj.status == RunStatus::failed)
    throw StepFailureError("verify run failed: " + br.traj.error);
  br.final_pde_residual = sim.pde_residual();
  br.final_mass = sim.mass();
  br.final_phi = sim.phi();
  return br;
}

int verify_energy_identity(const RunConfig& cfg, Checks& c) {
  if (cfg.dynamics.variant != Variant::A && cfg.dynamics.variant != Variant::B)
    throw UsageError("energy-identity preset needs variant A or B");
  BuiltRun br = do_run(cfg, cfg.dynamics.dt);
  bool monotone = true;
  double tol = 1e-12;
  if (!br.traj.ledger.empty())
    tol = 1e-12 * std::max(1.0, std::fabs(br.traj.ledger.front().energy_before));
  double worst = 0.0;
  for (const auto& d : br.traj.ledger) {
    worst = std::max(worst, d.energy_after - d.energy_before);
    if (d.energy_after > d.energy_before + tol) monotone = false;
  }
  c.line(monotone, "energy-monotone",
         "worst per-step increase " + num(worst) + " (tol " + num(tol) + ")");

  double drift = 0.0;
  for (const auto& d : br.traj.ledger)
    drift = std::max(drift, std::fabs(d.mass - br.traj.ledger.front().mass));
  c.line(drift <= 1e-12, "mass-conservation", "max drift " + num(drift));

  EnergyLedger e1 = energy_identity_residual(br.traj);
  BuiltRun br2 = do_run(cfg, cfg.dynamics.dt / 2.0);
  EnergyLedger e2 = energy_identity_residual(br2.traj);
  double ratio = e2.max_residual() > 0.0 ? e1.max_residual() / e2.max_residual() : 0.0;
  c.line(ratio >= 1.7 && ratio <= 2.3, "identity-richardson",
         "max residual " + num(e1.max_residual()) + " vs dt/2 " +
             num(e2.max_residual()) + ", ratio " + num(ratio) + " (target [1.7,2.3])");
  return c.all_ok ? 0 : 1;
}

int verify_separation(const RunConfig& cfg, Checks& c) {
  if (cfg.dynamics.variant != Variant::B && cfg.dynamics.variant != Variant::C)
    throw UsageError("separation preset applies to variants B and C only "
                     "(no separation claim for A or D)");
  BuiltRun br = do_run(cfg, cfg.dynamics.dt);
  double t0 = br.traj.t_begin(), t1 = br.traj.t_final();
  SeparationReport rep = separation(br.traj, 0.5 * (t0 + t1), t1);
  c.line(rep.delta > 0.0, "separation-delta",
         "trailing-window delta = " + num(rep.delta));
  double qmin = rep.quarter_deltas[0], qmax = rep.quarter_deltas[0];
  for (double q : rep.quarter_deltas) {
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
  }
  double mid = 0.5 * (qmin + qmax);
  bool stable = mid > 0.0 && (qmax - qmin) <= 0.2 * mid;
  c.line(stable, "separation-stability",
         "quarter deltas in [" + num(qmin) + ", " + num(qmax) + "] (within +-10%)");
  return c.all_ok ? 0 : 1;
}

int verify_contraction(const RunConfig& cfg, Checks& c) {
  const double eps = 1e-6;
  BuiltRun base = do_run(cfg, cfg.dynamics.dt);
  BuiltRun p1 = do_run(cfg, cfg.dynamics.dt, 0, eps);
  BuiltRun p2 = do_run(cfg, cfg.dynamics.dt, 0, 2.0 * eps);

  ContractionReport r1 = vprime_contraction(base.traj, p1.traj);
  ContractionReport r2 = vprime_contraction(base.traj, p2.traj);
  bool finite = std::isfinite(r1.kappa) && r1.kappa < 1e4;
  c.line(finite, "contraction-kappa",
         "fitted kappa = " + num(r1.kappa) + " with d(t) <= d(0) e^{kappa t/2}");
  double worst = 0.0;
  for (std::size_t i = 0; i < r1.distance.size(); ++i)
    if (r1.distance[i] > 0.0)
      worst = std::max(worst, std::fabs(r2.distance[i] / r1.distance[i] - 2.0) / 2.0);
  c.line(worst <= 0.05, "contraction-linearity",
         "doubling the perturbation scales d(t) by 2 within " + num(100 * worst) +
             "% (tol 5%)");
  return c.all_ok ? 0 : 1;
}

int verify_convergence(const RunConfig& cfg, Checks& c) {
  if (cfg.dynamics.variant != Variant::A && cfg.dynamics.variant != Variant::B)
    throw UsageError("convergence preset needs variant A or B");
  BuiltRun br = do_run(cfg, cfg.dynamics.dt);
  bool eq = br.traj.status == RunStatus::equilibrated;
  double last = br.traj.ledger.empty() ? 0.0 : br.traj.ledger.back().dphi_vprime;
  c.line(eq, "equilibration",
         "status " + to_string(br.traj.status) + ", terminal ||d_t phi||_V' = " + num(last));
  c.line(br.final_pde_residual < 1e-6, "stationary-residual",
         "pde_residual = " + num(br.final_pde_residual) + " (tol 1e-6)");
  if (!eq) return 1;

  StationaryOptions opt;
  opt.max_outer = cfg.stationary_max_outer;
  opt.damping = cfg.stationary_damping;
  StationaryResult st = solve_stationary(br.kernel, br.pot, br.final_mass,
                                         br.final_phi, cfg.stationary_tol, opt);
  Field diff = st.phi_star;
  for (std::size_t i = 0; i < diff.size(); ++i) diff.values[i] -= br.final_phi.values[i];
  double dist = l2_norm(diff);
  c.line(st.converged && st.iterations <= 10, "stationary-warmstart",
         "converged = " + std::string(st.converged ? "yes" : "no") + " in " +
             std::to_string(st.iterations) + " outer iterations (cap 10)");
  c.line(dist <= 10.0 * cfg.stationary_tol, "stationary-distance",
         "||phi* - final||_H = " + num(dist) + " (tol " +
             num(10.0 * cfg.stationary_tol) + ")");
  return c.all_ok ? 0 : 1;
}

} // namespace

int verify(const RunConfig& cfg, const std::string& preset, std::ostream& out) {
  Checks c{out};
  if (preset == "kernel-oracle") return verify_kernel_oracle(cfg, c);
  if (preset == "hypotheses") return verify_hypotheses(cfg, c);
  if (preset == "energy-identity") return verify_energy_identity(cfg, c);
  if (preset == "separation") return verify_separation(cfg, c);
  if (preset == "contraction") return verify_contraction(cfg, c);
  if (preset == "convergence") return verify_convergence(cfg, c);
  throw UsageError("unknown verify preset '" + preset +
                   "' (energy-identity | separation | contraction | convergence | "
                   "kernel-oracle | hypotheses)");
}

int equilibrate(const RunConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  write_manifest(out_dir, cfg);

  Grid g = cfg.make_grid();
  Kernel kernel = build_kernel(cfg.make_kernel_spec(), g);
  Potential pot = cfg.make_potential();
  Field init = cfg.make_initial_field(g);
  double mass = cfg.stationary_mass.value_or(mean(init));
  if (cfg.ic_type == RunConfig::IcType::constant && cfg.stationary_mass)
    init = Field(g, mass, FieldTag::order_parameter);

  StationaryOptions opt;
  opt.max_outer = cfg.stationary_max_outer;
  opt.damping = cfg.stationary_damping;
  StationaryResult res =
      cfg.stationary_degenerate
          ? degenerate_equilibrium(kernel, mass, init, cfg.stationary_tol, opt)
          : solve_stationary(kernel, pot, mass, init, cfg.stationary_tol, opt);

  write_snapshot(out_dir / "phi_star.bin", res.phi_star, 0.0);
  {
    std::ofstream out(out_dir / "summary.txt");
    out << "converged = " << (res.converged ? "true" : "false") << "\n"
        << "iterations = " << res.iterations << "\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "mu_star = %.17g\nresidual = %.17g\nmass = %.17g\n",
                  res.mu_star, res.residual, mass);
    out << buf;
  }
  log << "mu* = " << res.mu_star << ", residual = " << res.residual << ", "
      << res.iterations << " iterations, "
      << (res.converged ? "converged" : "NOT converged") << "\n";
  return res.converged ? 0 : 1;
}

std::pair<std::string, std::vector<std::string>> parse_axis(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("axis spec must be key=v1,v2,...");
  std::string key = spec.substr(0, eq);
  std::vector<std::string> values;
  std::string cur;
  std::istringstream ss(spec.substr(eq + 1));
  while (std::getline(ss, cur, ','))
    if (!cur.empty()) values.push_back(cur);
  if (values.empty()) throw UsageError("axis spec has an empty value list");
  return {key, values};
}

int sweep(const RunConfig& base, const std::string& axis_key,
          const std::vector<std::string>& values, const fs::path& out_dir,
          int threads, std::ostream& log) {
  for (const char* structural : {"grid.dim", "dynamics.variant", "kernel.type",
                                 "potential.type", "ic.type"})
    if (axis_key == structural)
      throw UsageError("cannot sweep structural key '" + axis_key + "'");
  if (values.empty()) throw UsageError("sweep needs a nonempty value list");

  std::vector<RunConfig> jobs;
  std::vector<fs::path> dirs;
  for (const auto& v : values) {
    jobs.push_back(parse_config(override_entry(base.entries, axis_key, v)));
    std::string leaf = axis_key + "=" + v;
    std::replace(leaf.begin(), leaf.end(), '/', '_');
    dirs.push_back(out_dir / leaf);
  }

  std::vector<int> codes(jobs.size(), -1);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    std::ostringstream sink;
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        codes[i] = run(jobs[i], dirs[i], sink);
      } catch (const std::exception&) {
        codes[i] = 2;
      }
    }
  };
  const int nthreads = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::ofstream idx(out_dir / "index.csv");
  idx << "job,key,value,dir,exit\n";
  int bad = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    idx << i << "," << axis_key << "," << values[i] << ","
        << dirs[i].filename().string() << "," << codes[i] << "\n";
    log << "job " << i << " (" << axis_key << " = " << values[i] << "): exit "
        << codes[i] << "\n";
    if (codes[i] != 0) ++bad;
  }
  return bad == 0 ? 0 : 1;
}

int export_csv(const fs::path& snapshot, const fs::path& out_csv, std::ostream& log) {
  SnapshotData snap = read_snapshot(snapshot);
  std::ofstream out(out_csv);
  if (!out) throw IoError("cannot write " + out_csv.string());
  const Grid& g = snap.field.grid;
  char buf[128];
  if (g.dim == 1) {
    out << "x,phi\n";
    for (int i = 0; i < g.nx(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", g.center(0, i),
                    snap.field.at(i, 0));
      out << buf;
    }
  } else {
    out << "x,y,phi\n";
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.center(0, i),
                      g.center(1, j), snap.field.at(i, j));
        out << buf;
      }
  }
  log << "wrote " << out_csv.string() << " (t = " << snap.time << ")\n";
  return 0;
}

} // namespace nlch::app
