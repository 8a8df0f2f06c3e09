#include "nlch/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nlch/analysis.hpp"
#include "nlch/errors.hpp"

namespace nlch {

char variant_letter(Variant v) {
  switch (v) {
    case Variant::A: return 'A';
    case Variant::B: return 'B';
    case Variant::C: return 'C';
    case Variant::D: return 'D';
  }
  return '?';
}

Variant variant_from_letter(char c) {
  switch (c) {
    case 'A': return Variant::A;
    case 'B': return Variant::B;
    case 'C': return Variant::C;
    case 'D': return Variant::D;
  }
  throw ConfigError(std::string("unknown dynamics variant '") + c + "'");
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::running: return "running";
    case RunStatus::equilibrated: return "equilibrated";
    case RunStatus::failed: return "failed";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dynamics.dt must be positive");
  if (!(t_end >= 0.0)) throw ConfigError("dynamics.t_end must be nonnegative");
  if (!(newton_tol > 0.0)) throw ConfigError("solver.newton_tol must be positive");
  if (newton_max < 1) throw ConfigError("solver.newton_max must be >= 1");
  if (!(interior_margin >= 0.0))
    throw ConfigError("solver.interior_margin must be nonnegative");
  if (snapshot_every < 1) throw ConfigError("dynamics.snapshot_every must be >= 1");
  if (variant == Variant::A && alpha != 0.0)
    throw ConfigError("variant A is nonviscous; use variant B for alpha > 0");
  if (variant == Variant::B && !(alpha > 0.0))
    throw ConfigError(
        "variant B requires viscosity alpha > 0 (the singular-potential "
        "separation mechanism needs the alpha d_t phi term)");
  if (variant == Variant::C && !(mobility_b0 > 0.0) && !mobility_field)
    throw ConfigError("variant C requires mobility b0 > 0");
}

namespace {

Field axpy(const Field& x, double a, const Field& y) {
  Field r = x;
  for (std::size_t k = 0; k < r.size(); ++k) r.values[k] += a * y.values[k];
  return r;
}

void project_zero_mean(Field& f) {
  double m = mean(f);
  for (double& v : f.values) v -= m;
}

/// Preconditioned CG on the zero-mean subspace; x starts at zero.
template <class Op, class Pre>
int pcg(const Op& apply, const Pre& precond, const Field& b, Field& x,
        double rtol, int maxit) {
  x = Field(b.grid, 0.0, b.tag);
  Field r = b;
  project_zero_mean(r);
  const double bnorm = l2_norm(r);
  if (bnorm == 0.0) return 0;
  Field z = precond(r);
  project_zero_mean(z);
  Field p = z;
  double rz = inner(r, z);
  int it = 0;
  for (; it < maxit; ++it) {
    if (l2_norm(r) <= rtol * bnorm) break;
    Field q = apply(p);
    project_zero_mean(q);
    double pq = inner(p, q);
    if (!(pq > 0.0)) break; // operator lost definiteness numerically
    double a = rz / pq;
    for (std::size_t k = 0; k < x.size(); ++k) {
      x.values[k] += a * p.values[k];
      r.values[k] -= a * q.values[k];
    }
    project_zero_mean(r);
    z = precond(r);
    project_zero_mean(z);
    double rz_new = inner(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t k = 0; k < p.size(); ++k)
      p.values[k] = z.values[k] + beta * p.values[k];
  }
  return it;
}

/// Arithmetic face average of a cell field, boundary faces untouched (zero
/// flux there anyway).
VectorField face_average(const Field& f) {
  VectorField v(f.grid);
  const int nx = f.grid.nx(), ny = f.grid.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      v.xface(i, j) = 0.5 * (f.at(i - 1, j) + f.at(i, j));
  if (f.grid.dim == 2)
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        v.yface(i, j) = 0.5 * (f.at(i, j - 1) + f.at(i, j));
  return v;
}

} // namespace

Simulator::Simulator(const ModelConfig& cfg, const Kernel& kernel,
                     const Potential& pot, Field phi0)
    : cfg_(cfg), kernel_(kernel), pot_(pot), spectral_(kernel.grid()),
      phi_(std::move(phi0)) {
  cfg_.validate();
  require_same_grid(phi_.grid, kernel_.grid(), "init_state");
  phi_.tag = FieldTag::order_parameter;
  if (!all_finite(phi_)) throw InitialDataError("initial data contains non-finite values");

  if (cfg_.variant == Variant::C && pot_.kind() != Potential::Kind::entropy)
    throw ConfigError("variant C requires the entropy potential on (0,1)");
  if (cfg_.variant == Variant::B && !pot_.singular())
    throw ConfigError("variant B pairs the viscous term with a singular potential");
  if (cfg_.variant == Variant::C && cfg_.mobility_field) {
    require_same_grid(cfg_.mobility_field->grid, phi_.grid, "mobility field");
    if (min_value(*cfg_.mobility_field) <= 0.0)
      throw ConfigError("variant C mobility b0(x) must be strictly positive");
  }

  const bool needs_interior =
      pot_.singular() &&
      (cfg_.variant == Variant::A || cfg_.variant == Variant::B || cfg_.variant == Variant::C);
  if (needs_interior) {
    const double margin = cfg_.interior_margin;
    for (std::size_t k = 0; k < phi_.size(); ++k)
      if (!pot_.admissible(phi_.values[k], margin)) {
        std::ostringstream os;
        os << "initial data leaves the admissible interval (" << pot_.lo() << ", "
           << pot_.hi() << ") with margin " << margin << " at cell " << k
           << ": value " << phi_.values[k];
        throw InitialDataError(os.str());
      }
  }

  mass_ = mean(phi_);
  if (cfg_.variant == Variant::B && !(std::fabs(mass_) < 1.0))
    throw InitialDataError("variant B needs |<phi0>| < 1");
  if (cfg_.variant == Variant::C && !(mass_ > 0.0 && mass_ < 1.0))
    throw InitialDataError("variant C needs <phi0> in (0,1)");

  // mu at t = 0 (the alpha d_t phi contribution is zero by convention)
  const Field conv = kernel_.convolve(phi_);
  Field mu(phi_.grid, 0.0, FieldTag::chemical_potential);
  switch (cfg_.variant) {
    case Variant::A:
    case Variant::B:
      for (std::size_t k = 0; k < mu.size(); ++k)
        mu.values[k] = kernel_.ambient().values[k] * phi_.values[k] -
                       conv.values[k] + pot_.dF(phi_.values[k]);
      break;
    case Variant::C:
      for (std::size_t k = 0; k < mu.size(); ++k)
        mu.values[k] = pot_.dF(phi_.values[k]) + kernel_.ambient().values[k] -
                       2.0 * conv.values[k];
      break;
    case Variant::D:
      for (std::size_t k = 0; k < mu.size(); ++k)
        mu.values[k] = phi_.values[k] - std::tanh(cfg_.beta * conv.values[k]);
      break;
  }
  mu_ = std::move(mu);
  energy_ = cfg_.variant == Variant::D
                ? std::numeric_limits<double>::quiet_NaN()
                : nlch::energy(phi_, kernel_, pot_);
}

void Simulator::restore_mass(Field& f) const {
  const double m = mean(f);
  const double delta = mass_ - m;
  if (!(std::fabs(delta) <= 1e-9 * (1.0 + std::fabs(mass_))))
    throw NumericalBlowupError("conserved mean drifted by " + std::to_string(delta) +
                               " within one step; solver is inconsistent");
  for (double& v : f.values) v += delta;
}

Simulator::Attempt Simulator::attempt_ab(double dt) {
  Attempt out;
  const Field& a = kernel_.ambient();
  const double alpha_dt = cfg_.alpha / dt;
  const double margin = cfg_.interior_margin;
  const bool singular = pot_.singular();

  // explicit part: Fe'(phi^n) - J*phi^n
  const Field conv_n = kernel_.convolve(phi_);
  Field gexp(phi_.grid);
  for (std::size_t k = 0; k < gexp.size(); ++k)
    gexp.values[k] = pot_.dFe(phi_.values[k]) - conv_n.values[k];

  auto mu_of = [&](const Field& p) {
    Field mu(p.grid, 0.0, FieldTag::chemical_potential);
    for (std::size_t k = 0; k < mu.size(); ++k)
      mu.values[k] = a.values[k] * p.values[k] + pot_.dFc(p.values[k]) +
                     alpha_dt * (p.values[k] - phi_.values[k]) + gexp.values[k];
    return mu;
  };
  auto inv_n = [&](const Field& f) {
    return spectral_.apply_mode_filter(
        f, [](double lam) { return lam <= 0.0 ? 0.0 : 1.0 / lam; });
  };
  // residual in the V'-lifted form: N[(phi - phi^n)/dt] + (mu - <mu>)
  auto residual_of = [&](const Field& p, const Field& mu) {
    Field d = axpy(p, -1.0, phi_);
    for (double& v : d.values) v /= dt;
    Field s = inv_n(d);
    const double mum = mean(mu);
    for (std::size_t k = 0; k < s.size(); ++k)
      s.values[k] += mu.values[k] - mum;
    return s;
  };

  Field p = phi_;
  Field mu = mu_of(p);
  Field S = residual_of(p, mu);
  double rn = l2_norm(S);
  std::vector<double> history{rn};
  bool converged = rn <= cfg_.newton_tol;
  int iters = 0;

  while (!converged && iters < cfg_.newton_max) {
    ++iters;
    // Jacobian coefficient a + Fc''(p) + alpha/dt; coercive by the splitting
    Field c(p.grid);
    double cbar = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.size(); ++k) {
      c.values[k] = a.values[k] + pot_.d2Fc(p.values[k]) + alpha_dt;
      cbar = std::min(cbar, c.values[k]);
    }

    Field rhs = S;
    for (double& v : rhs.values) v = -v;
    Field delta;
    pcg(
        [&](const Field& v) {
          Field q = inv_n(v);
          for (std::size_t k = 0; k < q.size(); ++k)
            q.values[k] = q.values[k] / dt + c.values[k] * v.values[k];
          return q;
        },
        [&](const Field& r) {
          return spectral_.apply_mode_filter(r, [&](double lam) {
            return lam <= 0.0 ? 0.0 : dt * lam / (1.0 + cbar * dt * lam);
          });
        },
        rhs, delta, 1e-8, 400);
    project_zero_mean(delta);

    // fraction-to-boundary cap keeps the barrier finite
    double smax = 1.0;
    if (singular) {
      for (std::size_t k = 0; k < delta.size(); ++k) {
        double d = delta.values[k];
        if (d > 0.0)
          smax = std::min(smax, 0.995 * (pot_.hi() - margin - p.values[k]) / d);
        else if (d < 0.0)
          smax = std::min(smax, 0.995 * (pot_.lo() + margin - p.values[k]) / d);
      }
      smax = std::max(smax, 0.0);
    }

    double s = smax;
    bool accepted = false;
    for (int bt = 0; bt < 60 && s > 1e-14; ++bt) {
      Field trial = axpy(p, s, delta);
      Field mu_trial = mu_of(trial);
      Field S_trial = residual_of(trial, mu_trial);
      double rt = l2_norm(S_trial);
      if (rt <= (1.0 - 1e-4 * s) * rn || rt <= cfg_.newton_tol) {
        p = std::move(trial);
        mu = std::move(mu_trial);
        S = std::move(S_trial);
        rn = rt;
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    history.push_back(rn);
    if (!accepted) {
      std::ostringstream os;
      os << "Newton line search stalled; residual history:";
      for (double h : history) os << ' ' << h;
      out.why = os.str();
      return out;
    }
    converged = rn <= cfg_.newton_tol;
  }

  if (!converged) {
    std::ostringstream os;
    os << "Newton did not reach tol " << cfg_.newton_tol << " in "
       << cfg_.newton_max << " iterations; residual history:";
    for (double h : history) os << ' ' << h;
    out.why = os.str();
    return out;
  }

  restore_mass(p);
  mu = mu_of(p);
  if (!all_finite(p) || !all_finite(mu)) {
    out.why = "non-finite state after Newton solve";
    return out;
  }
  if (singular) {
    for (double v : p.values)
      if (!pot_.admissible(v, 0.5 * margin)) {
        out.why = "iterate left the admissible interval";
        return out;
      }
  }

  const double e_new = nlch::energy(p, kernel_, pot_);
  if (!(e_new <= energy_ + 1e-12 * std::max(1.0, std::fabs(energy_)))) {
    out.why = "discrete energy increased (Newton solve too loose for this dt)";
    return out;
  }

  Field dphi = axpy(p, -1.0, phi_);
  const double dd = l2_norm(dphi) / dt;
  out.dissipation_increment =
      dt * (inner(grad(mu), grad(mu)) + cfg_.alpha * dd * dd);
  out.energy_new = e_new;
  out.newton_iters = iters;
  out.phi_new = std::move(p);
  out.mu_new = std::move(mu);
  out.ok = true;
  return out;
}

Simulator::Attempt Simulator::attempt_c(double dt) {
  Attempt out;
  const Field& a = kernel_.ambient();

  // w = a - 2 J*phi; advective flux b0 phi(1-phi) grad w, then implicit
  // diffusion (I/dt - div b0 grad)
  const Field conv_n = kernel_.convolve(phi_);
  Field w(phi_.grid);
  for (std::size_t k = 0; k < w.size(); ++k)
    w.values[k] = a.values[k] - 2.0 * conv_n.values[k];

  Field mvals(phi_.grid);
  for (std::size_t k = 0; k < mvals.size(); ++k)
    mvals.values[k] = phi_.values[k] * (1.0 - phi_.values[k]);

  VectorField gw = grad(w);
  VectorField mface = face_average(mvals);
  const bool varying = cfg_.mobility_field.has_value();
  VectorField bface;
  if (varying) bface = face_average(*cfg_.mobility_field);
  for (std::size_t k = 0; k < gw.xcomp.size(); ++k)
    gw.xcomp[k] *= (varying ? bface.xcomp[k] : cfg_.mobility_b0) * mface.xcomp[k];
  for (std::size_t k = 0; k < gw.ycomp.size(); ++k)
    gw.ycomp[k] *= (varying ? bface.ycomp[k] : cfg_.mobility_b0) * mface.ycomp[k];
  Field adv = div(gw);

  Field phi_new;
  if (!varying) {
    Field rhs = adv;
    for (std::size_t k = 0; k < rhs.size(); ++k)
      rhs.values[k] += phi_.values[k] / dt;
    phi_new = spectral_.solve_helmholtz(rhs, 1.0 / dt, cfg_.mobility_b0);
  } else {
    // zero-mean substitution keeps the conserved mode exact
    Field rhs = adv;
    for (std::size_t k = 0; k < rhs.size(); ++k)
      rhs.values[k] += (phi_.values[k] - mass_) / dt;
    const double bbar = mean(*cfg_.mobility_field);
    Field psi;
    pcg(
        [&](const Field& v) {
          VectorField gv = grad(v);
          for (std::size_t k = 0; k < gv.xcomp.size(); ++k)
            gv.xcomp[k] *= bface.xcomp[k];
          for (std::size_t k = 0; k < gv.ycomp.size(); ++k)
            gv.ycomp[k] *= bface.ycomp[k];
          Field q = div(gv);
          for (std::size_t k = 0; k < q.size(); ++k)
            q.values[k] = v.values[k] / dt - q.values[k];
          return q;
        },
        [&](const Field& r) {
          return spectral_.apply_mode_filter(r, [&](double lam) {
            return lam <= 0.0 ? 0.0 : 1.0 / (1.0 / dt + bbar * lam);
          });
        },
        rhs, psi, 1e-11, 800);
    phi_new = psi;
    for (double& v : phi_new.values) v += mass_;
  }
  phi_new.tag = FieldTag::order_parameter;

  if (!all_finite(phi_new)) {
    out.why = "non-finite state after implicit diffusion solve";
    return out;
  }
  restore_mass(phi_new);
  // positivity is enforced by halving the step, never by clipping
  for (double v : phi_new.values)
    if (!(v > 1e-14 && v < 1.0 - 1e-14)) {
      out.why = "order parameter left (0,1)";
      return out;
    }

  const Field conv_new = kernel_.convolve(phi_new);
  Field mu(phi_.grid, 0.0, FieldTag::chemical_potential);
  for (std::size_t k = 0; k < mu.size(); ++k)
    mu.values[k] = pot_.dF(phi_new.values[k]) + a.values[k] - 2.0 * conv_new.values[k];

  // dissipation dt * <kappa grad mu, grad mu>, kappa = b0 phi(1-phi)
  VectorField gmu = grad(mu);
  Field m_new(phi_.grid);
  for (std::size_t k = 0; k < m_new.size(); ++k)
    m_new.values[k] = phi_new.values[k] * (1.0 - phi_new.values[k]);
  VectorField mf = face_average(m_new);
  double diss = 0.0;
  for (std::size_t k = 0; k < gmu.xcomp.size(); ++k)
    diss += (varying ? bface.xcomp[k] : cfg_.mobility_b0) * mf.xcomp[k] *
            gmu.xcomp[k] * gmu.xcomp[k];
  for (std::size_t k = 0; k < gmu.ycomp.size(); ++k)
    diss += (varying ? bface.ycomp[k] : cfg_.mobility_b0) * mf.ycomp[k] *
            gmu.ycomp[k] * gmu.ycomp[k];
  out.dissipation_increment = dt * diss * phi_.grid.cell_volume();

  out.energy_new = nlch::energy(phi_new, kernel_, pot_);
  out.phi_new = std::move(phi_new);
  out.mu_new = std::move(mu);
  out.ok = true;
  return out;
}

Simulator::Attempt Simulator::attempt_d(double dt) {
  Attempt out;
  const Field conv_n = kernel_.convolve(phi_);
  Field u(phi_.grid);
  for (std::size_t k = 0; k < u.size(); ++k)
    u.values[k] = std::tanh(cfg_.beta * conv_n.values[k]);
  Field lap_u = neumann_laplacian(u);

  Field rhs(phi_.grid);
  for (std::size_t k = 0; k < rhs.size(); ++k)
    rhs.values[k] = phi_.values[k] / dt - lap_u.values[k];
  Field phi_new = spectral_.solve_helmholtz(rhs, 1.0 / dt, 1.0);
  phi_new.tag = FieldTag::order_parameter;

  if (!all_finite(phi_new)) {
    out.why = "non-finite state after Kawasaki solve";
    return out;
  }
  restore_mass(phi_new);

  const Field conv_new = kernel_.convolve(phi_new);
  Field mu(phi_.grid, 0.0, FieldTag::chemical_potential);
  for (std::size_t k = 0; k < mu.size(); ++k)
    mu.values[k] = phi_new.values[k] - std::tanh(cfg_.beta * conv_new.values[k]);

  VectorField gmu = grad(mu);
  out.dissipation_increment = dt * inner(gmu, gmu);
  out.energy_new = std::numeric_limits<double>::quiet_NaN();
  out.phi_new = std::move(phi_new);
  out.mu_new = std::move(mu);
  out.ok = true;
  return out;
}

StepDiagnostics Simulator::step(double dt_target) {
  if (!(dt_target > 0.0)) throw UsageError("step needs a positive dt");
  double dt = dt_target;
  std::string last_why;
  for (int h = 0; h <= cfg_.max_halvings; ++h) {
    Attempt a;
    switch (cfg_.variant) {
      case Variant::A:
      case Variant::B: a = attempt_ab(dt); break;
      case Variant::C: a = attempt_c(dt); break;
      case Variant::D: a = attempt_d(dt); break;
    }
    if (a.ok) {
      StepDiagnostics diag;
      diag.step = ++step_count_;
      diag.dt_used = dt;
      diag.energy_before = energy_;
      diag.energy_after = a.energy_new;
      diag.dissipation_increment = a.dissipation_increment;
      diag.newton_iters = a.newton_iters;

      Field dphi = axpy(a.phi_new, -1.0, phi_);
      diag.dphi_vprime = spectral_.vprime_norm(dphi) / dt;

      phi_ = std::move(a.phi_new);
      mu_ = std::move(a.mu_new);
      energy_ = a.energy_new;
      t_ += dt;
      diag.t = t_;
      diag.mass = mean(phi_);
      diag.phi_min = min_value(phi_);
      diag.phi_max = max_value(phi_);
      return diag;
    }
    last_why = a.why;
    dt *= 0.5;
  }
  if (last_why.find("non-finite") != std::string::npos)
    throw NumericalBlowupError("step failed at t = " + std::to_string(t_) + ": " +
                               last_why);
  throw StepFailureError("step failed at t = " + std::to_string(t_) + " after " +
                         std::to_string(cfg_.max_halvings) + " halvings: " + last_why);
}

Trajectory Simulator::run(double t_end) {
  if (t_end < t_) throw UsageError("run: t_end is before the current time");
  Trajectory traj;
  traj.config = cfg_;
  traj.kernel = &kernel_;
  traj.potential = &pot_;
  traj.snapshots.push_back({t_, phi_});

  const double thr = cfg_.newton_tol * 1e-2;
  int consecutive = 0;
  bool equilibrated = false;

  while (t_end - t_ > 1e-9 * cfg_.dt) {
    double dtt = std::min(cfg_.dt, t_end - t_);
    StepDiagnostics diag;
    try {
      diag = step(dtt);
    } catch (const Error& e) {
      traj.status = RunStatus::failed;
      traj.error = e.what();
      if (traj.snapshots.back().t != t_) traj.snapshots.push_back({t_, phi_});
      return traj;
    }
    traj.ledger.push_back(diag);
    if (step_count_ % cfg_.snapshot_every == 0)
      traj.snapshots.push_back({t_, phi_});
    consecutive = diag.dphi_vprime < thr ? consecutive + 1 : 0;
    if (consecutive >= 100) {
      equilibrated = true;
      break;
    }
  }
  if (traj.snapshots.back().t != t_) traj.snapshots.push_back({t_, phi_});
  traj.status = equilibrated ? RunStatus::equilibrated : RunStatus::running;
  return traj;
}

double Simulator::pde_residual() const {
  const Field conv = kernel_.convolve(phi_);
  Field g(phi_.grid);
  for (std::size_t k = 0; k < g.size(); ++k)
    g.values[k] = kernel_.ambient().values[k] * phi_.values[k] - conv.values[k] +
                  pot_.dF(phi_.values[k]);
  const double gm = mean(g);
  for (double& v : g.values) v -= gm;
  return l2_norm(g);
}

} // namespace nlch
