#include "nlch/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlch/errors.hpp"

namespace nlch {

namespace {

/// Solves h(s) = a s + Fc'(s) = tau for s in the admissible interval;
/// h is nondecreasing (a >= 0, Fc convex), so a bisection-safeguarded Newton
/// is globally convergent.
double solve_cell(const Potential& p, double a, double tau, double guess) {
  double lo, hi;
  if (p.singular()) {
    const double w = p.hi() - p.lo();
    lo = p.lo() + 1e-13 * w;
    hi = p.hi() - 1e-13 * w;
  } else {
    // expand a bracket around the guess
    double r = 1.0 + std::fabs(guess);
    lo = guess - r;
    hi = guess + r;
    for (int i = 0; i < 200 && a * lo + p.dFc(lo) > tau; ++i) lo -= r *= 2.0;
    r = 1.0 + std::fabs(guess);
    for (int i = 0; i < 200 && a * hi + p.dFc(hi) < tau; ++i) hi += r *= 2.0;
  }
  auto h = [&](double s) { return a * s + p.dFc(s); };
  if (h(lo) >= tau) return lo;
  if (h(hi) <= tau) return hi;

  double s = std::clamp(guess, lo, hi);
  const double tol = 1e-14 * (1.0 + std::fabs(tau));
  for (int it = 0; it < 100; ++it) {
    double f = h(s) - tau;
    if (std::fabs(f) <= tol) return s;
    if (f > 0.0)
      hi = s;
    else
      lo = s;
    double dh = a + p.d2Fc(s);
    double step = dh > 0.0 ? f / dh : 0.0;
    double snew = s - step;
    if (!(snew > lo) || !(snew < hi) || step == 0.0) snew = 0.5 * (lo + hi);
    if (hi - lo < 1e-16 * (1.0 + std::fabs(s))) return 0.5 * (lo + hi);
    s = snew;
  }
  return s;
}

/// Monotone scalar root-find of mean(phi(mu)) = mass; `evaluate` fills phi
/// for a given mu and returns its mean.
template <class Eval>
double adjust_mu(const Eval& evaluate, double mu0, double mass) {
  double lo = mu0, hi = mu0;
  double mlo = evaluate(lo), mhi = mlo;
  double r = 1.0;
  for (int i = 0; i < 200 && mlo > mass; ++i) {
    lo -= r;
    r *= 2.0;
    mlo = evaluate(lo);
  }
  r = 1.0;
  for (int i = 0; i < 200 && mhi < mass; ++i) {
    hi += r;
    r *= 2.0;
    mhi = evaluate(hi);
  }
  // bisection with a secant nudge; the map is strictly increasing
  double mu = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    double m = evaluate(mu);
    if (std::fabs(m - mass) <= 1e-14 * (1.0 + std::fabs(mass))) return mu;
    if (m < mass)
      lo = mu;
    else
      hi = mu;
    if (hi - lo < 1e-15 * (1.0 + std::fabs(mu))) break;
    mu = 0.5 * (lo + hi);
  }
  evaluate(mu);
  return mu;
}

void shift_to_mass(Field& f, double mass) {
  const double d = mass - mean(f);
  for (double& v : f.values) v += d;
}

} // namespace

double stationary_residual(const Kernel& k, const Potential& p, const Field& phi,
                           double mu) {
  const Field conv = k.convolve(phi);
  double r = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i)
    r = std::max(r, std::fabs(k.ambient().values[i] * phi.values[i] -
                              conv.values[i] + p.dF(phi.values[i]) - mu));
  return r;
}

StationaryResult solve_stationary(const Kernel& k, const Potential& p, double mass,
                                  const Field& init, double tol,
                                  const StationaryOptions& opt) {
  require_same_grid(init.grid, k.grid(), "solve_stationary");
  if (p.singular() && !p.admissible(mass, 1e-12 * (p.hi() - p.lo())))
    throw UsageError("solve_stationary: mass must lie strictly inside the "
                     "admissible interval");
  if (std::fabs(mean(init) - mass) > 1e-10 * (1.0 + std::fabs(mass)))
    throw UsageError("solve_stationary: init must have mean equal to the mass");
  for (double v : init.values)
    if (!p.admissible(v))
      throw UsageError("solve_stationary: init is not admissible");

  const Field& a = k.ambient();
  auto mu_and_residual = [&](const Field& phi, double& mu) {
    const Field conv = k.convolve(phi);
    Field g(phi.grid);
    for (std::size_t i = 0; i < g.size(); ++i)
      g.values[i] = a.values[i] * phi.values[i] - conv.values[i] +
                    p.dF(phi.values[i]);
    mu = mean(g);
    double r = 0.0;
    for (double v : g.values) r = std::max(r, std::fabs(v - mu));
    return r;
  };

  StationaryResult best;
  best.phi_star = init;
  best.phi_star.tag = FieldTag::order_parameter;
  double mu = 0.0;
  best.residual = mu_and_residual(best.phi_star, mu);
  best.mu_star = mu;

  Field phi = best.phi_star;
  double res = best.residual;
  double omega = opt.damping;
  int outer = 1;
  for (; outer <= opt.max_outer && res > tol; ++outer) {
    // freeze the nonlocal term and the expansive slope
    const Field conv = k.convolve(phi);
    Field rhs(phi.grid);
    for (std::size_t i = 0; i < rhs.size(); ++i)
      rhs.values[i] = conv.values[i] - p.dFe(phi.values[i]);

    Field cand(phi.grid);
    auto eval_mu = [&](double m) {
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand.values[i] =
            solve_cell(p, a.values[i], m + rhs.values[i], phi.values[i]);
      return mean(cand);
    };
    adjust_mu(eval_mu, mu, mass);

    Field damped = phi;
    for (std::size_t i = 0; i < damped.size(); ++i)
      damped.values[i] = (1.0 - omega) * phi.values[i] + omega * cand.values[i];
    double mu_d = 0.0;
    double res_d = mu_and_residual(damped, mu_d);
    if (res_d > res && omega > 1.0 / 64.0) {
      omega *= 0.5;
      for (std::size_t i = 0; i < damped.size(); ++i)
        damped.values[i] = (1.0 - omega) * phi.values[i] + omega * cand.values[i];
      res_d = mu_and_residual(damped, mu_d);
    } else if (res_d < res) {
      omega = std::min(opt.damping, 1.5 * omega);
    }
    phi = std::move(damped);
    res = res_d;
    mu = mu_d;
    if (res < best.residual) {
      best.phi_star = phi;
      best.residual = res;
      best.mu_star = mu;
    }
  }

  shift_to_mass(best.phi_star, mass);
  best.residual = mu_and_residual(best.phi_star, best.mu_star);
  best.iterations = outer;
  best.converged = best.residual <= tol;
  return best;
}

StationaryResult degenerate_equilibrium(const Kernel& k, double mass,
                                        const Field& init, double tol,
                                        const StationaryOptions& opt) {
  require_same_grid(init.grid, k.grid(), "degenerate_equilibrium");
  if (!(mass > 0.0 && mass < 1.0))
    throw UsageError("degenerate_equilibrium: mass must lie in (0,1)");
  for (double v : init.values)
    if (!(v > 0.0 && v < 1.0))
      throw UsageError("degenerate_equilibrium: init values must lie in (0,1)");

  const Field& a = k.ambient();
  Field phi = init;
  phi.tag = FieldTag::order_parameter;

  Field w(phi.grid), cand(phi.grid);
  double mu = std::log(mass / (1.0 - mass));
  auto fixed_point = [&](const Field& f, double& mu_out) {
    const Field conv = k.convolve(f);
    for (std::size_t i = 0; i < w.size(); ++i)
      w.values[i] = a.values[i] - 2.0 * conv.values[i];
    auto eval_mu = [&](double m) {
      for (std::size_t i = 0; i < cand.size(); ++i)
        cand.values[i] = 1.0 / (std::exp(w.values[i] - m) + 1.0);
      return mean(cand);
    };
    mu_out = adjust_mu(eval_mu, mu_out, mass);
    double r = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      r = std::max(r, std::fabs(f.values[i] - cand.values[i]));
    return r;
  };

  StationaryResult best;
  best.phi_star = phi;
  best.residual = fixed_point(phi, mu);
  best.mu_star = mu;

  double res = best.residual;
  double omega = opt.damping;
  int outer = 1;
  for (; outer <= opt.max_outer && res > tol; ++outer) {
    Field damped = phi;
    for (std::size_t i = 0; i < damped.size(); ++i)
      damped.values[i] = (1.0 - omega) * phi.values[i] + omega * cand.values[i];
    double mu_d = mu;
    double res_d = fixed_point(damped, mu_d);
    if (res_d > res && omega > 1.0 / 64.0) {
      omega *= 0.5;
      for (std::size_t i = 0; i < damped.size(); ++i)
        damped.values[i] = (1.0 - omega) * phi.values[i] + omega * cand.values[i];
      res_d = fixed_point(damped, mu_d);
    } else if (res_d < res) {
      omega = std::min(opt.damping, 1.5 * omega);
    }
    phi = std::move(damped);
    res = res_d;
    mu = mu_d;
    if (res < best.residual) {
      best.phi_star = phi;
      best.residual = res;
      best.mu_star = mu;
    }
  }

  shift_to_mass(best.phi_star, mass);
  best.residual = fixed_point(best.phi_star, best.mu_star);
  best.iterations = outer;
  best.converged = best.residual <= tol;
  return best;
}

} // namespace nlch
