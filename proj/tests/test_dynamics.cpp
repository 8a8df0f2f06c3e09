#include <doctest.h>

#include <cmath>

#include "nlch/analysis.hpp"
#include "nlch/dynamics.hpp"
#include "nlch/errors.hpp"
#include "test_util.hpp"

using namespace nlch;
using namespace nlch::test;

namespace {

Kernel gaussian_kernel(const Grid& g, double l1, double xi) {
  KernelSpec spec;
  spec.type = KernelSpec::Type::gaussian;
  spec.xi = xi;
  spec.cj = 1.0;
  spec.normalize = true;
  Kernel k = build_kernel(spec, g);
  if (l1 == 1.0) return k;
  KernelSpec scaled = spec;
  scaled.normalize = false;
  scaled.cj = l1 * k.spec().cj;
  return build_kernel(scaled, g);
}

ModelConfig config_for(Variant v, double dt) {
  ModelConfig mc;
  mc.variant = v;
  mc.dt = dt;
  if (v == Variant::B) mc.alpha = 0.1;
  return mc;
}

Field cosine_ic(const Grid& g, double mean, double amp, int mode = 1) {
  Field f(g, mean, FieldTag::order_parameter);
  for (int i = 0; i < g.nx(); ++i)
    f.at(i, 0) += amp * std::cos(M_PI * mode * g.center(0, i) / g.length[0]);
  return f;
}

} // namespace

TEST_CASE("admissible constants are fixed points of one step") {
  Grid g = grid1d(48);

  SUBCASE("variant A, double well") {
    Kernel k = gaussian_kernel(g, 1.0, 100.0);
    Potential p = Potential::double_well();
    for (double c : {-0.4, 0.1, 0.8}) {
      Simulator sim(config_for(Variant::A, 1e-3), k, p, Field(g, c));
      sim.step();
      double dev = 0.0;
      for (double v : sim.phi().values) dev = std::max(dev, std::fabs(v - c));
      CHECK(dev <= 1e-12);
    }
  }
  SUBCASE("variant B, logarithmic") {
    Kernel k = gaussian_kernel(g, 3.0, 100.0);
    Potential p = Potential::logarithmic(1.5);
    for (double c : {-0.5, 0.2}) {
      Simulator sim(config_for(Variant::B, 1e-3), k, p, Field(g, c));
      sim.step();
      double dev = 0.0;
      for (double v : sim.phi().values) dev = std::max(dev, std::fabs(v - c));
      CHECK(dev <= 1e-12);
    }
  }
  SUBCASE("variant C at the symmetric mass (w vanishes identically)") {
    Kernel k = gaussian_kernel(g, 4.0, 100.0);
    Potential p = Potential::entropy();
    Simulator sim(config_for(Variant::C, 1e-3), k, p, Field(g, 0.5));
    sim.step();
    double dev = 0.0;
    for (double v : sim.phi().values) dev = std::max(dev, std::fabs(v - 0.5));
    CHECK(dev <= 1e-12);
  }
  SUBCASE("variant D at zero mean") {
    Kernel k = gaussian_kernel(g, 1.0, 100.0);
    Potential p = Potential::double_well();
    Simulator sim(config_for(Variant::D, 1e-3), k, p, Field(g, 0.0));
    sim.step();
    CHECK(max_abs(sim.phi()) <= 1e-12);
  }
}

TEST_CASE("initialization: mu at t = 0 and admissibility gates") {
  Grid g = grid1d(32);
  Kernel k = gaussian_kernel(g, 1.0, 100.0);

  SUBCASE("constant state gives the uniform chemical potential F'(c)") {
    Potential p = Potential::double_well();
    Simulator sim(config_for(Variant::A, 1e-3), k, p, Field(g, 0.1));
    const double expect = p.dF(0.1);
    for (double v : sim.mu().values)
      CHECK(std::fabs(v - expect) <= 1e-12);
    CHECK(sim.mass() == doctest::Approx(0.1).epsilon(1e-15));
  }
  SUBCASE("variant B rejects data touching the endpoints") {
    Potential p = Potential::logarithmic(1.5);
    Field bad(g, 0.0);
    bad.values[7] = 1.0;
    CHECK_THROWS_AS(Simulator(config_for(Variant::B, 1e-3), k, p, bad),
                    InitialDataError);
  }
  SUBCASE("variant C takes a cosine around the half filling") {
    Kernel kc = gaussian_kernel(g, 4.0, 100.0);
    Potential p = Potential::entropy();
    Simulator sim(config_for(Variant::C, 1e-3), kc, p, cosine_ic(g, 0.5, 0.1));
    CHECK(sim.mass() == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("variant B with zero viscosity is rejected") {
    Potential p = Potential::logarithmic(1.5);
    ModelConfig mc = config_for(Variant::B, 1e-3);
    mc.alpha = 0.0;
    CHECK_THROWS_AS(Simulator(mc, k, p, Field(g, 0.0)), ConfigError);
  }
  SUBCASE("variant C needs the entropy potential") {
    Potential p = Potential::double_well();
    CHECK_THROWS_AS(Simulator(config_for(Variant::C, 1e-3), k, p, Field(g, 0.5)),
                    ConfigError);
  }
}

TEST_CASE("one step conserves the mean to rounding") {
  Grid g = grid1d(64);
  Kernel k = gaussian_kernel(g, 10.0, 100.0);
  Potential p = Potential::double_well();
  Field phi0 = random_field(g, 77, -0.5, 0.7);
  Simulator sim(config_for(Variant::A, 1e-4), k, p, phi0);
  const double m0 = sim.mass();
  auto d = sim.step();
  CHECK(std::fabs(d.mass - m0) <= 1e-13);
  CHECK(d.dissipation_increment >= 0.0);
  CHECK(d.dt_used == 1e-4);
}

TEST_CASE("variant A: discrete energy decrease from random data") {
  Grid g = grid1d(64);
  Kernel k = gaussian_kernel(g, 10.0, 200.0);
  Potential p = Potential::double_well();
  Field phi0 = random_field(g, 5, -0.8, 0.9);
  Simulator sim(config_for(Variant::A, 2e-4), k, p, phi0);
  const double tol = 1e-12 * std::max(1.0, std::fabs(sim.energy()));
  double prev = sim.energy();
  for (int n = 0; n < 60; ++n) {
    auto d = sim.step();
    CHECK(d.energy_after <= prev + tol);
    CHECK(d.dissipation_increment >= 0.0);
    prev = d.energy_after;
  }
}

TEST_CASE("variant B: interior preservation with the logarithmic barrier") {
  Grid g = grid1d(64);
  Kernel k = gaussian_kernel(g, 3.0, 200.0);
  Potential p = Potential::logarithmic(1.5);
  ModelConfig mc = config_for(Variant::B, 5e-4);
  Field phi0 = random_field(g, 9, -0.6, 0.6);
  Simulator sim(mc, k, p, phi0);
  double prev = sim.energy();
  for (int n = 0; n < 80; ++n) {
    auto d = sim.step();
    CHECK(d.phi_max < 1.0 - mc.interior_margin / 2);
    CHECK(d.phi_min > -1.0 + mc.interior_margin / 2);
    CHECK(d.energy_after <= prev + 1e-12 * std::max(1.0, std::fabs(prev)));
    prev = d.energy_after;
  }
  CHECK(std::fabs(mean(sim.phi()) - mean(phi0)) <= 1e-12);
}

TEST_CASE("variant C: positivity and mass under the degenerate flux") {
  Grid g = grid1d(64);
  Kernel k = gaussian_kernel(g, 4.0, 200.0);
  Potential p = Potential::entropy();
  Simulator sim(config_for(Variant::C, 2e-4), k, p, cosine_ic(g, 0.5, 0.3));
  for (int n = 0; n < 100; ++n) {
    auto d = sim.step();
    CHECK(d.phi_min > 0.0);
    CHECK(d.phi_max < 1.0);
  }
  CHECK(std::fabs(mean(sim.phi()) - 0.5) <= 1e-12);
}

TEST_CASE("variant C: spatially varying mobility keeps the same invariants") {
  Grid g = grid1d(48);
  Kernel k = gaussian_kernel(g, 4.0, 200.0);
  Potential p = Potential::entropy();
  ModelConfig mc = config_for(Variant::C, 2e-4);
  Field b0(g, 1.0);
  for (int i = 0; i < g.nx(); ++i)
    b0.at(i, 0) = 1.0 + 0.5 * std::cos(2 * M_PI * g.center(0, i));
  mc.mobility_field = b0;
  Simulator sim(mc, k, p, cosine_ic(g, 0.5, 0.2));
  for (int n = 0; n < 50; ++n) {
    auto d = sim.step();
    CHECK(d.phi_min > 0.0);
    CHECK(d.phi_max < 1.0);
  }
  CHECK(std::fabs(mean(sim.phi()) - 0.5) <= 1e-12);
}

TEST_CASE("self-convergence: first order in dt (Richardson triplets)") {
  Grid g = grid1d(48);
  const double T = 0.02;

  auto final_phi = [&](Variant v, const Kernel& k, const Potential& p,
                       const Field& ic, double dt) {
    ModelConfig mc = config_for(v, dt);
    mc.snapshot_every = 1 << 28;
    mc.newton_tol = 1e-12;
    Simulator sim(mc, k, p, ic);
    sim.run(T);
    return sim.phi();
  };
  auto ratio_for = [&](Variant v, const Kernel& k, const Potential& p,
                       const Field& ic) {
    const double dt = 1e-3;
    Field a = final_phi(v, k, p, ic, dt);
    Field b = final_phi(v, k, p, ic, dt / 2);
    Field c = final_phi(v, k, p, ic, dt / 4);
    Field e1 = a, e2 = b;
    for (std::size_t i = 0; i < e1.size(); ++i) {
      e1.values[i] -= b.values[i];
      e2.values[i] -= c.values[i];
    }
    return l2_norm(e1) / l2_norm(e2);
  };

  // stable-regime data (F'' > 0 across the range): inside the spinodal the
  // trajectory sensitivity swamps the dt expansion and the ratio is noise
  SUBCASE("variant A") {
    Kernel k = gaussian_kernel(g, 1.0, 200.0);
    double r = ratio_for(Variant::A, k, Potential::double_well(),
                         cosine_ic(g, 0.75, 0.1));
    CHECK(r >= 1.7);
    CHECK(r <= 2.3);
  }
  SUBCASE("variant B") {
    Kernel k = gaussian_kernel(g, 3.0, 200.0);
    double r = ratio_for(Variant::B, k, Potential::logarithmic(1.5),
                         cosine_ic(g, 0.7, 0.1));
    CHECK(r >= 1.7);
    CHECK(r <= 2.3);
  }
  SUBCASE("variant C") {
    Kernel k = gaussian_kernel(g, 1.0, 200.0);
    double r = ratio_for(Variant::C, k, Potential::entropy(),
                         cosine_ic(g, 0.5, 0.2));
    CHECK(r >= 1.7);
    CHECK(r <= 2.3);
  }
  SUBCASE("variant D") {
    Kernel k = gaussian_kernel(g, 1.0, 200.0);
    double r = ratio_for(Variant::D, k, Potential::double_well(),
                         cosine_ic(g, 0.0, 0.4));
    CHECK(r >= 1.7);
    CHECK(r <= 2.3);
  }
}

TEST_CASE("run: constant data equilibrates with identical snapshots") {
  Grid g = grid1d(32);
  Kernel k = gaussian_kernel(g, 1.0, 100.0);
  Potential p = Potential::double_well();
  ModelConfig mc = config_for(Variant::A, 1e-3);
  mc.snapshot_every = 10;
  Simulator sim(mc, k, p, Field(g, 0.25));
  Trajectory traj = sim.run(1.0);
  CHECK(traj.status == RunStatus::equilibrated);
  CHECK(traj.ledger.size() == 100); // terminates after 100 quiet steps
  for (const auto& s : traj.snapshots)
    for (double v : s.phi.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-13));

  CHECK_THROWS_AS(sim.run(sim.t() - 1.0), UsageError);
}

TEST_CASE("pde_residual: zero on constants, matches a direct recomputation") {
  Grid g = grid1d(40);
  Kernel k = gaussian_kernel(g, 1.0, 100.0);
  Potential p = Potential::double_well();
  Simulator c(config_for(Variant::A, 1e-3), k, p, Field(g, 0.3));
  CHECK(c.pde_residual() <= 1e-14);

  Field phi0 = random_field(g, 31, -0.7, 0.7);
  Simulator r(config_for(Variant::A, 1e-3), k, p, phi0);
  // independent recomputation of ||g - <g>||_H
  Field conv = k.convolve(r.phi());
  std::vector<double> gv(phi0.size());
  for (std::size_t i = 0; i < gv.size(); ++i)
    gv[i] = k.ambient().values[i] * r.phi().values[i] - conv.values[i] +
            p.dF(r.phi().values[i]);
  double m = kahan_sum(gv) / static_cast<double>(gv.size());
  double acc = 0.0;
  for (double v : gv) acc += (v - m) * (v - m);
  double expect = std::sqrt(acc * g.cell_volume());
  CHECK(r.pde_residual() == doctest::Approx(expect).epsilon(1e-13));
  CHECK(r.pde_residual() > 0.0);
}

TEST_CASE("step failures surface as typed errors with halving exhausted") {
  Grid g = grid1d(24);
  Kernel k = gaussian_kernel(g, 3.0, 100.0);
  Potential p = Potential::logarithmic(1.5);
  ModelConfig mc = config_for(Variant::B, 1e9); // absurd step, Newton starves
  mc.newton_max = 2;
  mc.max_halvings = 3;
  Simulator sim(mc, k, p, cosine_ic(g, 0.0, 0.5));
  CHECK_THROWS_AS(sim.step(), StepFailureError);

  // run() attaches the partial trajectory instead of throwing
  Simulator sim2(mc, k, p, cosine_ic(g, 0.0, 0.5));
  Trajectory traj = sim2.run(1e10);
  CHECK(traj.status == RunStatus::failed);
  CHECK(!traj.error.empty());
}

TEST_CASE("a run equilibrates and the final state solves the stationary problem") {
  Grid g = grid1d(48);
  Kernel k = gaussian_kernel(g, 3.0, 300.0);
  Potential p = Potential::logarithmic(1.5);
  ModelConfig mc = config_for(Variant::B, 2e-3);
  mc.newton_tol = 1e-8;
  mc.snapshot_every = 100;
  Simulator sim(mc, k, p, cosine_ic(g, 0.0, 0.3));
  Trajectory traj = sim.run(400.0);
  CHECK(traj.status == RunStatus::equilibrated);
  CHECK(sim.pde_residual() < 1e-6);
}
