#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "nlch/errors.hpp"
#include "nlch/potential.hpp"
#include "test_util.hpp"

using namespace nlch;
using namespace nlch::test;

TEST_CASE("closed-form values at reference points") {
  Potential dw = Potential::double_well();
  auto v = dw.eval(1.0);
  CHECK(v.F == 0.0);
  CHECK(v.dF == 0.0);
  CHECK(v.d2F == 8.0);

  Potential lg = Potential::logarithmic(1.0);
  auto w = lg.eval(0.0);
  CHECK(w.F == 0.0);
  CHECK(w.dF == 0.0);
  CHECK(w.d2F == doctest::Approx(0.0)); // 2 - 2*lambda

  Potential en = Potential::entropy();
  auto u = en.eval(0.5);
  CHECK(u.F == doctest::Approx(-std::log(2.0)).epsilon(1e-15));
  CHECK(u.dF == doctest::Approx(0.0));
  CHECK(u.d2F == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("singular variants reject endpoint and exterior evaluation") {
  Potential lg = Potential::logarithmic(1.5);
  CHECK_THROWS_AS(lg.eval(1.0), PotentialDomainError);
  CHECK_THROWS_AS(lg.eval(-1.0 + 5e-15), PotentialDomainError);
  CHECK_THROWS_AS(lg.eval(1.5), PotentialDomainError);
  CHECK_NOTHROW(lg.eval(1.0 - 1e-13));

  Potential en = Potential::entropy();
  CHECK_THROWS_AS(en.eval(0.0), PotentialDomainError);
  CHECK_THROWS_AS(en.eval(1.0), PotentialDomainError);

  Potential dw = Potential::double_well();
  CHECK_NOTHROW(dw.eval(100.0));
  CHECK_THROWS_AS(dw.eval(std::nan("")), PotentialDomainError);

  try {
    lg.eval(2.0);
  } catch (const PotentialDomainError& e) {
    CHECK(e.value() == 2.0);
  }
}

TEST_CASE("derivatives agree with centered differences") {
  // near singular endpoints the truncation term h^2 F'''/6 ~ h^2/d^3 takes
  // over, so the lattice stays 0.05 away from them
  const double h = 1e-5;
  for (const Potential& p :
       {Potential::double_well(), Potential::logarithmic(1.2), Potential::entropy()}) {
    const double lo = p.singular() ? p.lo() + 0.05 : -3.0;
    const double hi = p.singular() ? p.hi() - 0.05 : 3.0;
    for (int i = 0; i <= 200; ++i) {
      double s = lo + (hi - lo) * i / 200.0;
      double fd1 = (p.F(s + h) - p.F(s - h)) / (2 * h);
      double fd2 = (p.dF(s + h) - p.dF(s - h)) / (2 * h);
      CHECK(std::fabs(p.dF(s) - fd1) <= 2e-6 * (1.0 + std::fabs(p.dF(s))));
      CHECK(std::fabs(p.d2F(s) - fd2) <= 2e-6 * (1.0 + std::fabs(p.d2F(s))));
    }
  }
}

TEST_CASE("convex splitting sums to F and keeps the convex part convex") {
  for (const Potential& p :
       {Potential::double_well(), Potential::logarithmic(1.7), Potential::entropy()}) {
    ConvexSplit split = convex_split(p);
    const double lo = p.singular() ? p.lo() + 1e-6 : -4.0;
    const double hi = p.singular() ? p.hi() - 1e-6 : 4.0;
    for (int i = 0; i <= 500; ++i) {
      double s = lo + (hi - lo) * i / 500.0;
      CHECK(std::fabs(split.convex.F(s) + split.expansive.F(s) - p.F(s)) <= 1e-14 *
                (1.0 + std::fabs(p.F(s))));
      CHECK(split.convex.d2F(s) >= 0.0);
    }
  }

  Potential dw = Potential::double_well();
  CHECK(dw.Fc(1.0) + dw.Fe(1.0) == 0.0); // 2 - 2
  Potential lg = Potential::logarithmic(1.0);
  CHECK(lg.d2Fc(0.5) == doctest::Approx(2.0 / (1.0 - 0.25)));
  CHECK(lg.d2Fc(0.0) == doctest::Approx(2.0));
  Potential en = Potential::entropy();
  CHECK(en.Fe(0.3) == 0.0);
  CHECK(en.d2Fc(0.5) == doctest::Approx(4.0));
}

TEST_CASE("Fc' is strictly increasing on the admissible interval") {
  for (const Potential& p :
       {Potential::double_well(), Potential::logarithmic(1.5), Potential::entropy()}) {
    const double lo = p.singular() ? p.lo() + 1e-4 : -3.0;
    const double hi = p.singular() ? p.hi() - 1e-4 : 3.0;
    double prev = p.dFc(lo);
    for (int i = 1; i <= 300; ++i) {
      double s = lo + (hi - lo) * i / 300.0;
      double cur = p.dFc(s);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("hypothesis audit on the double well") {
  Grid g = grid1d(64);
  KernelSpec spec;
  spec.xi = 100.0;
  spec.normalize = true;
  Kernel k = build_kernel(spec, g);
  Potential p = Potential::double_well();
  HypothesisReport rep = check_hypotheses(p, k, 0.0);

  // inf F'' = -4 at s = 0; the lattice reproduces it
  const double min_a = min_value(k.ambient());
  CHECK(rep.c0 == doctest::Approx(min_a - 4.0).epsilon(1e-4));
  CHECK(rep.h2 == (rep.c0 > 0.0));
  CHECK_FALSE(rep.h2); // a normalized kernel cannot beat -4

  // F >= s^2 - c2 with c2 = 5/4; the margin asks ||J||_1 < 2
  CHECK(rep.c1 == 1.0);
  CHECK(rep.c2 == doctest::Approx(1.25).epsilon(1e-4));
  CHECK(rep.c1_margin == doctest::Approx(1.0 - 0.5 * k.l1_norm()).epsilon(1e-12));
  CHECK(rep.h3);

  // |F'|^p <= c3|F| + c4 holds up to the cubic/quartic balance p = 4/3
  CHECK(rep.h4);
  CHECK(rep.h4_p >= 1.2);
  CHECK(rep.h4_p <= 1.4);

  // F'' grows like 12 s^2
  CHECK(rep.h5);
  CHECK(rep.h5_q == doctest::Approx(1.0));

  CHECK(rep.kernel_l1 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hypothesis audit on the logarithmic potential") {
  Grid g = grid1d(64);
  KernelSpec spec;
  spec.xi = 100.0;
  spec.normalize = true;
  Kernel k = build_kernel(spec, g);
  const double beta = min_value(k.ambient());
  const double alpha = 0.1;

  Potential p = Potential::logarithmic(1.5);
  HypothesisReport rep = check_hypotheses(p, k, alpha);

  // Fe'' = -2 lambda exactly; the margin is alpha + beta - 2 lambda
  CHECK(rep.h10_margin == doctest::Approx(alpha + beta - 3.0).epsilon(1e-12));
  CHECK(rep.h10 == (alpha + beta > 3.0));
  CHECK(rep.h10_f1_min == doctest::Approx(2.0).epsilon(1e-4));

  // the singular slope defeats H4 for every p
  CHECK_FALSE(rep.h4);

  // F' s >= F - C_F with a finite sampled constant
  CHECK(std::isfinite(rep.lbbb_cf));

  // H10 satisfied once the kernel is strong enough
  KernelSpec strong = spec;
  strong.normalize = false;
  strong.cj = 8.0 * std::sqrt(100.0 / M_PI); // ||J||_1 = 8, boundary ambient = 4
  Kernel ks = build_kernel(strong, g);
  HypothesisReport rs = check_hypotheses(p, ks, alpha);
  CHECK(rs.h10_margin == doctest::Approx(alpha + min_value(ks.ambient()) - 3.0)
                             .epsilon(1e-12));
  CHECK(rs.h10);
}

TEST_CASE("custom potentials interpolate a tabulated double well") {
  namespace fs = std::filesystem;
  fs::path tmp = fs::temp_directory_path() / "nlch_potential_table.txt";
  {
    std::ofstream out(tmp);
    out << "# s F dF d2F\n";
    Potential dw = Potential::double_well();
    for (int i = 0; i <= 400; ++i) {
      double s = -2.0 + 4.0 * i / 400.0;
      auto v = dw.eval(s);
      out.precision(17);
      out << s << " " << v.F << " " << v.dF << " " << v.d2F << "\n";
    }
  }
  Potential p = Potential::custom_from_file(tmp);
  Potential dw = Potential::double_well();
  for (double s : {-1.73, -0.4, 0.133, 0.9, 1.61}) {
    CHECK(p.F(s) == doctest::Approx(dw.F(s)).epsilon(1e-6));
    CHECK(p.dF(s) == doctest::Approx(dw.dF(s)).epsilon(1e-6));
  }
  // split is convexified by the tabulated curvature minimum
  for (double s : {-1.9, -1.0, 0.0, 0.5, 1.9}) CHECK(p.d2Fc(s) >= -1e-9);
  CHECK_THROWS_AS(p.eval(2.5), PotentialDomainError);
  fs::remove(tmp);
}

TEST_CASE("lambda must be a finite nonnegative number") {
  CHECK_THROWS_AS(Potential::logarithmic(-1.0), ConfigError);
  CHECK_NOTHROW(Potential::logarithmic(0.5)); // convex-dominated regime is legal
}
