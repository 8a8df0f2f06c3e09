#include <doctest.h>

#include "nlch/errors.hpp"
#include "nlch/grid.hpp"
#include "test_util.hpp"

using namespace nlch;
using namespace nlch::test;

TEST_CASE("make_grid produces cell-centered lattices") {
  Grid g = grid1d(4);
  CHECK(g.spacing[0] == 0.25);
  CHECK(g.center(0, 0) == doctest::Approx(0.125));
  CHECK(g.center(0, 3) == doctest::Approx(0.875));
  CHECK(g.cell_volume() == doctest::Approx(0.25));

  Grid g2 = grid2d(8, 4, 2.0, 1.0);
  CHECK(g2.spacing[0] == doctest::Approx(0.25));
  CHECK(g2.spacing[1] == doctest::Approx(0.25));
  CHECK(g2.domain_volume() == doctest::Approx(2.0));
}

TEST_CASE("make_grid rejects degenerate input") {
  double len[] = {1.0};
  int zero[] = {0};
  CHECK_THROWS_AS(make_grid(1, len, zero), ConfigError);
  double neg[] = {-1.0};
  int four[] = {4};
  CHECK_THROWS_AS(make_grid(1, neg, four), ConfigError);
  CHECK_THROWS_AS(make_grid(3, len, four), ConfigError);
}

TEST_CASE("mean: constants, linear profile, summation oracle") {
  Grid g = grid1d(7);
  CHECK(mean(Field(g, 0.37)) == doctest::Approx(0.37).epsilon(1e-15));

  // cell-centered samples of x on [0,1] average to exactly 1/2
  Field fx(g);
  for (int i = 0; i < g.nx(); ++i) fx.at(i, 0) = g.center(0, i);
  CHECK(std::fabs(mean(fx) - 0.5) <= 1e-15);

  Grid g16 = grid1d(16);
  Field r = random_field(g16, 40);
  double s = 0.0;
  for (double v : r.values) s += v;
  CHECK(std::fabs(mean(r) - s / 16.0) <= 1e-14);
}

TEST_CASE("summation by parts: <div v, f> = -<v, grad f>") {
  for (const Grid& g : {grid1d(17), grid2d(12, 9, 1.5, 0.7)}) {
    Field f = random_field(g, 1);
    Field h = random_field(g, 2);
    VectorField v = grad(h); // any interior face field with zero boundary flux
    double a = inner(div(v), f);
    double b = inner(v, grad(f));
    CHECK(std::fabs(a + b) <= 1e-13 * (std::fabs(a) + std::fabs(b) + 1.0));
  }
}

TEST_CASE("grad of a constant vanishes; div(grad) is the Laplacian bit-for-bit") {
  Grid g = grid1d(16);
  VectorField v = grad(Field(g, 3.14));
  for (double x : v.xcomp) CHECK(x == 0.0);

  Field f = random_field(g, 3);
  Field lap = neumann_laplacian(f);
  Field composed = div(grad(f));
  for (std::size_t k = 0; k < lap.size(); ++k)
    CHECK(lap.values[k] == composed.values[k]);
}

TEST_CASE("Laplacian output has zero mean (discrete divergence theorem)") {
  // O(1) values on coarse grids: telescoping leaves only rounding noise
  for (const Grid& g : {grid1d(16), grid2d(8, 8)}) {
    Field f = random_field(g, 4);
    CHECK(std::fabs(mean(neumann_laplacian(f))) <= 1e-14);
  }
  Field f = random_field(grid1d(256), 5);
  CHECK(std::fabs(mean(neumann_laplacian(f))) <= 1e-11);
}

TEST_CASE("fields know their grid; mismatters are rejected") {
  Field a(grid1d(8)), b(grid1d(9));
  CHECK_THROWS_AS(inner(a, b), UsageError);
}
