#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "nlch/errors.hpp"
#include "nlch/spectral.hpp"
#include "test_util.hpp"

using namespace nlch;
using namespace nlch::test;

namespace {

Field cosine_mode(const Grid& g, int kx) {
  Field f(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      f.at(i, j) = std::cos(M_PI * kx * g.center(0, i) / g.length[0]);
  return f;
}

/// Dense matrix of the stencil Laplacian, assembled column by column.
Eigen::MatrixXd dense_laplacian(const Grid& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    Field e(g);
    e.values[static_cast<std::size_t>(c)] = 1.0;
    Field col = neumann_laplacian(e);
    for (Eigen::Index r = 0; r < n; ++r)
      A(r, c) = col.values[static_cast<std::size_t>(r)];
  }
  return A;
}

} // namespace

TEST_CASE("cosine modes are exact eigenfields of the stencil") {
  Grid g = grid1d(16, 2.0);
  const double h = g.spacing[0];
  Field f = cosine_mode(g, 1);
  Field lap = neumann_laplacian(f);
  const double lam = -(2.0 / (h * h)) * (1.0 - std::cos(M_PI * h / g.length[0]));
  for (std::size_t k = 0; k < f.size(); ++k)
    CHECK(lap.values[k] == doctest::Approx(lam * f.values[k]).epsilon(1e-11));

  // dense eigendecomposition oracle: the sampled cosine solves the stencil
  // eigenproblem with the same eigenvalue
  Eigen::MatrixXd A = dense_laplacian(g);
  Eigen::VectorXd v(g.size());
  for (std::size_t k = 0; k < f.size(); ++k) v(static_cast<Eigen::Index>(k)) = f.values[k];
  Eigen::VectorXd Av = A * v;
  CHECK((Av - lam * v).norm() <= 1e-10 * Av.norm());
}

TEST_CASE("inverse Neumann Laplacian: eigenfield, zero, and mean gate") {
  Grid g = grid1d(32, 1.0);
  Spectral sp(g);
  Field f = cosine_mode(g, 1);
  const double h = g.spacing[0];
  const double lam1 = (2.0 / (h * h)) * (1.0 - std::cos(M_PI * h / g.length[0]));
  CHECK(sp.lambda1() == doctest::Approx(lam1).epsilon(1e-14));

  Field u = sp.inv_neumann_laplacian(f);
  for (std::size_t k = 0; k < u.size(); ++k)
    CHECK(u.values[k] == doctest::Approx(f.values[k] / lam1).epsilon(1e-11));

  Field zero(g);
  Field uz = sp.inv_neumann_laplacian(zero);
  for (double v : uz.values) CHECK(std::fabs(v) <= 1e-15);

  CHECK_THROWS_AS(sp.inv_neumann_laplacian(Field(g, 1.0)), MeanConstraintError);
}

TEST_CASE("round trip: Lap(N f) = -f for zero-mean f") {
  for (const Grid& g : {grid1d(64), grid2d(64, 64), grid2d(256, 256)}) {
    Spectral sp(g);
    Field f = zero_mean(random_field(g, 7));
    Field u = sp.inv_neumann_laplacian(f);
    Field lap = neumann_laplacian(u);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < f.size(); ++k) {
      num = std::max(num, std::fabs(lap.values[k] + f.values[k]));
      den = std::max(den, std::fabs(f.values[k]));
    }
    CHECK(num <= 1e-12 * den * (1 + g.size() / 4096.0));
  }
}

TEST_CASE("DCT solve agrees with a dense solve of the stencil system") {
  for (const Grid& g : {grid1d(24), grid2d(24, 32, 1.0, 1.5)}) {
    Spectral sp(g);
    Field f = zero_mean(random_field(g, 9));
    Field u = sp.inv_neumann_laplacian(f);

    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd A = -dense_laplacian(g); // A_N
    // pin the constant nullspace: (A_N + ones/n) u = f has the zero-mean root
    A += Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
    Eigen::VectorXd rhs(n);
    for (Eigen::Index k = 0; k < n; ++k) rhs(k) = f.values[static_cast<std::size_t>(k)];
    Eigen::VectorXd ud = A.partialPivLu().solve(rhs);
    double dev = 0.0;
    for (Eigen::Index k = 0; k < n; ++k)
      dev = std::max(dev, std::fabs(ud(k) - u.values[static_cast<std::size_t>(k)]));
    CHECK(dev <= 1e-11 * ud.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("Helmholtz solve inverts (sigma + kappa A_N)") {
  Grid g = grid2d(20, 16);
  Spectral sp(g);
  Field rhs = random_field(g, 11);
  const double sigma = 3.0, kappa = 0.7;
  Field u = sp.solve_helmholtz(rhs, sigma, kappa);
  Field lap = neumann_laplacian(u);
  for (std::size_t k = 0; k < u.size(); ++k) {
    double lhs = sigma * u.values[k] - kappa * lap.values[k];
    CHECK(lhs == doctest::Approx(rhs.values[k]).epsilon(1e-10));
  }
}

TEST_CASE("vprime norm: constants, eigenfields, zero, embedding") {
  Grid g = grid1d(48, 1.0);
  Spectral sp(g);
  CHECK(sp.vprime_norm(Field(g, -0.75)) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(sp.vprime_norm(Field(g)) == 0.0);

  Field f = cosine_mode(g, 1);
  CHECK(sp.vprime_norm(f) ==
        doctest::Approx(l2_norm(f) / std::sqrt(sp.lambda1())).epsilon(1e-12));

  // H embeds into V' with the grid constant sqrt(1/lambda1 + 1/|Omega|)
  const double c_embed = std::sqrt(1.0 / sp.lambda1() + 1.0 / g.domain_volume());
  for (int seed = 0; seed < 5; ++seed) {
    Field r = random_field(g, 100 + seed);
    CHECK(sp.vprime_norm(r) <= c_embed * l2_norm(r) * (1.0 + 1e-12));
  }
}

TEST_CASE("free functions route through the per-grid cache") {
  Grid g = grid1d(20);
  Field f = zero_mean(random_field(g, 13));
  Field a = inv_neumann_laplacian(f);
  Spectral sp(g);
  Field b = sp.inv_neumann_laplacian(f);
  for (std::size_t k = 0; k < a.size(); ++k) CHECK(a.values[k] == b.values[k]);
  CHECK(vprime_norm(f) == sp.vprime_norm(f));
}
