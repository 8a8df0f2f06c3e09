#include "nlch/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "nlch/errors.hpp"

namespace nlch {

namespace {
// FFTW plan creation is not thread-safe; execution via the new-array API is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
} // namespace

Spectral::Spectral(const Grid& g) : grid_(g) {
  const int nx = g.nx(), ny = g.ny();
  lamx_.resize(nx);
  lamy_.resize(ny);
  const double hx = g.spacing[0], hy = g.spacing[1];
  for (int k = 0; k < nx; ++k)
    lamx_[k] = (2.0 / (hx * hx)) * (1.0 - std::cos(M_PI * k / nx));
  for (int k = 0; k < ny; ++k)
    lamy_[k] = (2.0 / (hy * hy)) * (1.0 - std::cos(M_PI * k / ny));
  lambda1_ = lamx_.size() > 1 ? lamx_[1] : 0.0;
  if (ny > 1) lambda1_ = std::min(lambda1_, lamy_[1]);
  if (nx == 1 && ny == 1) lambda1_ = 1.0; // single cell: no nonzero modes
  norm_ = 4.0 * nx * ny;

  std::vector<double> a(g.size()), b(g.size());
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_r2r_2d(ny, nx, a.data(), b.data(), FFTW_REDFT10,
                               FFTW_REDFT10, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_inv_ = fftw_plan_r2r_2d(ny, nx, a.data(), b.data(), FFTW_REDFT01,
                               FFTW_REDFT01, FFTW_ESTIMATE | FFTW_UNALIGNED);
}

Spectral::~Spectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void Spectral::forward(const Field& f, std::vector<double>& coeff) const {
  coeff.resize(f.size());
  // FFTW r2r does not modify its input, but the API wants a non-const pointer.
  fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_),
                   const_cast<double*>(f.values.data()), coeff.data());
}

void Spectral::inverse(const std::vector<double>& coeff, Field& out) const {
  fftw_execute_r2r(static_cast<fftw_plan>(plan_inv_),
                   const_cast<double*>(coeff.data()), out.values.data());
  const double s = 1.0 / norm_;
  for (double& v : out.values) v *= s;
}

Field Spectral::apply_inverse(const Field& f) const {
  require_same_grid(f.grid, grid_, "inverse Neumann Laplacian");
  std::vector<double> c;
  forward(f, c);
  const int nx = grid_.nx(), ny = grid_.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (i == 0 && j == 0)
        c[k] = 0.0;
      else
        c[k] /= eigenvalue(i, j);
    }
  Field u(grid_, 0.0, f.tag);
  inverse(c, u);
  return u;
}

Field Spectral::inv_neumann_laplacian(const Field& f) const {
  const double m = mean(f);
  const double tol = 1e-10 * (l2_norm(f) + 1.0);
  if (std::fabs(m) > tol)
    throw MeanConstraintError(
        "inv_neumann_laplacian: right-hand side has mean " + std::to_string(m) +
        " (tolerance " + std::to_string(tol) + "); constants are not in V0'");
  return apply_inverse(f);
}

Field Spectral::solve_helmholtz(const Field& rhs, double sigma, double kappa) const {
  require_same_grid(rhs.grid, grid_, "Helmholtz solve");
  std::vector<double> c;
  forward(rhs, c);
  const int nx = grid_.nx(), ny = grid_.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * nx + i;
      c[k] /= (sigma + kappa * eigenvalue(i, j));
    }
  Field u(rhs.grid, 0.0, rhs.tag);
  inverse(c, u);
  return u;
}

Field Spectral::apply_mode_filter(const Field& f,
                                  const std::function<double(double)>& gain) const {
  require_same_grid(f.grid, grid_, "mode filter");
  std::vector<double> c;
  forward(f, c);
  const int nx = grid_.nx(), ny = grid_.ny();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      std::size_t k = static_cast<std::size_t>(j) * nx + i;
      c[k] *= gain(eigenvalue(i, j));
    }
  Field u(f.grid, 0.0, f.tag);
  inverse(c, u);
  return u;
}

double Spectral::vprime_norm(const Field& f) const {
  const double m = mean(f);
  Field fluct = f;
  for (double& v : fluct.values) v -= m;
  Field u = apply_inverse(fluct);
  double q = inner(fluct, u);
  if (q < 0.0) q = 0.0; // roundoff guard; the quadratic form is PSD
  return std::sqrt(q + m * m);
}

const Spectral& spectral_for(const Grid& g) {
  using Key = std::tuple<int, int, int, double, double>;
  thread_local std::map<Key, std::unique_ptr<Spectral>> cache;
  Key key{g.dim, g.count[0], g.count[1], g.length[0], g.length[1]};
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, std::make_unique<Spectral>(g)).first;
  return *it->second;
}

Field inv_neumann_laplacian(const Field& f) {
  return spectral_for(f.grid).inv_neumann_laplacian(f);
}

double vprime_norm(const Field& f) { return spectral_for(f.grid).vprime_norm(f); }

} // namespace nlch
