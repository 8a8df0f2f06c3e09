#include "nlch/kernel.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>

#include "nlch/errors.hpp"

namespace nlch {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// Mean of log|x| over the rectangle [-a,a] x [-b,b] (singular-cell average).
double log_cell_average(double a, double b) {
  // I(a,b) = int_0^a int_0^b log(x^2+y^2) dy dx
  double I = a * b * std::log(a * a + b * b) - 3.0 * a * b +
             a * a * std::atan2(b, a) + b * b * std::atan2(a, b);
  return I / (2.0 * a * b);
}

double eval_profile(const std::vector<std::array<double, 2>>& profile, double r) {
  if (profile.empty()) return 0.0;
  if (r <= profile.front()[0]) return profile.front()[1];
  if (r >= profile.back()[0]) return 0.0;
  auto it = std::upper_bound(profile.begin(), profile.end(), r,
                             [](double v, const std::array<double, 2>& p) { return v < p[0]; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  double t = (r - lo[0]) / (hi[0] - lo[0]);
  return lo[1] + t * (hi[1] - lo[1]);
}

} // namespace

KernelSpec custom_kernel_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open kernel profile " + path.string());
  KernelSpec spec;
  spec.type = KernelSpec::Type::custom;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double r, v;
    if (!(ss >> r)) continue; // blank/comment line
    if (!(ss >> v))
      throw ParseError("kernel profile needs two columns (radius value)", lineno);
    spec.profile.push_back({r, v});
  }
  if (spec.profile.size() < 2)
    throw ConfigError("kernel profile needs at least two rows: " + path.string());
  return spec;
}

Kernel::~Kernel() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_inv_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

Kernel::Kernel(Kernel&& other) noexcept
    : grid_(other.grid_),
      spec_(std::move(other.spec_)),
      table_(std::move(other.table_)),
      px_(other.px_),
      py_(other.py_),
      spectrum_re_(std::move(other.spectrum_re_)),
      spectrum_im_(std::move(other.spectrum_im_)),
      ambient_(std::move(other.ambient_)),
      l1_norm_(other.l1_norm_),
      grad_l1_norm_(other.grad_l1_norm_),
      plan_fwd_(other.plan_fwd_),
      plan_inv_(other.plan_inv_) {
  other.plan_fwd_ = nullptr;
  other.plan_inv_ = nullptr;
}

double Kernel::table_at(int dx, int dy) const {
  const int nx = grid_.nx(), ny = grid_.ny();
  const int wx = 2 * nx - 1;
  return table_[static_cast<std::size_t>(dy + ny - 1) * wx + (dx + nx - 1)];
}

Field Kernel::convolve(const Field& f) const {
  require_same_grid(f.grid, grid_, "convolve");
  const int nx = grid_.nx(), ny = grid_.ny();
  const std::size_t nreal = static_cast<std::size_t>(px_) * py_;
  const std::size_t ncplx = static_cast<std::size_t>(py_) * (px_ / 2 + 1);

  std::vector<double> pad(nreal, 0.0);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      pad[static_cast<std::size_t>(j) * px_ + i] = f.at(i, j);

  std::vector<std::complex<double>> hat(ncplx);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), pad.data(),
                       reinterpret_cast<fftw_complex*>(hat.data()));
  for (std::size_t k = 0; k < ncplx; ++k)
    hat[k] *= std::complex<double>(spectrum_re_[k], spectrum_im_[k]);
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_inv_),
                       reinterpret_cast<fftw_complex*>(hat.data()), pad.data());

  Field out(grid_, 0.0, f.tag);
  const double scale = grid_.cell_volume() / static_cast<double>(nreal);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      out.at(i, j) = pad[static_cast<std::size_t>(j) * px_ + i] * scale;
  return out;
}

VectorField Kernel::grad_convolve(const Field& f) const {
  return grad(convolve(f));
}

Kernel build_kernel(const KernelSpec& spec, const Grid& grid) {
  using Type = KernelSpec::Type;
  if (spec.type == Type::gaussian) {
    if (!(spec.xi > 0.0)) throw ConfigError("gaussian kernel needs xi > 0");
    if (spec.cj < 0.0) throw ConfigError("kernel amplitude cj must be >= 0");
  }
  if (spec.type == Type::newtonian2d) {
    if (grid.dim != 2)
      throw ConfigError("newtonian2d kernel requires a 2-d grid");
    if (!(spec.cj > 0.0) && !spec.normalize)
      throw ConfigError("newtonian2d kernel needs cj > 0");
  }
  if (spec.type == Type::custom) {
    if (spec.profile.size() < 2)
      throw ConfigError("custom kernel needs a profile with >= 2 rows");
    for (std::size_t i = 0; i < spec.profile.size(); ++i) {
      if (spec.profile[i][0] < 0.0 || !std::isfinite(spec.profile[i][1]))
        throw ConfigError("custom kernel profile must have r >= 0 and finite values");
      if (i > 0 && !(spec.profile[i][0] > spec.profile[i - 1][0]))
        throw ConfigError("custom kernel profile radii must be strictly increasing");
    }
  }

  Kernel k;
  k.grid_ = grid;
  k.spec_ = spec;
  const int nx = grid.nx(), ny = grid.ny();
  const int wx = 2 * nx - 1, wy = 2 * ny - 1;
  const double hx = grid.spacing[0], hy = grid.spacing[1];

  double cutoff = spec.cutoff.value_or(
      spec.type == Type::newtonian2d
          ? 0.5 * std::hypot(grid.length[0], grid.dim == 2 ? grid.length[1] : 0.0)
          : std::numeric_limits<double>::infinity());
  if (!(cutoff > 0.0)) throw ConfigError("kernel cutoff must be positive");

  // Midpoint sampling on the offset lattice; only the singular origin cell of
  // the log kernel is cell-averaged.
  k.table_.assign(static_cast<std::size_t>(wx) * wy, 0.0);
  for (int dy = -(ny - 1); dy <= ny - 1; ++dy) {
    for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
      const double x = dx * hx, y = dy * hy;
      const double r = std::hypot(x, y);
      double v = 0.0;
      switch (spec.type) {
        case Type::gaussian:
          v = (r <= cutoff) ? spec.cj * std::exp(-spec.xi * r * r) : 0.0;
          break;
        case Type::newtonian2d:
          if (dx == 0 && dy == 0)
            v = spec.regularize ? -spec.cj * log_cell_average(hx / 2, hy / 2)
                                : -spec.cj * std::log(0.0); // +inf, rejected below
          else
            v = (r <= cutoff) ? -spec.cj * std::log(r) : 0.0;
          break;
        case Type::custom:
          v = (r <= cutoff) ? eval_profile(spec.profile, r) : 0.0;
          break;
      }
      k.table_[static_cast<std::size_t>(dy + ny - 1) * wx + (dx + nx - 1)] = v;
    }
  }

  for (double v : k.table_)
    if (!std::isfinite(v))
      throw KernelHypothesisError(
          "discretized kernel has non-finite entries (singular sample; enable regularization)");

  // J(-x) = J(x) must hold exactly on the table.
  for (int dy = 0; dy <= ny - 1; ++dy)
    for (int dx = -(nx - 1); dx <= nx - 1; ++dx)
      if (k.table_[static_cast<std::size_t>(dy + ny - 1) * wx + (dx + nx - 1)] !=
          k.table_[static_cast<std::size_t>(-dy + ny - 1) * wx + (-dx + nx - 1)])
        throw KernelHypothesisError("kernel table is not even under offset negation");

  const double vol = grid.cell_volume();
  auto discrete_l1 = [&]() {
    double s = 0.0;
    for (double v : k.table_) s += std::fabs(v);
    return s * vol;
  };
  if (spec.normalize) {
    double l1 = discrete_l1();
    if (!(l1 > 0.0))
      throw ConfigError("cannot normalize a kernel with zero L1 norm");
    for (double& v : k.table_) v /= l1;
    k.spec_.cj = spec.cj / l1;
  }
  k.l1_norm_ = discrete_l1();

  // ||grad J||_L1 on the truncated offset lattice (centered differences,
  // one-sided at the edges).
  {
    auto tab = [&](int dx, int dy) {
      return k.table_[static_cast<std::size_t>(dy + ny - 1) * wx + (dx + nx - 1)];
    };
    double s = 0.0;
    for (int dy = -(ny - 1); dy <= ny - 1; ++dy)
      for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
        double gx, gy = 0.0;
        if (dx == -(nx - 1))
          gx = nx > 1 ? (tab(dx + 1, dy) - tab(dx, dy)) / hx : 0.0;
        else if (dx == nx - 1)
          gx = nx > 1 ? (tab(dx, dy) - tab(dx - 1, dy)) / hx : 0.0;
        else
          gx = (tab(dx + 1, dy) - tab(dx - 1, dy)) / (2 * hx);
        if (ny > 1) {
          if (dy == -(ny - 1))
            gy = (tab(dx, dy + 1) - tab(dx, dy)) / hy;
          else if (dy == ny - 1)
            gy = (tab(dx, dy) - tab(dx, dy - 1)) / hy;
          else
            gy = (tab(dx, dy + 1) - tab(dx, dy - 1)) / (2 * hy);
        }
        s += std::hypot(gx, gy);
      }
    k.grad_l1_norm_ = s * vol;
  }

  // Zero-padded linear convolution: a circular transform of period >= 2n-1
  // per axis reproduces the truncated-domain sum exactly (the paper-style
  // convolution integrates over the box only, so wraparound must not alias).
  k.px_ = nx == 1 ? 1 : 2 * nx;
  k.py_ = ny == 1 ? 1 : 2 * ny;
  const std::size_t nreal = static_cast<std::size_t>(k.px_) * k.py_;
  const std::size_t ncplx = static_cast<std::size_t>(k.py_) * (k.px_ / 2 + 1);

  std::vector<double> wrapped(nreal, 0.0);
  for (int dy = -(ny - 1); dy <= ny - 1; ++dy)
    for (int dx = -(nx - 1); dx <= nx - 1; ++dx) {
      int ix = dx >= 0 ? dx : dx + k.px_;
      int iy = dy >= 0 ? dy : dy + k.py_;
      wrapped[static_cast<std::size_t>(iy) * k.px_ + ix] =
          k.table_[static_cast<std::size_t>(dy + ny - 1) * wx + (dx + nx - 1)];
    }

  {
    std::vector<double> scratch_r(nreal);
    std::vector<std::complex<double>> scratch_c(ncplx);
    std::lock_guard<std::mutex> lock(planner_mutex());
    k.plan_fwd_ = fftw_plan_dft_r2c_2d(
        k.py_, k.px_, scratch_r.data(),
        reinterpret_cast<fftw_complex*>(scratch_c.data()),
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    k.plan_inv_ = fftw_plan_dft_c2r_2d(
        k.py_, k.px_, reinterpret_cast<fftw_complex*>(scratch_c.data()),
        scratch_r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  }

  std::vector<std::complex<double>> spec_hat(ncplx);
  fftw_execute_dft_r2c(static_cast<fftw_plan>(k.plan_fwd_), wrapped.data(),
                       reinterpret_cast<fftw_complex*>(spec_hat.data()));
  k.spectrum_re_.resize(ncplx);
  k.spectrum_im_.resize(ncplx);
  for (std::size_t i = 0; i < ncplx; ++i) {
    k.spectrum_re_[i] = spec_hat[i].real();
    k.spectrum_im_[i] = spec_hat[i].imag();
  }

  Field unit(grid, 1.0, FieldTag::auxiliary);
  k.ambient_ = k.convolve(unit);
  k.ambient_.tag = FieldTag::ambient;
  if (min_value(k.ambient_) < -1e-12)
    throw KernelHypothesisError(
        "ambient field a(x) = J*1 is negative (min " +
        std::to_string(min_value(k.ambient_)) + "); discrete kernel breaks a >= 0");

  return k;
}

} // namespace nlch
