#ifndef NLCH_KERNEL_HPP
#define NLCH_KERNEL_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "nlch/grid.hpp"

namespace nlch {

struct KernelSpec {
  enum class Type { gaussian, newtonian2d, custom };
  Type type = Type::gaussian;
  /// Amplitude c_J. Ignored when normalize is set.
  double cj = 1.0;
  /// Normalize the discrete L1 norm to 1 ("cj = auto").
  bool normalize = false;
  /// Gaussian inverse width: J(x) = c_J exp(-xi |x|^2).
  double xi = 1.0;
  /// Truncation radius. Default: none for gaussian, half the domain diagonal
  /// for newtonian2d.
  std::optional<double> cutoff;
  /// Replace the singular origin cell of newtonian2d by the exact cell
  /// average of the log (analytically integrable over a rectangle).
  bool regularize = true;
  /// Custom radial profile (radius, value), radii strictly increasing;
  /// linearly interpolated, zero beyond the last radius.
  std::vector<std::array<double, 2>> profile;
};

/// Load a custom radial profile from a two-column text table.
KernelSpec custom_kernel_from_file(const std::filesystem::path& path);

/// Interaction kernel discretized on the offset lattice of a grid, with the
/// zero-padded FFT machinery for truncated-domain convolution
///   (J * f)(x_i) = sum_j J(x_i - x_j) f(x_j) * cellvol,
/// the cached ambient field a(x) = J * 1, and L1 norm metadata.
///
/// Immutable after construction; convolve is pure and callable concurrently
/// (transforms run on per-call buffers against shared plans).
class Kernel {
public:
  const Grid& grid() const { return grid_; }
  const KernelSpec& spec() const { return spec_; }
  const Field& ambient() const { return ambient_; }
  double l1_norm() const { return l1_norm_; }
  double grad_l1_norm() const { return grad_l1_norm_; }

  /// Tabulated J((dx,dy)*spacing); dx in [-(nx-1), nx-1], dy likewise.
  double table_at(int dx, int dy) const;

  /// Truncated-domain convolution. Equals the direct O(N^2) quadrature sum
  /// up to FFT rounding (zero-padded linear convolution, no wraparound).
  Field convolve(const Field& f) const;

  /// grad(convolve(f)); face-centered, identical to composing the two ops.
  VectorField grad_convolve(const Field& f) const;

  ~Kernel();
  Kernel(Kernel&&) noexcept;
  Kernel& operator=(Kernel&&) = delete;
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

private:
  friend Kernel build_kernel(const KernelSpec&, const Grid&);
  Kernel() = default;

  Grid grid_;
  KernelSpec spec_;
  std::vector<double> table_; // (2nx-1) x (2ny-1) offset lattice
  int px_ = 0, py_ = 0;       // padded transform dims
  std::vector<double> spectrum_re_, spectrum_im_;
  Field ambient_;
  double l1_norm_ = 0.0;
  double grad_l1_norm_ = 0.0;
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

Kernel build_kernel(const KernelSpec& spec, const Grid& grid);

} // namespace nlch

#endif
