#ifndef NLCH_SPECTRAL_HPP
#define NLCH_SPECTRAL_HPP

#include <functional>
#include <vector>

#include "nlch/grid.hpp"

namespace nlch {

/// Cosine-transform diagonalization of the Neumann Laplacian on a box.
///
/// DCT-II modes cos(pi k (j+1/2)/n) are exact eigenvectors of the reflecting
/// second-order stencil, so solves against the stencil operator are exact up
/// to FFT rounding. Plans are created once per workspace; transforms execute
/// against caller buffers, so a const workspace is safe to share across
/// threads and results are bit-reproducible for a fixed grid.
class Spectral {
public:
  explicit Spectral(const Grid& g);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const Grid& grid() const { return grid_; }

  /// Eigenvalue of A_N = -Laplacian for mode (kx, ky); zero for (0, 0).
  double eigenvalue(int kx, int ky) const { return lamx_[kx] + lamy_[ky]; }
  /// Smallest nonzero eigenvalue of A_N on this grid.
  double lambda1() const { return lambda1_; }

  /// u = N f: solves -Lap u = f with mean(u) = 0. Requires |mean(f)| within
  /// 1e-10 * (||f||_H + 1); a bigger mean signals a conservation bug upstream
  /// and raises MeanConstraintError.
  Field inv_neumann_laplacian(const Field& f) const;

  /// Applies N to f - <f> without the mean gate (internal building block).
  Field apply_inverse(const Field& f) const;

  /// Solves (sigma I + kappa A_N) u = rhs spectrally; sigma > 0.
  Field solve_helmholtz(const Field& rhs, double sigma, double kappa) const;

  /// sqrt( <f - <f>, N(f - <f>)> + <f>^2 ), the phase-space contraction norm.
  double vprime_norm(const Field& f) const;

  /// Applies a diagonal gain g(lambda_k) in the cosine basis (lambda is the
  /// A_N eigenvalue of the mode; the constant mode has lambda = 0).
  Field apply_mode_filter(const Field& f,
                          const std::function<double(double)>& gain) const;

private:
  void forward(const Field& f, std::vector<double>& coeff) const;
  void inverse(const std::vector<double>& coeff, Field& out) const;

  Grid grid_;
  std::vector<double> lamx_, lamy_;
  double lambda1_ = 0.0;
  double norm_ = 1.0; // DCT round-trip normalization
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
};

/// Thread-local per-grid workspace cache backing the free functions below.
const Spectral& spectral_for(const Grid& g);

Field inv_neumann_laplacian(const Field& f);
double vprime_norm(const Field& f);

} // namespace nlch

#endif
