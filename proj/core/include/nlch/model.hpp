#ifndef NLCH_MODEL_HPP
#define NLCH_MODEL_HPP

#include <optional>

#include "nlch/grid.hpp"

namespace nlch {

/// The four dynamics variants:
///   A  constant mobility, regular potential, alpha = 0
///   B  viscous (alpha > 0), singular potential
///   C  degenerate mobility kappa = b0 phi(1-phi), entropy potential on (0,1)
///   D  Kawasaki dynamics  d_t phi = Lap(phi - tanh(beta J*phi))
enum class Variant { A, B, C, D };

char variant_letter(Variant v);
Variant variant_from_letter(char c);

struct ModelConfig {
  Variant variant = Variant::A;
  /// Viscosity coefficient of the alpha * d_t phi term; must be > 0 for B.
  double alpha = 0.0;
  /// Kawasaki coupling (variant D).
  double beta = 0.5;
  /// Mobility prefactor b0 (variant C); spatially varying when b0_field set.
  double mobility_b0 = 1.0;
  std::optional<Field> mobility_field;

  double dt = 1e-3;
  double t_end = 1.0;
  double newton_tol = 1e-10;
  int newton_max = 50;
  /// Minimal distance Newton iterates keep from singular endpoints.
  double interior_margin = 1e-9;
  int snapshot_every = 10;
  /// A step that fails after this many dt halvings is declared infeasible.
  int max_halvings = 8;

  void validate() const;
};

} // namespace nlch

#endif
