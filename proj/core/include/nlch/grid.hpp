#ifndef NLCH_GRID_HPP
#define NLCH_GRID_HPP

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace nlch {

/// Uniform cell-centered grid on an axis-aligned box, d = 1 or 2.
///
/// Cell centers sit at (k + 1/2) * spacing; no-flux boundaries are encoded by
/// reflecting ghost cells, so every discrete operator below preserves the
/// discrete mean exactly. Internally a 1-d grid is a 2-d grid with a single
/// row of unit extent, which keeps all index arithmetic in one code path.
struct Grid {
  int dim = 1;
  std::array<double, 2> length{1.0, 1.0};
  std::array<int, 2> count{1, 1};
  std::array<double, 2> spacing{1.0, 1.0};

  int nx() const { return count[0]; }
  int ny() const { return count[1]; }
  std::size_t size() const { return static_cast<std::size_t>(count[0]) * count[1]; }
  double cell_volume() const { return spacing[0] * spacing[1]; }
  double domain_volume() const { return length[0] * length[1]; }
  /// Coordinate of cell center i along `axis`.
  double center(int axis, int i) const { return (i + 0.5) * spacing[axis]; }

  bool operator==(const Grid&) const = default;
};

Grid make_grid(int dim, std::span<const double> lengths, std::span<const int> counts);

enum class FieldTag { order_parameter, chemical_potential, ambient, auxiliary };

/// Scalar values on the cells of a Grid, row-major (index j*nx + i).
struct Field {
  Grid grid;
  std::vector<double> values;
  FieldTag tag = FieldTag::auxiliary;

  Field() = default;
  explicit Field(const Grid& g, double fill = 0.0, FieldTag t = FieldTag::auxiliary)
      : grid(g), values(g.size(), fill), tag(t) {}

  double& operator[](std::size_t k) { return values[k]; }
  double operator[](std::size_t k) const { return values[k]; }
  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx() + i]; }
  std::size_t size() const { return values.size(); }
};

/// Face-centered staggered vector field. Component k lives on the faces
/// orthogonal to axis k; the normal component on the outer boundary is
/// identically zero (no-flux).
struct VectorField {
  Grid grid;
  std::vector<double> xcomp; // (nx+1) x ny
  std::vector<double> ycomp; // nx x (ny+1); empty when dim == 1

  VectorField() = default;
  explicit VectorField(const Grid& g)
      : grid(g),
        xcomp(static_cast<std::size_t>(g.nx() + 1) * g.ny(), 0.0),
        ycomp(g.dim == 2 ? static_cast<std::size_t>(g.nx()) * (g.ny() + 1) : 0, 0.0) {}

  double& xface(int i, int j) { return xcomp[static_cast<std::size_t>(j) * (grid.nx() + 1) + i]; }
  double xface(int i, int j) const { return xcomp[static_cast<std::size_t>(j) * (grid.nx() + 1) + i]; }
  double& yface(int i, int j) { return ycomp[static_cast<std::size_t>(j) * grid.nx() + i]; }
  double yface(int i, int j) const { return ycomp[static_cast<std::size_t>(j) * grid.nx() + i]; }
};

/// Compensated (Kahan) sum; fixed evaluation order, bit-reproducible.
double kahan_sum(std::span<const double> xs);

/// Cell-volume-weighted average; on a uniform grid this is the arithmetic mean.
double mean(const Field& f);

/// Discrete L2 inner product <f,g> = sum f_i g_i * cellvol.
double inner(const Field& f, const Field& g);
double l2_norm(const Field& f);

/// Face inner product (boundary faces carry zero normal component).
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const VectorField& a);

double min_value(const Field& f);
double max_value(const Field& f);
double max_abs(const Field& f);
bool all_finite(const Field& f);

/// Face-centered forward differences; boundary faces are zero (reflection).
VectorField grad(const Field& f);

/// Negative adjoint of grad under the discrete inner products.
Field div(const VectorField& v);

/// Second-order Neumann Laplacian; computed as div(grad(f)) so the
/// composition identity holds bit-for-bit. Output has zero mean by
/// construction (the face fluxes telescope).
Field neumann_laplacian(const Field& f);

void require_same_grid(const Grid& a, const Grid& b, const std::string& what);

} // namespace nlch

#endif
