#include "nlch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nlch/errors.hpp"

namespace nlch {

Grid make_grid(int dim, std::span<const double> lengths, std::span<const int> counts) {
  if (dim != 1 && dim != 2)
    throw ConfigError("grid dim must be 1 or 2, got " + std::to_string(dim));
  if (lengths.size() != static_cast<std::size_t>(dim) ||
      counts.size() != static_cast<std::size_t>(dim))
    throw ConfigError("grid needs one length and one count per axis");
  Grid g;
  g.dim = dim;
  for (int a = 0; a < dim; ++a) {
    if (!(lengths[a] > 0.0) || !std::isfinite(lengths[a]))
      throw ConfigError("grid length must be positive on axis " + std::to_string(a));
    if (counts[a] <= 0)
      throw ConfigError("grid count must be positive on axis " + std::to_string(a));
    g.length[a] = lengths[a];
    g.count[a] = counts[a];
    g.spacing[a] = lengths[a] / counts[a];
  }
  if (dim == 1) {
    g.length[1] = 1.0;
    g.count[1] = 1;
    g.spacing[1] = 1.0;
  }
  return g;
}

double kahan_sum(std::span<const double> xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double mean(const Field& f) {
  return kahan_sum(f.values) / static_cast<double>(f.size());
}

double inner(const Field& f, const Field& g) {
  require_same_grid(f.grid, g.grid, "inner product");
  double s = 0.0, c = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double y = f.values[k] * g.values[k] - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s * f.grid.cell_volume();
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double inner(const VectorField& a, const VectorField& b) {
  require_same_grid(a.grid, b.grid, "face inner product");
  double s = 0.0, c = 0.0;
  auto acc = [&](double v) {
    double y = v - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  };
  for (std::size_t k = 0; k < a.xcomp.size(); ++k) acc(a.xcomp[k] * b.xcomp[k]);
  for (std::size_t k = 0; k < a.ycomp.size(); ++k) acc(a.ycomp[k] * b.ycomp[k]);
  return s * a.grid.cell_volume();
}

double l2_norm(const VectorField& a) { return std::sqrt(inner(a, a)); }

double min_value(const Field& f) {
  return *std::min_element(f.values.begin(), f.values.end());
}

double max_value(const Field& f) {
  return *std::max_element(f.values.begin(), f.values.end());
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::fabs(v));
  return m;
}

bool all_finite(const Field& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return false;
  return true;
}

VectorField grad(const Field& f) {
  const Grid& g = f.grid;
  VectorField v(g);
  const int nx = g.nx(), ny = g.ny();
  const double invhx = 1.0 / g.spacing[0];
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      v.xface(i, j) = (f.at(i, j) - f.at(i - 1, j)) * invhx;
  if (g.dim == 2) {
    const double invhy = 1.0 / g.spacing[1];
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        v.yface(i, j) = (f.at(i, j) - f.at(i, j - 1)) * invhy;
  }
  return v;
}

Field div(const VectorField& v) {
  const Grid& g = v.grid;
  Field f(g);
  const int nx = g.nx(), ny = g.ny();
  const double invhx = 1.0 / g.spacing[0];
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      f.at(i, j) = (v.xface(i + 1, j) - v.xface(i, j)) * invhx;
  if (g.dim == 2) {
    const double invhy = 1.0 / g.spacing[1];
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        f.at(i, j) += (v.yface(i, j + 1) - v.yface(i, j)) * invhy;
  }
  return f;
}

Field neumann_laplacian(const Field& f) { return div(grad(f)); }

void require_same_grid(const Grid& a, const Grid& b, const std::string& what) {
  if (!(a == b)) throw UsageError(what + ": fields live on different grids");
}

} // namespace nlch
