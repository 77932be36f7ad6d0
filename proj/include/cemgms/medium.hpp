// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/grid.hpp"

namespace cemgms {

/// Heterogeneous diffusion coefficient, piecewise constant per fine cell.
template <typename T = double>
struct Medium {
  int nx = 0;  ///< fine cells per axis, must match the grid
  int ny = 0;
  DenseVector<T> kappa;  ///< per fine cell, row-major, bottom row first
};

class MediumParseError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MediumDimensionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class MediumValueError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Rect {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const {
    return x >= x0 && x <= x1 && y >= y0 && y <= y1;
  }
};

// Fixed feature layout of the built-in medium: two horizontal and two
// vertical channels (thin strips of 10:1 aspect ratio spanning two coarse
// cells of the default 10x10 coarse grid) plus scattered rectangular
// inclusions, in normalized coordinates. No coarse cell intersects more
// than one connected feature and no channel traverses more than two coarse
// cells; longer conduits defeat oversampled localization at the two-layer
// default because their modes sit above the captured part of the local
// spectra.
inline const std::vector<Rect>& default_medium_features() {
  static const std::vector<Rect> features = {
      // channels
      {0.20, 0.22, 0.40, 0.24},
      {0.60, 0.62, 0.80, 0.64},
      {0.42, 0.50, 0.44, 0.70},
      {0.82, 0.10, 0.84, 0.30},
      // inclusions
      {0.06, 0.06, 0.14, 0.10},
      {0.55, 0.07, 0.59, 0.13},
      {0.12, 0.42, 0.16, 0.48},
      {0.65, 0.45, 0.71, 0.49},
      {0.26, 0.73, 0.32, 0.77},
      {0.55, 0.86, 0.61, 0.90},
      {0.06, 0.85, 0.10, 0.91},
      {0.90, 0.32, 0.94, 0.36},
  };
  return features;
}

}  // namespace detail

/// Builds the built-in high-contrast medium: background 1, channels and
/// inclusions set to `contrast`. A fine cell takes the contrast value when
/// its center lies inside a feature rectangle, so the same layout is
/// reproduced at any resolution that resolves it.
template <typename T = double>
Medium<T> generate_default_medium(const GridHierarchy& g, T contrast) {
  if (!(contrast >= T(1))) {
    throw std::invalid_argument("generate_default_medium: contrast must be >= 1");
  }
  Medium<T> m;
  m.nx = g.fine_nx;
  m.ny = g.fine_ny;
  m.kappa = DenseVector<T>::Ones(g.num_fine_cells());
  for (int cell = 0; cell < g.num_fine_cells(); ++cell) {
    const double x = (g.fine_cell_x(cell) + 0.5) * g.fine_hx;
    const double y = (g.fine_cell_y(cell) + 0.5) * g.fine_hy;
    for (const auto& rect : detail::default_medium_features()) {
      if (rect.contains(x, y)) {
        m.kappa[cell] = contrast;
        break;
      }
    }
  }
  return m;
}

/// Parses a per-cell field file: first line "nx ny", then ny rows of nx
/// values, bottom row first. Positivity is only enforced when
/// `require_positive` is set (coefficients yes, source grids no).
template <typename T = double>
Medium<T> read_cell_field_file(const std::string& path, bool require_positive) {
  std::ifstream in(path);
  if (!in) throw MediumParseError("cannot open field file: " + path);

  int nx = 0, ny = 0;
  if (!(in >> nx >> ny) || nx < 1 || ny < 1) {
    throw MediumParseError(path + ": malformed header, expected 'nx ny'");
  }
  Medium<T> m;
  m.nx = nx;
  m.ny = ny;
  m.kappa.resize(static_cast<Eigen::Index>(nx) * ny);
  for (int row = 0; row < ny; ++row) {
    for (int col = 0; col < nx; ++col) {
      double value = 0;
      if (!(in >> value)) {
        throw MediumParseError(path + ": parse failure at row " + std::to_string(row) +
                               ", column " + std::to_string(col));
      }
      if (!std::isfinite(value) || (require_positive && !(value > 0))) {
        throw MediumValueError(path + ": bad coefficient at row " + std::to_string(row) +
                               ", column " + std::to_string(col) +
                               (require_positive ? " (must be positive and finite)"
                                                 : " (must be finite)"));
      }
      m.kappa[static_cast<Eigen::Index>(row) * nx + col] = static_cast<T>(value);
    }
  }
  return m;
}

/// Reads a medium file for the given grid: positive entries, dimensions must
/// match the fine grid.
template <typename T = double>
Medium<T> load_medium(const GridHierarchy& g, const std::string& path) {
  Medium<T> m = read_cell_field_file<T>(path, true);
  if (m.nx != g.fine_nx || m.ny != g.fine_ny) {
    throw MediumDimensionError(path + ": field is " + std::to_string(m.nx) + "x" +
                               std::to_string(m.ny) + " but the grid needs " +
                               std::to_string(g.fine_nx) + "x" + std::to_string(g.fine_ny));
  }
  return m;
}

/// Reads a per-cell source grid (any sign) for the given grid.
template <typename T = double>
DenseVector<T> load_cell_field(const GridHierarchy& g, const std::string& path) {
  Medium<T> m = read_cell_field_file<T>(path, false);
  if (m.nx != g.fine_nx || m.ny != g.fine_ny) {
    throw MediumDimensionError(path + ": field is " + std::to_string(m.nx) + "x" +
                               std::to_string(m.ny) + " but the grid needs " +
                               std::to_string(g.fine_nx) + "x" + std::to_string(g.fine_ny));
  }
  return std::move(m.kappa);
}

/// Writes the medium in the format load_medium reads, full double precision.
template <typename T>
void save_medium(const Medium<T>& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write medium file: " + path);
  out << m.nx << " " << m.ny << "\n";
  char buf[64];
  for (int row = 0; row < m.ny; ++row) {
    for (int col = 0; col < m.nx; ++col) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    static_cast<double>(m.kappa[static_cast<Eigen::Index>(row) * m.nx + col]));
      out << buf << (col + 1 == m.nx ? "" : " ");
    }
    out << "\n";
  }
}

/// Right-hand side of the model problem. f1 and f2 are radial power laws
/// around the domain center; f3 is defined through a discrete stiffness
/// action and has no pointwise rule (see assemble_load). Grid sources carry
/// one value per fine cell.
template <typename T = double>
struct SourceTerm {
  enum class Kind { F1, F2, F3, Grid };

  Kind kind = Kind::F1;
  DenseVector<T> cell_values;  ///< used when kind == Grid

  static SourceTerm f1() { return {Kind::F1, {}}; }
  static SourceTerm f2() { return {Kind::F2, {}}; }
  static SourceTerm f3() { return {Kind::F3, {}}; }
  static SourceTerm from_grid(DenseVector<T> values) {
    return {Kind::Grid, std::move(values)};
  }
};

/// Pointwise evaluation of f1 or f2. The formulas are singular at the domain
/// center; callers are expected to evaluate at quadrature points only.
template <typename T>
T evaluate_source(const SourceTerm<T>& f, T x, T y) {
  using Kind = typename SourceTerm<T>::Kind;
  if (f.kind == Kind::F3 || f.kind == Kind::Grid) {
    throw std::invalid_argument("evaluate_source: source has no pointwise rule");
  }
  const T r2 = (x - T(0.5)) * (x - T(0.5)) + (y - T(0.5)) * (y - T(0.5));
  if (r2 == T(0)) {
    throw std::domain_error("evaluate_source: evaluation at the singular point (0.5, 0.5)");
  }
  const T exponent = (f.kind == Kind::F1) ? T(-0.25) : T(-0.75);
  return std::pow(r2, exponent);
}

}  // namespace cemgms
