// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <random>
#include <vector>

#include "cemgms/femops.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"

namespace cemgms::test {

/// Medium with the given rectangles (normalized coordinates) at `contrast`
/// over background 1; a cell is inside a feature when its center is.
inline Medium<double> medium_from_rects(const GridHierarchy& g, double contrast,
                                        const std::vector<std::array<double, 4>>& rects) {
  Medium<double> m;
  m.nx = g.fine_nx;
  m.ny = g.fine_ny;
  m.kappa = DenseVector<double>::Ones(g.num_fine_cells());
  for (int c = 0; c < g.num_fine_cells(); ++c) {
    const double x = (g.fine_cell_x(c) + 0.5) * g.fine_hx;
    const double y = (g.fine_cell_y(c) + 0.5) * g.fine_hy;
    for (const auto& r : rects) {
      if (x >= r[0] && x <= r[2] && y >= r[1] && y <= r[3]) {
        m.kappa[c] = contrast;
        break;
      }
    }
  }
  return m;
}

inline Medium<double> uniform_medium(const GridHierarchy& g, double value = 1.0) {
  Medium<double> m;
  m.nx = g.fine_nx;
  m.ny = g.fine_ny;
  m.kappa = DenseVector<double>::Constant(g.num_fine_cells(), value);
  return m;
}

/// Expands values on a region's interior nodes to the global interior
/// numbering (zeros elsewhere).
inline DenseVector<double> expand_to_interior(const GridHierarchy& g, const Region& support,
                                              const DenseVector<double>& values) {
  DenseVector<double> out = DenseVector<double>::Zero(g.num_interior_nodes());
  const std::vector<int> nodes = interior_nodes_in(g, support);
  for (size_t k = 0; k < nodes.size(); ++k) out[g.interior_index(nodes[k])] = values[k];
  return out;
}

inline double energy_norm(const SparseMatrix<double>& a, const DenseVector<double>& v) {
  return std::sqrt(std::max(v.dot(a * v), 0.0));
}

inline std::mt19937& rng() {
  static std::mt19937 gen(20260810u);
  return gen;
}

inline DenseVector<double> random_vector(Eigen::Index n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  DenseVector<double> v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng());
  return v;
}

/// Test-only eigensolver: smallest generalized eigenvalues of A x = lambda
/// S x via shifted inverse power iterations with S-orthogonal deflation.
/// Independent of the production dense-reduction route.
inline std::vector<double> inverse_iteration_eigenvalues(const DenseMatrix<double>& a,
                                                         const DenseMatrix<double>& s,
                                                         int count, double shift = 1e-9,
                                                         int iterations = 400) {
  const Eigen::Index n = a.rows();
  const Eigen::PartialPivLU<DenseMatrix<double>> lu(a + shift * s);
  std::vector<DenseVector<double>> basis;
  std::vector<double> values;
  for (int k = 0; k < count; ++k) {
    DenseVector<double> v = random_vector(n);
    for (int it = 0; it < iterations; ++it) {
      for (const auto& u : basis) v -= u.dot(s * v) * u;
      v = lu.solve((s * v).eval());
      v /= std::sqrt(v.dot(s * v));
    }
    for (const auto& u : basis) v -= u.dot(s * v) * u;
    v /= std::sqrt(v.dot(s * v));
    values.push_back(v.dot(a * v));
    basis.push_back(v);
  }
  return values;
}

}  // namespace cemgms::test
