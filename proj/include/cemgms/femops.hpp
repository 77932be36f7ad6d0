// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/SparseCholesky>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"

namespace cemgms {

// ---------------------------------------------------------------------------
// Nodal gather/scatter

template <typename T>
DenseVector<T> gather_nodes(const DenseVector<T>& full, const std::vector<int>& ids) {
  DenseVector<T> out(ids.size());
  for (size_t k = 0; k < ids.size(); ++k) out[k] = full[ids[k]];
  return out;
}

template <typename T>
void scatter_add_nodes(const DenseVector<T>& local, const std::vector<int>& ids,
                       DenseVector<T>& full) {
  if (local.size() != static_cast<Eigen::Index>(ids.size())) {
    throw std::invalid_argument("scatter_add_nodes: size mismatch");
  }
  for (size_t k = 0; k < ids.size(); ++k) full[ids[k]] += local[k];
}

/// Zero-padded embedding of a local vector into a vector of `full_size`.
template <typename T>
DenseVector<T> scatter_nodes(const DenseVector<T>& local, const std::vector<int>& ids,
                             int full_size) {
  if (local.size() != static_cast<Eigen::Index>(ids.size())) {
    throw std::invalid_argument("scatter_nodes: size mismatch");
  }
  DenseVector<T> full = DenseVector<T>::Zero(full_size);
  for (size_t k = 0; k < ids.size(); ++k) full[ids[k]] = local[k];
  return full;
}

/// Restriction of a whole-domain nodal vector to the region's closed node set.
template <typename T>
DenseVector<T> restrict_to_region(const GridHierarchy& g, const Region& r,
                                  const DenseVector<T>& full) {
  return gather_nodes(full, fine_nodes_in(g, r));
}

/// Prolongation of a region nodal vector to the whole domain, zero outside.
template <typename T>
DenseVector<T> prolong_from_region(const GridHierarchy& g, const Region& r,
                                   const DenseVector<T>& local) {
  return scatter_nodes(local, fine_nodes_in(g, r), g.num_fine_nodes());
}

// ---------------------------------------------------------------------------
// Partition of unity

/// Coarse bilinear hat functions: one per coarse vertex, interpolated at the
/// fine nodes of its neighborhood, together with the per-fine-cell value of
/// sum_j |grad chi_j|^2 at cell centers.
template <typename T = double>
struct PartitionOfUnity {
  std::vector<Region> neighborhoods;   ///< omega_i per coarse vertex
  std::vector<DenseVector<T>> chi;     ///< values on fine_nodes_in(neighborhoods[i])
  DenseVector<T> grad_sq_sum;          ///< per fine cell
};

template <typename T = double>
PartitionOfUnity<T> build_partition_of_unity(const GridHierarchy& g) {
  PartitionOfUnity<T> pou;
  const int f = g.fine_per_coarse;
  const T f2 = T(f) * T(f);

  pou.neighborhoods.reserve(g.num_coarse_vertices());
  pou.chi.reserve(g.num_coarse_vertices());
  for (int v = 0; v < g.num_coarse_vertices(); ++v) {
    Region nbhd = vertex_neighborhood(g, v);
    const std::vector<int> nodes = fine_nodes_in(g, nbhd);
    DenseVector<T> values(nodes.size());
    const int vx = g.coarse_vertex_x(v) * f;
    const int vy = g.coarse_vertex_y(v) * f;
    for (size_t k = 0; k < nodes.size(); ++k) {
      const int dx = std::abs(g.fine_node_x(nodes[k]) - vx);
      const int dy = std::abs(g.fine_node_y(nodes[k]) - vy);
      values[k] = (dx >= f || dy >= f) ? T(0) : T((f - dx) * (f - dy)) / f2;
    }
    pou.chi.push_back(std::move(values));
    pou.neighborhoods.push_back(std::move(nbhd));
  }

  // sum_j |grad chi_j|^2 at a point depends only on the position within its
  // coarse cell; with local coordinates (u, v) in [0,1]^2 it equals
  //   2[(1-v)^2 + v^2]/Hx^2 + 2[(1-u)^2 + u^2]/Hy^2.
  pou.grad_sq_sum.resize(g.num_fine_cells());
  const T inv_hx2 = T(1) / (T(g.coarse_hx) * T(g.coarse_hx));
  const T inv_hy2 = T(1) / (T(g.coarse_hy) * T(g.coarse_hy));
  for (int cell = 0; cell < g.num_fine_cells(); ++cell) {
    const T u = (T(g.fine_cell_x(cell) % f) + T(0.5)) / T(f);
    const T v = (T(g.fine_cell_y(cell) % f) + T(0.5)) / T(f);
    pou.grad_sq_sum[cell] = T(2) * ((T(1) - v) * (T(1) - v) + v * v) * inv_hx2 +
                            T(2) * ((T(1) - u) * (T(1) - u) + u * u) * inv_hy2;
  }
  return pou;
}

/// Spectral-problem weight: kappa_tilde(cell) = kappa(cell) * sum_j |grad chi_j|^2.
template <typename T>
DenseVector<T> kappa_tilde(const Medium<T>& m, const PartitionOfUnity<T>& pou) {
  if (m.kappa.size() != pou.grad_sq_sum.size()) {
    throw std::invalid_argument("kappa_tilde: medium and partition of unity disagree");
  }
  return m.kappa.cwiseProduct(pou.grad_sq_sum);
}

// ---------------------------------------------------------------------------
// Element kernels and assembly

namespace detail {

// 1D linear stiffness/mass factors; the bilinear element matrices are their
// tensor products, which is exact for per-cell-constant coefficients.
template <typename T>
std::array<std::array<T, 2>, 2> stiffness_1d(T h) {
  const T k = T(1) / h;
  return {{{k, -k}, {-k, k}}};
}

template <typename T>
std::array<std::array<T, 2>, 2> mass_1d(T h) {
  const T m = h / T(6);
  return {{{T(2) * m, m}, {m, T(2) * m}}};
}

/// Maps a fine node to its row index in a region assembly, or -1 when the
/// node is eliminated (region boundary / domain boundary under the flag).
struct RegionIndexer {
  NodeBox box;
  bool eliminate;

  int operator()(int ix, int iy) const {
    if (eliminate) {
      if (ix <= box.x0 || ix >= box.x1 || iy <= box.y0 || iy >= box.y1) return -1;
      return (iy - box.y0 - 1) * (box.span_x() - 2) + (ix - box.x0 - 1);
    }
    return (iy - box.y0) * box.span_x() + (ix - box.x0);
  }

  int size() const {
    return eliminate ? (box.span_x() - 2) * (box.span_y() - 2) : box.num_nodes();
  }
};

template <typename T, typename Kernel>
SparseMatrix<T> assemble_region(const GridHierarchy& g, const Region& r,
                                bool eliminate_boundary, Kernel&& element_matrix) {
  if (r.empty()) throw std::invalid_argument("assembly: empty region");
  const RegionIndexer index{region_node_box(g, r), eliminate_boundary};
  const int n = index.size();

  std::vector<Triplet<T>> triplets;
  triplets.reserve(static_cast<size_t>(r.num_cells()) * g.fine_per_coarse *
                   g.fine_per_coarse * 16);
  for (int cell : fine_cells_in(g, r)) {
    const int ix = g.fine_cell_x(cell), iy = g.fine_cell_y(cell);
    const std::array<std::array<T, 4>, 4> ke = element_matrix(cell);
    const std::array<int, 4> rows = {index(ix, iy), index(ix + 1, iy),
                                     index(ix, iy + 1), index(ix + 1, iy + 1)};
    for (int a = 0; a < 4; ++a) {
      if (rows[a] < 0) continue;
      for (int b = 0; b < 4; ++b) {
        if (rows[b] < 0) continue;
        triplets.emplace_back(rows[a], rows[b], ke[a][b]);
      }
    }
  }
  SparseMatrix<T> out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

}  // namespace detail

/// Stiffness of the kappa-weighted gradient form on a region; local node
/// ordering is (x0,y0), (x1,y0), (x0,y1), (x1,y1) per cell. With the flag
/// set, rows and columns of region-boundary and domain-boundary nodes are
/// removed and the matrix runs over interior_nodes_in(g, r).
template <typename T>
SparseMatrix<T> assemble_stiffness(const Medium<T>& m, const GridHierarchy& g,
                                   const Region& r, bool eliminate_boundary) {
  const auto kx = detail::stiffness_1d<T>(T(g.fine_hx));
  const auto ky = detail::stiffness_1d<T>(T(g.fine_hy));
  const auto mx = detail::mass_1d<T>(T(g.fine_hx));
  const auto my = detail::mass_1d<T>(T(g.fine_hy));
  return detail::assemble_region<T>(
      g, r, eliminate_boundary, [&](int cell) {
        const T kappa = m.kappa[cell];
        std::array<std::array<T, 4>, 4> ke{};
        for (int ay = 0; ay < 2; ++ay)
          for (int ax = 0; ax < 2; ++ax)
            for (int by = 0; by < 2; ++by)
              for (int bx = 0; bx < 2; ++bx)
                ke[ay * 2 + ax][by * 2 + bx] =
                    kappa * (kx[ax][bx] * my[ay][by] + mx[ax][bx] * ky[ay][by]);
        return ke;
      });
}

/// Mass form with a per-fine-cell constant weight (indexed over the whole
/// grid); exact for products of bilinears.
template <typename T>
SparseMatrix<T> assemble_weighted_mass(const DenseVector<T>& cell_weight,
                                       const GridHierarchy& g, const Region& r,
                                       bool eliminate_boundary) {
  if (cell_weight.size() != g.num_fine_cells()) {
    throw std::invalid_argument("assemble_weighted_mass: weight size mismatch");
  }
  const auto mx = detail::mass_1d<T>(T(g.fine_hx));
  const auto my = detail::mass_1d<T>(T(g.fine_hy));
  return detail::assemble_region<T>(
      g, r, eliminate_boundary, [&](int cell) {
        const T w = cell_weight[cell];
        std::array<std::array<T, 4>, 4> ke{};
        for (int ay = 0; ay < 2; ++ay)
          for (int ax = 0; ax < 2; ++ax)
            for (int by = 0; by < 2; ++by)
              for (int bx = 0; bx < 2; ++bx)
                ke[ay * 2 + ax][by * 2 + bx] = w * mx[ax][bx] * my[ay][by];
        return ke;
      });
}

/// Load vector over all fine nodes. f1/f2/grid sources are integrated with
/// 2x2 Gauss quadrature per cell, which keeps the evaluation points away
/// from the f1/f2 singularity at the domain center. The f3 source is the
/// stiffness action on the nodal interpolant of xy.
template <typename T>
DenseVector<T> assemble_load_full(const SourceTerm<T>& f, const Medium<T>& m,
                                  const GridHierarchy& g) {
  using Kind = typename SourceTerm<T>::Kind;

  if (f.kind == Kind::F3) {
    const SparseMatrix<T> a_full = assemble_stiffness(m, g, whole_domain(g), false);
    DenseVector<T> xy(g.num_fine_nodes());
    for (int node = 0; node < g.num_fine_nodes(); ++node) {
      xy[node] = T(g.node_coord_x(node)) * T(g.node_coord_y(node));
    }
    return a_full * xy;
  }
  if (f.kind == Kind::Grid &&
      f.cell_values.size() != g.num_fine_cells()) {
    throw std::invalid_argument("assemble_load_full: grid source size mismatch");
  }

  const T gp = T(1) / std::sqrt(T(3));  // Gauss points at +-1/sqrt(3)
  const std::array<T, 2> ref = {-gp, gp};
  const T jac = T(g.fine_hx) * T(g.fine_hy) / T(4);

  DenseVector<T> b = DenseVector<T>::Zero(g.num_fine_nodes());
  for (int cell = 0; cell < g.num_fine_cells(); ++cell) {
    const int ix = g.fine_cell_x(cell), iy = g.fine_cell_y(cell);
    const T x0 = T(ix) * T(g.fine_hx), y0 = T(iy) * T(g.fine_hy);
    const std::array<int, 4> nodes = {g.fine_node_id(ix, iy), g.fine_node_id(ix + 1, iy),
                                      g.fine_node_id(ix, iy + 1),
                                      g.fine_node_id(ix + 1, iy + 1)};
    for (T gx : ref) {
      for (T gy : ref) {
        const T x = x0 + (gx + T(1)) / T(2) * T(g.fine_hx);
        const T y = y0 + (gy + T(1)) / T(2) * T(g.fine_hy);
        const T fval = (f.kind == Kind::Grid) ? f.cell_values[cell]
                                              : evaluate_source(f, x, y);
        const std::array<T, 4> shape = {
            (T(1) - gx) * (T(1) - gy) / T(4), (T(1) + gx) * (T(1) - gy) / T(4),
            (T(1) - gx) * (T(1) + gy) / T(4), (T(1) + gx) * (T(1) + gy) / T(4)};
        for (int a = 0; a < 4; ++a) b[nodes[a]] += jac * fval * shape[a];
      }
    }
  }
  return b;
}

/// Load vector restricted to interior fine nodes (the Dirichlet-eliminated
/// system all solves run on).
template <typename T>
DenseVector<T> assemble_load(const SourceTerm<T>& f, const Medium<T>& m,
                             const GridHierarchy& g) {
  const DenseVector<T> full = assemble_load_full(f, m, g);
  DenseVector<T> b(g.num_interior_nodes());
  for (int k = 0; k < g.num_interior_nodes(); ++k) b[k] = full[g.interior_node(k)];
  return b;
}

// ---------------------------------------------------------------------------
// Sparse SPD solves

/// Sparse direct factorization of a symmetric positive definite matrix,
/// reusable across right-hand sides.
template <typename T = double>
class SpdSolver {
 public:
  explicit SpdSolver(SparseMatrix<T> matrix) : matrix_(std::move(matrix)) {
    ldlt_.compute(matrix_);
    if (ldlt_.info() != Eigen::Success || (ldlt_.vectorD().array() <= T(0)).any()) {
      throw SolverError("SpdSolver: matrix is not positive definite",
                        std::numeric_limits<double>::infinity());
    }
  }

  const SparseMatrix<T>& matrix() const { return matrix_; }

  DenseVector<T> solve(const DenseVector<T>& rhs) const { return ldlt_.solve(rhs); }

  DenseMatrix<T> solve(const DenseMatrix<T>& rhs) const { return ldlt_.solve(rhs); }

  /// Solve with a relative-residual guarantee; runs iterative refinement if
  /// the direct solve falls short and reports failure with the achieved
  /// residual otherwise.
  DenseVector<T> solve_checked(const DenseVector<T>& rhs, T rel_tol) const {
    DenseVector<T> x = ldlt_.solve(rhs);
    const T scale = rhs.norm();
    if (scale == T(0)) return DenseVector<T>::Zero(rhs.size());
    T residual = (matrix_ * x - rhs).norm() / scale;
    for (int pass = 0; pass < 2 && residual > rel_tol; ++pass) {
      x += ldlt_.solve(DenseVector<T>(rhs - matrix_ * x));
      residual = (matrix_ * x - rhs).norm() / scale;
    }
    if (residual > rel_tol) {
      char msg[96];
      std::snprintf(msg, sizeof(msg), "SpdSolver: relative residual %.3e exceeds %.3e",
                    static_cast<double>(residual), static_cast<double>(rel_tol));
      throw SolverError(msg, static_cast<double>(residual));
    }
    return x;
  }

 private:
  SparseMatrix<T> matrix_;
  Eigen::SimplicialLDLT<SparseMatrix<T>> ldlt_;
};

template <typename T>
DenseVector<T> solve_spd(const SparseMatrix<T>& a, const DenseVector<T>& b,
                         T rel_tol = T(1e-12)) {
  if (a.rows() == 0) return DenseVector<T>();
  return SpdSolver<T>(a).solve_checked(b, rel_tol);
}

// ---------------------------------------------------------------------------
// Generalized eigenproblems

template <typename T = double>
struct Eigenpair {
  T value;
  DenseVector<T> vector;
};

/// The `count` smallest eigenpairs of A phi = lambda S phi with S positive
/// definite. Eigenvectors come back S-orthonormal, sorted by ascending
/// eigenvalue, with the largest-magnitude entry made positive. Local
/// problems are small, so the solve is a dense reduction.
template <typename T>
std::vector<Eigenpair<T>> generalized_eigs_smallest(const SparseMatrix<T>& a,
                                                    const SparseMatrix<T>& s,
                                                    int count) {
  const int n = static_cast<int>(a.rows());
  if (count < 1 || count > n) {
    throw std::invalid_argument("generalized_eigs_smallest: invalid count");
  }
  const DenseMatrix<T> ad(a);
  const DenseMatrix<T> sd(s);
  Eigen::GeneralizedSelfAdjointEigenSolver<DenseMatrix<T>> solver(
      ad, sd, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("generalized_eigs_smallest: eigensolve failed (S singular?)");
  }
  std::vector<Eigenpair<T>> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    DenseVector<T> v = solver.eigenvectors().col(k);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    if (v[imax] < T(0)) v = -v;
    out.push_back({solver.eigenvalues()[k], std::move(v)});
  }
  return out;
}

}  // namespace cemgms
