// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/femops.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"
#include "cemgms/offline.hpp"

namespace cemgms {

/// Everything about the discretized problem that does not depend on the
/// source term: grid, medium, partition of unity, auxiliary space, and the
/// interior stiffness and (unweighted) mass matrices.
template <typename T = double>
struct DiscreteProblem {
  GridHierarchy grid;
  Medium<T> medium;
  PartitionOfUnity<T> pou;
  AuxiliarySpace<T> aux;
  SparseMatrix<T> stiffness;  ///< interior nodes
  SparseMatrix<T> mass;       ///< interior nodes, weight 1
};

template <typename T>
DiscreteProblem<T> build_discrete_problem(const GridHierarchy& g, Medium<T> medium,
                                          int num_aux) {
  DiscreteProblem<T> p;
  p.grid = g;
  p.medium = std::move(medium);
  p.pou = build_partition_of_unity<T>(g);
  p.aux = build_auxiliary_space(g, p.medium, p.pou, num_aux);
  const Region domain = whole_domain(g);
  p.stiffness = assemble_stiffness(p.medium, g, domain, true);
  const DenseVector<T> unit_weight = DenseVector<T>::Ones(g.num_fine_cells());
  p.mass = assemble_weighted_mass(unit_weight, g, domain, true);
  return p;
}

/// Ordered multiscale space (offline bases first, online bases appended) and
/// its prolongation to interior fine nodes, one column per basis function.
template <typename T = double>
struct MultiscaleSpace {
  std::vector<BasisFunction<T>> bases;
  SparseMatrix<T> prolongation;  ///< num_interior_nodes x dof

  int dof() const { return static_cast<int>(bases.size()); }
};

namespace detail {

template <typename T>
void rebuild_prolongation(MultiscaleSpace<T>& space, const GridHierarchy& g) {
  std::vector<Triplet<T>> triplets;
  for (size_t col = 0; col < space.bases.size(); ++col) {
    const auto& basis = space.bases[col];
    const std::vector<int> nodes = interior_nodes_in(g, basis.support);
    if (basis.values.size() != static_cast<Eigen::Index>(nodes.size())) {
      throw std::invalid_argument("MultiscaleSpace: basis values do not match its support");
    }
    for (size_t k = 0; k < nodes.size(); ++k) {
      triplets.emplace_back(g.interior_index(nodes[k]), static_cast<int>(col),
                            basis.values[k]);
    }
  }
  space.prolongation.resize(g.num_interior_nodes(), static_cast<int>(space.bases.size()));
  space.prolongation.setFromTriplets(triplets.begin(), triplets.end());
  space.prolongation.makeCompressed();
}

}  // namespace detail

template <typename T>
MultiscaleSpace<T> make_multiscale_space(const GridHierarchy& g,
                                         std::vector<BasisFunction<T>> bases) {
  MultiscaleSpace<T> space;
  space.bases = std::move(bases);
  detail::rebuild_prolongation(space, g);
  return space;
}

template <typename T>
void append_bases(MultiscaleSpace<T>& space, const GridHierarchy& g,
                  std::vector<BasisFunction<T>> more) {
  for (auto& basis : more) space.bases.push_back(std::move(basis));
  detail::rebuild_prolongation(space, g);
}

template <typename T>
void remove_bases(MultiscaleSpace<T>& space, const GridHierarchy& g,
                  const std::vector<int>& indices) {
  std::vector<int> sorted = indices;
  std::sort(sorted.begin(), sorted.end(), std::greater<int>());
  for (int idx : sorted) space.bases.erase(space.bases.begin() + idx);
  detail::rebuild_prolongation(space, g);
}

/// Numerically independent column subset of a symmetric PSD Gram matrix.
/// The scan runs a diagonal-pivoted Cholesky on the correlation matrix
/// (columns scaled to unit diagonal, so small-norm columns are not mistaken
/// for dependent ones) and stops once the remaining pivots fall below
/// rel_tol of the unit diagonal. Zero-norm columns are dropped outright.
template <typename T>
std::vector<int> independent_columns(const DenseMatrix<T>& gram, T rel_tol) {
  const int n = static_cast<int>(gram.rows());
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    if (gram(i, i) > T(0)) candidates.push_back(i);
  }
  const int nc = static_cast<int>(candidates.size());
  DenseVector<T> scale(nc);
  for (int i = 0; i < nc; ++i) scale[i] = T(1) / std::sqrt(gram(candidates[i], candidates[i]));
  DenseMatrix<T> corr(nc, nc);
  for (int i = 0; i < nc; ++i)
    for (int k = 0; k < nc; ++k)
      corr(i, k) = gram(candidates[i], candidates[k]) * scale[i] * scale[k];

  std::vector<int> order(nc);
  for (int i = 0; i < nc; ++i) order[i] = i;
  std::vector<int> kept;
  for (int step = 0; step < nc; ++step) {
    int pivot = step;
    for (int i = step + 1; i < nc; ++i) {
      if (corr(order[i], order[i]) > corr(order[pivot], order[pivot])) pivot = i;
    }
    if (!(corr(order[pivot], order[pivot]) > rel_tol)) break;
    std::swap(order[step], order[pivot]);
    const int p = order[step];
    const T d = corr(p, p);
    for (int i = step + 1; i < nc; ++i) {
      const int a = order[i];
      const T f = corr(a, p) / d;
      for (int k = step + 1; k < nc; ++k) {
        const int b = order[k];
        corr(a, b) -= f * corr(p, b);
      }
    }
    kept.push_back(candidates[p]);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

template <typename T = double>
struct CoarseSolveResult {
  DenseVector<T> coefficients;  ///< per basis; zero for dropped columns
  DenseVector<T> u_ms;          ///< interior nodes
  std::vector<int> dropped;     ///< basis indices rejected by the guard
};

/// Galerkin solve on the multiscale space: (P^T A P) c = P^T b, dense
/// factorization in Jacobi-scaled variables (basis norms span many orders
/// once small online corrections accumulate). Near-dependent columns
/// (correlation pivot below 1e-13) are excluded from the solve and reported.
template <typename T>
CoarseSolveResult<T> solve_coarse(const MultiscaleSpace<T>& space,
                                  const SparseMatrix<T>& a, const DenseVector<T>& b) {
  if (space.dof() == 0) throw std::invalid_argument("solve_coarse: empty space");
  const auto& p = space.prolongation;
  const SparseMatrix<T> ap = a * p;
  const DenseMatrix<T> coarse_a = DenseMatrix<T>(SparseMatrix<T>(p.transpose() * ap));
  const DenseVector<T> coarse_b = p.transpose() * b;

  const std::vector<int> kept = independent_columns(coarse_a, T(1e-13));
  CoarseSolveResult<T> result;
  result.coefficients = DenseVector<T>::Zero(space.dof());

  const int nk = static_cast<int>(kept.size());
  if (nk == 0) throw DependenceError("solve_coarse: no independent basis columns");

  DenseVector<T> scale(nk);
  for (int i = 0; i < nk; ++i) scale[i] = T(1) / std::sqrt(coarse_a(kept[i], kept[i]));
  DenseMatrix<T> sub(nk, nk);
  DenseVector<T> sub_b(nk);
  for (int i = 0; i < nk; ++i) {
    sub_b[i] = coarse_b[kept[i]] * scale[i];
    for (int k = 0; k < nk; ++k) {
      sub(i, k) = coarse_a(kept[i], kept[k]) * scale[i] * scale[k];
    }
  }
  Eigen::LDLT<DenseMatrix<T>> ldlt(sub);
  if (ldlt.info() != Eigen::Success) {
    throw DependenceError("solve_coarse: factorization failed after guard");
  }
  DenseVector<T> c = ldlt.solve(sub_b);
  c += ldlt.solve(DenseVector<T>(sub_b - sub * c));
  for (int i = 0; i < nk; ++i) result.coefficients[kept[i]] = c[i] * scale[i];

  if (nk < space.dof()) {
    std::vector<bool> is_kept(space.dof(), false);
    for (int i : kept) is_kept[i] = true;
    for (int i = 0; i < space.dof(); ++i) {
      if (!is_kept[i]) result.dropped.push_back(i);
    }
  }

  result.u_ms = p * result.coefficients;
  return result;
}

/// max over basis columns of |p^T (A u - b)|, the Galerkin orthogonality
/// defect of a coarse solve.
template <typename T>
T galerkin_defect(const MultiscaleSpace<T>& space, const SparseMatrix<T>& a,
                  const DenseVector<T>& b, const DenseVector<T>& u_ms) {
  const DenseVector<T> rho = a * u_ms - b;
  return (space.prolongation.transpose() * rho).cwiseAbs().maxCoeff();
}

/// Relative errors in percent: (L2, energy) of u_ms against the reference.
template <typename T>
std::pair<T, T> compute_errors(const DenseVector<T>& u_h, const DenseVector<T>& u_ms,
                               const SparseMatrix<T>& a, const SparseMatrix<T>& mass) {
  const T ref_energy = u_h.dot(a * u_h);
  const T ref_l2 = u_h.dot(mass * u_h);
  if (!(ref_energy > T(0)) || !(ref_l2 > T(0))) {
    throw std::domain_error("compute_errors: reference solution has zero norm");
  }
  const DenseVector<T> e = u_h - u_ms;
  const T l2 = T(100) * std::sqrt(e.dot(mass * e) / ref_l2);
  const T energy = T(100) * std::sqrt(e.dot(a * e) / ref_energy);
  return {l2, energy};
}

}  // namespace cemgms
