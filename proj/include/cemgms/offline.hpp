// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Cholesky>

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/femops.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"

namespace cemgms {

/// Per-coarse-element spectral data: the first J eigenpairs of the local
/// generalized problem a_i(phi, v) = lambda s_i(phi, v) on all element nodes,
/// the first excluded eigenvalue, and the global spectral gap.
template <typename T = double>
struct AuxiliarySpace {
  int num_per_element = 0;                   ///< J, uniform across elements
  std::vector<Region> element_regions;       ///< one coarse cell each
  std::vector<std::vector<int>> element_nodes;
  std::vector<DenseMatrix<T>> phi;           ///< nodes x J eigenvectors
  std::vector<DenseMatrix<T>> s_phi;         ///< S_i * phi, same shape
  std::vector<DenseVector<T>> eigenvalues;   ///< length J + 1, ascending
  T spectral_gap = T(0);                     ///< min over elements of lambda_{J+1}

  int num_elements() const { return static_cast<int>(element_regions.size()); }
  int dimension() const { return num_elements() * num_per_element; }
};

template <typename T>
AuxiliarySpace<T> build_auxiliary_space(const GridHierarchy& g, const Medium<T>& m,
                                        const PartitionOfUnity<T>& pou,
                                        int num_per_element) {
  if (num_per_element < 1) {
    throw std::invalid_argument("build_auxiliary_space: need at least one function per element");
  }
  const DenseVector<T> weight = kappa_tilde(m, pou);
  const int n_elems = g.num_coarse_cells();

  AuxiliarySpace<T> aux;
  aux.num_per_element = num_per_element;
  aux.element_regions.resize(n_elems);
  aux.element_nodes.resize(n_elems);
  aux.phi.resize(n_elems);
  aux.s_phi.resize(n_elems);
  aux.eigenvalues.resize(n_elems);

  parallel_for_index(n_elems, [&](int e) {
    const Region region = coarse_element_region(g, e);
    const SparseMatrix<T> a = assemble_stiffness(m, g, region, false);
    const SparseMatrix<T> s = assemble_weighted_mass(weight, g, region, false);
    const auto pairs = generalized_eigs_smallest(a, s, num_per_element + 1);

    const int n_nodes = static_cast<int>(a.rows());
    DenseMatrix<T> phi(n_nodes, num_per_element);
    DenseVector<T> values(num_per_element + 1);
    for (int j = 0; j < num_per_element; ++j) phi.col(j) = pairs[j].vector;
    for (int j = 0; j <= num_per_element; ++j) values[j] = pairs[j].value;

    aux.element_regions[e] = region;
    aux.element_nodes[e] = fine_nodes_in(g, region);
    aux.s_phi[e] = s * phi;
    aux.phi[e] = std::move(phi);
    aux.eigenvalues[e] = std::move(values);
  });

  aux.spectral_gap = aux.eigenvalues[0][num_per_element];
  for (int e = 1; e < n_elems; ++e) {
    aux.spectral_gap = std::min(aux.spectral_gap, aux.eigenvalues[e][num_per_element]);
  }
  return aux;
}

/// The s-orthogonal projection onto the auxiliary space. Members of the
/// auxiliary space are per-element objects, so the projection is represented
/// by its coefficient vector (element-major, J entries per element); the
/// s-inner product of two projections is the plain dot product of their
/// coefficients thanks to the S-orthonormal eigenbasis.
template <typename T = double>
class PiProjector {
 public:
  PiProjector(const AuxiliarySpace<T>& aux, const GridHierarchy& g)
      : aux_(&aux), num_nodes_(g.num_fine_nodes()) {}

  int dimension() const { return aux_->dimension(); }

  /// Coefficients of pi(v) for a whole-domain nodal vector v.
  DenseVector<T> project(const DenseVector<T>& v_full) const {
    if (v_full.size() != num_nodes_) {
      throw std::invalid_argument("PiProjector::project: expected a whole-domain vector");
    }
    const int j = aux_->num_per_element;
    DenseVector<T> coeffs(dimension());
    for (int e = 0; e < aux_->num_elements(); ++e) {
      const DenseVector<T> local = gather_nodes(v_full, aux_->element_nodes[e]);
      coeffs.segment(e * j, j) = aux_->s_phi[e].transpose() * local;
    }
    return coeffs;
  }

  /// pi applied to an auxiliary-space member given by coefficients; equals
  /// the input up to the S-orthonormality error of the eigenbasis.
  DenseVector<T> project_member(const DenseVector<T>& coeffs) const {
    const int j = aux_->num_per_element;
    DenseVector<T> out(dimension());
    for (int e = 0; e < aux_->num_elements(); ++e) {
      out.segment(e * j, j) =
          aux_->s_phi[e].transpose() * (aux_->phi[e] * coeffs.segment(e * j, j));
    }
    return out;
  }

  /// Scatter-add nodal representation of an auxiliary member. Members are
  /// discontinuous across element interfaces, so this is for inspection and
  /// export only, not for re-projection.
  DenseVector<T> realize(const DenseVector<T>& coeffs) const {
    const int j = aux_->num_per_element;
    DenseVector<T> out = DenseVector<T>::Zero(num_nodes_);
    for (int e = 0; e < aux_->num_elements(); ++e) {
      const DenseVector<T> local = aux_->phi[e] * coeffs.segment(e * j, j);
      scatter_add_nodes(local, aux_->element_nodes[e], out);
    }
    return out;
  }

 private:
  const AuxiliarySpace<T>* aux_;
  Eigen::Index num_nodes_;
};

/// A multiscale basis vector together with its provenance and support.
template <typename T = double>
struct BasisFunction {
  enum class Kind { OfflineCem, Online, GlobalOracle };

  Kind kind = Kind::OfflineCem;
  int owner_element = -1;  ///< coarse element for offline / oracle bases
  int aux_index = -1;      ///< which auxiliary function, offline / oracle
  int owner_vertex = -1;   ///< coarse vertex for online bases
  int iteration = 0;       ///< enrichment iteration an online basis was added in
  Region support;
  DenseVector<T> values;   ///< on interior_nodes_in(g, support)
};

/// Solver for the localized constrained-energy problems
///   a(psi, v) + s(pi psi, pi v) = rhs(v)   for v vanishing on the region rim.
/// The operator is the region stiffness plus a low-rank term built from the
/// auxiliary functions of the coarse elements inside the region; solves go
/// through one sparse factorization and a Woodbury correction.
template <typename T = double>
class CemLocalSolver {
 public:
  CemLocalSolver(const GridHierarchy& g, const Medium<T>& m,
                 const AuxiliarySpace<T>& aux, const Region& region)
      : region_(region), interior_(interior_nodes_in(g, region)) {
    const int n = static_cast<int>(interior_.size());
    if (n == 0) throw std::invalid_argument("CemLocalSolver: region has no interior nodes");

    std::vector<int> interior_index(g.num_fine_nodes(), -1);
    for (int k = 0; k < n; ++k) interior_index[interior_[k]] = k;

    const int j = aux.num_per_element;
    std::vector<int> elems;
    for (int cy = region.cy0; cy <= region.cy1; ++cy)
      for (int cx = region.cx0; cx <= region.cx1; ++cx)
        elems.push_back(g.coarse_cell_id(cx, cy));
    columns_of_.assign(g.num_coarse_cells(), -1);

    q_.resize(n, static_cast<int>(elems.size()) * j);
    for (size_t ke = 0; ke < elems.size(); ++ke) {
      const int e = elems[ke];
      columns_of_[e] = static_cast<int>(ke) * j;
      const auto& nodes = aux.element_nodes[e];
      for (int col = 0; col < j; ++col) {
        DenseVector<T> q = DenseVector<T>::Zero(n);
        for (size_t a = 0; a < nodes.size(); ++a) {
          const int row = interior_index[nodes[a]];
          if (row >= 0) q[row] = aux.s_phi[e](a, col);
        }
        q_.col(columns_of_[e] + col) = q;
      }
    }

    solver_ = std::make_unique<SpdSolver<T>>(assemble_stiffness(m, g, region, true));
    z_ = solver_->solve(q_);
    DenseMatrix<T> cap = q_.transpose() * z_;
    cap.diagonal().array() += T(1);
    cap_llt_.compute(cap);
    if (cap_llt_.info() != Eigen::Success) {
      throw SolverError("CemLocalSolver: low-rank capacitance factorization failed",
                        std::numeric_limits<double>::infinity());
    }
  }

  const Region& region() const { return region_; }
  const std::vector<int>& interior_nodes() const { return interior_; }

  /// Right-hand side vector for the offline problem of auxiliary function
  /// (element, j): the restriction of S_i phi_j, which is the corresponding
  /// low-rank column.
  DenseVector<T> aux_rhs(int element, int j) const {
    const int base = columns_of_[element];
    if (base < 0) throw std::invalid_argument("CemLocalSolver: element outside region");
    return q_.col(base + j);
  }

  DenseVector<T> solve(const DenseVector<T>& rhs) const {
    DenseVector<T> x = woodbury(rhs);
    // one refinement pass keeps the defining-equation residual near machine
    // precision even for strongly weighted low-rank terms
    x += woodbury(rhs - apply(x));
    return x;
  }

  /// Operator action A x + Q (Q^T x).
  DenseVector<T> apply(const DenseVector<T>& x) const {
    return solver_->matrix() * x + q_ * (q_.transpose() * x).eval();
  }

 private:
  DenseVector<T> woodbury(const DenseVector<T>& rhs) const {
    const DenseVector<T> x0 = solver_->solve(rhs);
    return x0 - z_ * cap_llt_.solve(q_.transpose() * x0);
  }

  Region region_;
  std::vector<int> interior_;
  std::vector<int> columns_of_;  ///< first low-rank column of each element, -1 outside
  std::unique_ptr<SpdSolver<T>> solver_;
  DenseMatrix<T> q_, z_;
  Eigen::LLT<DenseMatrix<T>> cap_llt_;
};

/// Offline multiscale basis: for every coarse element and auxiliary index,
/// the constrained-energy minimizer localized to the element's oversampled
/// region. Ordered element-major, auxiliary index fastest.
template <typename T>
std::vector<BasisFunction<T>> build_cem_basis(const AuxiliarySpace<T>& aux,
                                              const GridHierarchy& g, const Medium<T>& m,
                                              int layers) {
  if (layers < 1) throw std::invalid_argument("build_cem_basis: layers must be >= 1");
  const int j = aux.num_per_element;
  std::vector<BasisFunction<T>> bases(static_cast<size_t>(aux.num_elements()) * j);

  parallel_for_index(aux.num_elements(), [&](int e) {
    try {
      const Region support = oversample(g, aux.element_regions[e], layers);
      const CemLocalSolver<T> solver(g, m, aux, support);
      for (int k = 0; k < j; ++k) {
        BasisFunction<T>& basis = bases[static_cast<size_t>(e) * j + k];
        basis.kind = BasisFunction<T>::Kind::OfflineCem;
        basis.owner_element = e;
        basis.aux_index = k;
        basis.support = support;
        basis.values = solver.solve(solver.aux_rhs(e, k));
      }
    } catch (const SolverError& err) {
      throw SolverError("build_cem_basis: element " + std::to_string(e) + ", layers " +
                            std::to_string(layers) + ": " + err.what(),
                        err.achieved_residual());
    }
  });
  return bases;
}

/// Global counterpart of one offline basis function, posed on the whole
/// domain. Meant as a verification oracle on small grids.
template <typename T>
BasisFunction<T> build_global_basis(const AuxiliarySpace<T>& aux, const GridHierarchy& g,
                                    const Medium<T>& m, int element, int aux_index) {
  const Region support = whole_domain(g);
  const CemLocalSolver<T> solver(g, m, aux, support);
  BasisFunction<T> basis;
  basis.kind = BasisFunction<T>::Kind::GlobalOracle;
  basis.owner_element = element;
  basis.aux_index = aux_index;
  basis.support = support;
  basis.values = solver.solve(solver.aux_rhs(element, aux_index));
  return basis;
}

}  // namespace cemgms
