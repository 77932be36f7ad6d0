// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/femops.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"
#include "cemgms/multiscale.hpp"
#include "cemgms/offline.hpp"

namespace cemgms {

/// Residual snapshot of one enrichment iteration: the algebraic residual on
/// interior nodes, the per-coarse-vertex dual-norm indicators, their ranking
/// and the selected vertex set.
template <typename T = double>
struct ResidualState {
  DenseVector<T> rho;         ///< A u_ms - b on interior nodes
  DenseVector<T> indicators;  ///< delta_i per coarse vertex
  std::vector<int> ranking;   ///< vertex ids, indicator descending, ties by id
  std::vector<int> selected;  ///< prefix of ranking chosen by the theta rule
  T sum_sq = T(0);            ///< sum of delta_i^2
};

template <typename T>
DenseVector<T> compute_residual(const SparseMatrix<T>& a, const DenseVector<T>& u_ms,
                                const DenseVector<T>& b) {
  return a * u_ms - b;
}

namespace detail {

/// Gathers entries of an interior-node vector at the given global node ids.
template <typename T>
DenseVector<T> gather_interior(const GridHierarchy& g, const DenseVector<T>& interior,
                               const std::vector<int>& node_ids) {
  DenseVector<T> out(node_ids.size());
  for (size_t k = 0; k < node_ids.size(); ++k) {
    out[k] = interior[g.interior_index(node_ids[k])];
  }
  return out;
}

}  // namespace detail

/// Dual norm of the residual over functions vanishing outside one coarse
/// neighborhood: delta_i = sqrt(z^T w) with a(w, v) = z(v) on the interior
/// of omega_i (a local Riesz-representative solve).
template <typename T>
T local_indicator(const GridHierarchy& g, const Medium<T>& m, const DenseVector<T>& rho,
                  int vertex) {
  const Region omega = vertex_neighborhood(g, vertex);
  const std::vector<int> nodes = interior_nodes_in(g, omega);
  if (nodes.empty()) return T(0);
  const DenseVector<T> z = detail::gather_interior(g, rho, nodes);
  if (z.isZero(T(0))) return T(0);
  try {
    const SpdSolver<T> solver(assemble_stiffness(m, g, omega, true));
    const DenseVector<T> w = solver.solve(z);
    return std::sqrt(std::max(z.dot(w), T(0)));
  } catch (const SolverError& err) {
    throw SolverError("local_indicator: vertex " + std::to_string(vertex) + ": " +
                          err.what(),
                      err.achieved_residual());
  }
}

template <typename T>
DenseVector<T> compute_all_indicators(const GridHierarchy& g, const Medium<T>& m,
                                      const DenseVector<T>& rho) {
  DenseVector<T> deltas(g.num_coarse_vertices());
  parallel_for_index(g.num_coarse_vertices(), [&](int v) {
    deltas[v] = local_indicator(g, m, rho, v);
  });
  return deltas;
}

/// The selection rule: sort indicators descending (ties by ascending vertex
/// id) and keep the shortest prefix whose complementary tail satisfies
/// sum_{i>k} delta_i^2 < theta * sum_i delta_i^2. Indicators below 1e-14 of
/// the maximum count as exact zeros; theta = 0 selects every nonzero
/// indicator (uniform enrichment), and an all-zero list selects nothing.
template <typename T>
std::vector<int> select_regions(const DenseVector<T>& deltas, T theta,
                                std::vector<int>* ranking_out = nullptr) {
  if (!(theta >= T(0)) || !(theta < T(1))) {
    throw std::invalid_argument("select_regions: theta must lie in [0, 1)");
  }
  const int n = static_cast<int>(deltas.size());
  DenseVector<T> d = deltas;
  const T dmax = n > 0 ? d.maxCoeff() : T(0);
  for (int i = 0; i < n; ++i) {
    if (d[i] <= T(1e-14) * dmax) d[i] = T(0);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return d[a] > d[b]; });
  if (ranking_out) *ranking_out = order;

  T total = T(0);
  for (int i = 0; i < n; ++i) total += d[i] * d[i];
  if (!(total > T(0))) return {};

  int k = 0;
  if (theta == T(0)) {
    while (k < n && d[order[k]] > T(0)) ++k;
  } else {
    T tail = total;
    while (k < n) {
      if (tail < theta * total) break;
      tail -= d[order[k]] * d[order[k]];
      ++k;
    }
  }
  return std::vector<int>(order.begin(), order.begin() + k);
}

/// Assembles the full residual snapshot for the current multiscale solution.
template <typename T>
ResidualState<T> assess_residual(const DiscreteProblem<T>& problem,
                                 const DenseVector<T>& u_ms, const DenseVector<T>& b,
                                 T theta) {
  ResidualState<T> state;
  state.rho = compute_residual(problem.stiffness, u_ms, b);
  state.indicators = compute_all_indicators(problem.grid, problem.medium, state.rho);
  state.selected = select_regions(state.indicators, theta, &state.ranking);
  state.sum_sq = state.indicators.squaredNorm();
  return state;
}

namespace detail {

template <typename T>
BasisFunction<T> online_basis_on(const AuxiliarySpace<T>& aux, const GridHierarchy& g,
                                 const Medium<T>& m, const PartitionOfUnity<T>& pou,
                                 const DenseVector<T>& rho, int vertex,
                                 const Region& support,
                                 typename BasisFunction<T>::Kind kind) {
  // chi_i-weighted residual: entries rho_n * chi_i(n) over the support
  // interior; chi_i vanishes outside omega_i.
  const std::vector<int> omega_nodes = fine_nodes_in(g, pou.neighborhoods[vertex]);
  DenseVector<T> chi_full = scatter_nodes(pou.chi[vertex], omega_nodes, g.num_fine_nodes());

  const std::vector<int> interior = interior_nodes_in(g, support);
  DenseVector<T> rhs(interior.size());
  for (size_t k = 0; k < interior.size(); ++k) {
    const int node = interior[k];
    rhs[k] = chi_full[node] != T(0) ? rho[g.interior_index(node)] * chi_full[node] : T(0);
  }

  BasisFunction<T> basis;
  basis.kind = kind;
  basis.owner_vertex = vertex;
  basis.support = support;
  if (rhs.isZero(T(0))) {
    basis.values = DenseVector<T>::Zero(interior.size());
    return basis;
  }
  try {
    const CemLocalSolver<T> solver(g, m, aux, support);
    basis.values = solver.solve(rhs);
  } catch (const SolverError& err) {
    throw SolverError("online basis: vertex " + std::to_string(vertex) + ": " + err.what(),
                      err.achieved_residual());
  }
  return basis;
}

}  // namespace detail

/// Online basis for one selected vertex: solves
///   a(beta, v) + s(pi beta, pi v) = rho^T (chi_i . v)
/// on the interior of the oversampled neighborhood, with the nodewise
/// product of the hat function and the test function on the right.
template <typename T>
BasisFunction<T> build_online_basis(const AuxiliarySpace<T>& aux, const GridHierarchy& g,
                                    const Medium<T>& m, const PartitionOfUnity<T>& pou,
                                    const DenseVector<T>& rho, int vertex, int layers) {
  const Region support = oversample(g, vertex_neighborhood(g, vertex), layers);
  return detail::online_basis_on(aux, g, m, pou, rho, vertex, support,
                                 BasisFunction<T>::Kind::Online);
}

/// Whole-domain counterpart of build_online_basis; verification oracle for
/// small grids.
template <typename T>
BasisFunction<T> global_online_basis(const AuxiliarySpace<T>& aux, const GridHierarchy& g,
                                     const Medium<T>& m, const PartitionOfUnity<T>& pou,
                                     const DenseVector<T>& rho, int vertex) {
  return detail::online_basis_on(aux, g, m, pou, rho, vertex, whole_domain(g),
                                 BasisFunction<T>::Kind::GlobalOracle);
}

/// Multiscale space under enrichment plus the running solution.
template <typename T = double>
struct EnrichmentState {
  MultiscaleSpace<T> space;
  DenseVector<T> coefficients;
  DenseVector<T> u_ms;  ///< interior nodes
  int iteration = 0;
  bool converged = false;
};

template <typename T = double>
struct EnrichOutcome {
  ResidualState<T> residual_state;
  int added = 0;
  int dropped = 0;
  std::vector<int> dropped_vertices;  ///< owner vertices of guard-rejected bases
};

/// Builds online bases for the selected vertices, appends them (tagged with
/// the new iteration number) and re-solves the coarse problem. Bases the
/// dependence guard rejects are removed again and reported.
template <typename T>
EnrichOutcome<T> apply_enrichment(EnrichmentState<T>& state,
                                  const DiscreteProblem<T>& problem,
                                  const DenseVector<T>& b, const ResidualState<T>& residual,
                                  int layers) {
  EnrichOutcome<T> outcome;
  outcome.residual_state = residual;
  const auto& selected = residual.selected;
  if (selected.empty()) {
    state.converged = true;
    return outcome;
  }

  std::vector<BasisFunction<T>> additions(selected.size());
  parallel_for_index(static_cast<int>(selected.size()), [&](int k) {
    additions[k] = build_online_basis(problem.aux, problem.grid, problem.medium,
                                      problem.pou, residual.rho, selected[k], layers);
    additions[k].iteration = state.iteration + 1;
  });

  append_bases(state.space, problem.grid, std::move(additions));
  CoarseSolveResult<T> solve = solve_coarse(state.space, problem.stiffness, b);
  if (!solve.dropped.empty()) {
    outcome.dropped = static_cast<int>(solve.dropped.size());
    for (int idx : solve.dropped) {
      outcome.dropped_vertices.push_back(state.space.bases[idx].owner_vertex);
    }
    remove_bases(state.space, problem.grid, solve.dropped);
    solve = solve_coarse(state.space, problem.stiffness, b);
  }
  state.coefficients = std::move(solve.coefficients);
  state.u_ms = std::move(solve.u_ms);
  state.iteration += 1;
  outcome.added = static_cast<int>(selected.size()) - outcome.dropped;
  return outcome;
}

/// One full enrichment iteration: assess the residual of the current
/// solution, select regions, enrich, re-solve. An empty selection flags
/// convergence and leaves the state untouched.
template <typename T>
EnrichOutcome<T> enrich_step(EnrichmentState<T>& state, const DiscreteProblem<T>& problem,
                             const DenseVector<T>& b, T theta, int layers) {
  const ResidualState<T> residual = assess_residual(problem, state.u_ms, b, theta);
  return apply_enrichment(state, problem, b, residual, layers);
}

}  // namespace cemgms
