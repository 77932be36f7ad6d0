// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/femops.hpp"
#include "cemgms/grid.hpp"
#include "cemgms/medium.hpp"
#include "cemgms/multiscale.hpp"
#include "cemgms/online.hpp"

namespace cemgms {

/// One row of a convergence table.
template <typename T = double>
struct ErrorRecord {
  int iteration = 0;
  int dof = 0;
  int online_added = 0;     ///< online bases added to reach this iteration
  T l2_error_pct = T(0);
  T energy_error_pct = T(0);
  T sum_delta_sq = T(0);
};

/// max over consecutive iterations of the squared energy-error ratio
/// ||e_{m+1}||_a^2 / ||e_m||_a^2. Pairs whose denominator is zero are
/// skipped; fewer than two usable records is an error.
template <typename T>
T convergence_rate(const std::vector<ErrorRecord<T>>& history) {
  if (history.size() < 2) {
    throw std::invalid_argument("convergence_rate: need at least two records");
  }
  T rate = T(-1);
  for (size_t m = 0; m + 1 < history.size(); ++m) {
    const T prev = history[m].energy_error_pct;
    const T next = history[m + 1].energy_error_pct;
    if (prev > T(0)) {
      const T ratio = (next / prev) * (next / prev);
      rate = std::max(rate, ratio);
    }
  }
  if (rate < T(0)) {
    throw std::invalid_argument("convergence_rate: no record pair with nonzero error");
  }
  return rate;
}

/// Residual tolerance of the fine-grid reference solves. The normwise floor
/// of a double-precision factorization on contrast ~1e4 stiffness systems
/// sits near 2e-10, so 1e-9 is the tightest robust guarantee.
inline constexpr double kReferenceSolveTol = 1e-9;

/// Fine-grid Dirichlet reference solve.
template <typename T>
DenseVector<T> solve_reference(const GridHierarchy& g, const Medium<T>& m,
                               const DenseVector<T>& load) {
  return solve_spd(assemble_stiffness(m, g, whole_domain(g), true), load,
                   T(kReferenceSolveTol));
}

/// Full outcome of an enrichment experiment on a prepared discretization.
template <typename T = double>
struct RunResult {
  std::vector<ErrorRecord<T>> records;
  std::vector<ResidualState<T>> residual_states;  ///< one per record
  EnrichmentState<T> state;                       ///< final space and solution
  DenseVector<T> load;                            ///< interior nodes
  DenseVector<T> reference;                       ///< u_h, interior nodes
  std::vector<int> online_count_per_vertex;
  T max_galerkin_defect = T(0);  ///< max over solves of |p^T (A u - b)| / ||b||
  int dropped_total = 0;
};

/// Runs the enrichment loop: solve on the offline space, then repeat
/// assess / select / enrich / re-solve until the indicator norm drops below
/// tol_abs, the selection comes back empty, or max_iters iterations ran.
/// Records one table row per iteration, including the final one.
template <typename T>
RunResult<T> run_enrichment(const DiscreteProblem<T>& problem,
                            const std::vector<BasisFunction<T>>& offline_bases,
                            const SourceTerm<T>& source, T theta, int layers,
                            int max_iters, T tol_abs) {
  RunResult<T> result;
  result.load = assemble_load(source, problem.medium, problem.grid);
  result.reference = solve_spd(problem.stiffness, result.load, T(kReferenceSolveTol));
  result.online_count_per_vertex.assign(problem.grid.num_coarse_vertices(), 0);

  const T load_norm = result.load.norm();
  auto track_defect = [&](const DenseVector<T>& u_ms) {
    if (load_norm > T(0)) {
      const T defect =
          galerkin_defect(result.state.space, problem.stiffness, result.load, u_ms) /
          load_norm;
      result.max_galerkin_defect = std::max(result.max_galerkin_defect, defect);
    }
  };

  result.state.space = make_multiscale_space(problem.grid, offline_bases);
  {
    const CoarseSolveResult<T> solve =
        solve_coarse(result.state.space, problem.stiffness, result.load);
    if (!solve.dropped.empty()) {
      throw DependenceError("run_enrichment: offline basis is numerically dependent");
    }
    result.state.coefficients = solve.coefficients;
    result.state.u_ms = solve.u_ms;
  }
  track_defect(result.state.u_ms);

  int added_last = 0;
  for (int m = 0;; ++m) {
    const ResidualState<T> residual =
        assess_residual(problem, result.state.u_ms, result.load, theta);
    const auto [l2, energy] =
        compute_errors(result.reference, result.state.u_ms, problem.stiffness, problem.mass);
    result.records.push_back({m, result.state.space.dof(), added_last, l2, energy,
                              residual.sum_sq});
    result.residual_states.push_back(residual);

    if (m >= max_iters) break;
    if (tol_abs > T(0) && std::sqrt(residual.sum_sq) < tol_abs) break;
    if (residual.selected.empty()) {
      result.state.converged = true;
      break;
    }

    EnrichOutcome<T> outcome =
        apply_enrichment(result.state, problem, result.load, residual, layers);
    result.dropped_total += outcome.dropped;
    added_last = outcome.added;
    for (int v : residual.selected) result.online_count_per_vertex[v] += 1;
    for (int v : outcome.dropped_vertices) {
      if (v >= 0) result.online_count_per_vertex[v] -= 1;
    }
    track_defect(result.state.u_ms);
  }
  return result;
}

}  // namespace cemgms
