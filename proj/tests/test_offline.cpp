// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cemgms/offline.hpp"
#include "test_helpers.hpp"

using namespace cemgms;
using cemgms::test::energy_norm;
using cemgms::test::expand_to_interior;
using cemgms::test::medium_from_rects;
using cemgms::test::random_vector;
using cemgms::test::uniform_medium;

namespace {

struct Setup {
  GridHierarchy grid;
  Medium<double> medium;
  PartitionOfUnity<double> pou;
  AuxiliarySpace<double> aux;

  Setup(int nx, int ny, int fpc, Medium<double> m, int num_aux)
      : grid(build_hierarchy(nx, ny, fpc)), medium(std::move(m)) {
    pou = build_partition_of_unity<double>(grid);
    aux = build_auxiliary_space(grid, medium, pou, num_aux);
  }
};

}  // namespace

TEST_CASE("auxiliary space structure on a uniform medium") {
  const GridHierarchy g = build_hierarchy(4, 4, 4);
  Setup s(4, 4, 4, uniform_medium(g), 3);

  CHECK(s.aux.dimension() == 16 * 3);
  double min_excluded = s.aux.eigenvalues[0][3];
  for (int e = 0; e < s.aux.num_elements(); ++e) {
    const auto& values = s.aux.eigenvalues[e];
    // constants are in the kernel of the local energy form
    CHECK(std::abs(values[0]) < 1e-10);
    const auto phi0 = s.aux.phi[e].col(0);
    CHECK((phi0.array() - phi0.mean()).abs().maxCoeff() < 1e-8 * std::abs(phi0.mean()));
    for (int j = 0; j + 1 <= 3; ++j) CHECK(values[j] <= values[j + 1]);
    min_excluded = std::min(min_excluded, values[3]);
  }
  CHECK(s.aux.spectral_gap == min_excluded);
  CHECK(s.aux.spectral_gap > 0.0);

  CHECK_THROWS_AS(build_auxiliary_space(s.grid, s.medium, s.pou, 0), std::invalid_argument);
}

TEST_CASE("eigenvector orthonormality transfers to stored blocks") {
  const GridHierarchy g = build_hierarchy(3, 3, 4);
  Setup s(3, 3, 4, medium_from_rects(g, 1e3, {{0.35, 0.35, 0.7, 0.45}}), 3);
  for (int e = 0; e < s.aux.num_elements(); ++e) {
    // phi^T (S phi) = identity within tight tolerance
    const DenseMatrix<double> gram = s.aux.phi[e].transpose() * s.aux.s_phi[e];
    CHECK((gram - DenseMatrix<double>::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("pi projector reproduces members and is idempotent") {
  const GridHierarchy g = build_hierarchy(3, 3, 3);
  Setup s(3, 3, 3, medium_from_rects(g, 100.0, {{0.4, 0.1, 0.5, 0.6}}), 2);
  const PiProjector<double> pi(s.aux, s.grid);

  // a pure member: coefficient 1 on one (element, j) slot
  for (int slot : {0, 5, s.aux.dimension() - 1}) {
    DenseVector<double> coeffs = DenseVector<double>::Zero(pi.dimension());
    coeffs[slot] = 1.0;
    const DenseVector<double> back = pi.project_member(coeffs);
    CHECK((back - coeffs).cwiseAbs().maxCoeff() < 1e-12);
  }

  // idempotency on random whole-domain vectors
  for (int trial = 0; trial < 20; ++trial) {
    const DenseVector<double> v = random_vector(s.grid.num_fine_nodes());
    const DenseVector<double> once = pi.project(v);
    const DenseVector<double> twice = pi.project_member(once);
    CHECK((twice - once).norm() <= 1e-12 * once.norm());
  }
}

TEST_CASE("pi projector annihilates s-orthogonal functions") {
  // single-element grid: the member realization is exact, so v minus its
  // projection is exactly s-orthogonal to the auxiliary space
  const GridHierarchy g = build_hierarchy(1, 1, 4);
  Setup s(1, 1, 4, uniform_medium(g), 3);
  const PiProjector<double> pi(s.aux, s.grid);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseVector<double> v = random_vector(s.grid.num_fine_nodes());
    const DenseVector<double> w = v - pi.realize(pi.project(v));
    CHECK(pi.project(w).cwiseAbs().maxCoeff() < 1e-12 * v.norm());
  }
}

TEST_CASE("cem local operator is SPD and the solver inverts it") {
  const GridHierarchy g = build_hierarchy(4, 4, 4);
  Setup s(4, 4, 4, medium_from_rects(g, 1e4, {{0.3, 0.3, 0.45, 0.7}}), 3);
  const Region support = oversample(s.grid, coarse_element_region(s.grid, 5), 1);
  const CemLocalSolver<double> solver(s.grid, s.medium, s.aux, support);

  const int n = static_cast<int>(solver.interior_nodes().size());
  for (int trial = 0; trial < 10; ++trial) {
    const DenseVector<double> x = random_vector(n);
    CHECK(x.dot(solver.apply(x)) > 0.0);
  }
  for (int trial = 0; trial < 5; ++trial) {
    const DenseVector<double> b = random_vector(n);
    const DenseVector<double> x = solver.solve(b);
    CHECK((solver.apply(x) - b).norm() <= 1e-10 * b.norm());
  }
  CHECK_THROWS_AS(solver.aux_rhs(15, 0), std::invalid_argument);  // element outside
}

TEST_CASE("offline basis satisfies its defining equation") {
  const GridHierarchy g = build_hierarchy(4, 4, 4);
  Setup s(4, 4, 4, medium_from_rects(g, 1e3, {{0.3, 0.55, 0.7, 0.65}}), 2);
  const PiProjector<double> pi(s.aux, s.grid);
  const SparseMatrix<double> a_full =
      assemble_stiffness(s.medium, s.grid, whole_domain(s.grid), false);

  const auto bases = build_cem_basis(s.aux, s.grid, s.medium, 1);
  REQUIRE(bases.size() == static_cast<size_t>(s.aux.dimension()));

  for (int pick : {0, 9, 25}) {
    const auto& basis = bases[pick];
    const int element = basis.owner_element, j = basis.aux_index;
    const auto interior = interior_nodes_in(s.grid, basis.support);
    const DenseVector<double> psi_full =
        scatter_nodes(basis.values, interior, s.grid.num_fine_nodes());
    const DenseVector<double> psi_pi = pi.project(psi_full);

    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      DenseVector<double> v_local = random_vector(interior.size());
      const DenseVector<double> v_full =
          scatter_nodes(v_local, interior, s.grid.num_fine_nodes());
      const DenseVector<double> v_pi = pi.project(v_full);
      // a(psi, v) + s(pi psi, pi v) - s(phi_j, pi v) = 0
      const double lhs = psi_full.dot(a_full * v_full) + psi_pi.dot(v_pi) -
                         v_pi[element * s.aux.num_per_element + j];
      const double scale = std::abs(psi_full.dot(a_full * v_full)) + std::abs(psi_pi.dot(v_pi)) +
                           std::abs(v_pi[element * s.aux.num_per_element + j]);
      worst = std::max(worst, std::abs(lhs) / std::max(scale, 1e-30));
    }
    CHECK(worst < 1e-10);
  }

  CHECK_THROWS_AS(build_cem_basis(s.aux, s.grid, s.medium, 0), std::invalid_argument);
}

TEST_CASE("global basis equals the local one when the patch fills the domain") {
  const GridHierarchy g = build_hierarchy(4, 4, 4);
  Setup s(4, 4, 4, medium_from_rects(g, 1e4, {{0.3, 0.3, 0.45, 0.7}}), 3);
  const SparseMatrix<double> a =
      assemble_stiffness(s.medium, s.grid, whole_domain(s.grid), true);

  const auto local = build_cem_basis(s.aux, s.grid, s.medium, 4);  // K+ = Omega everywhere
  for (int pick : {0, 7 * 3 + 1, 15 * 3 + 2}) {
    const auto& basis = local[pick];
    const auto global =
        build_global_basis(s.aux, s.grid, s.medium, basis.owner_element, basis.aux_index);
    const DenseVector<double> diff =
        expand_to_interior(s.grid, basis.support, basis.values) -
        expand_to_interior(s.grid, global.support, global.values);
    const DenseVector<double> ref = expand_to_interior(s.grid, global.support, global.values);
    CHECK(energy_norm(a, diff) <= 1e-10 * energy_norm(a, ref));
  }
}

TEST_CASE("localization error decreases monotonically with the patch size") {
  const GridHierarchy g = build_hierarchy(6, 6, 4);
  Setup s(6, 6, 4, medium_from_rects(g, 100.0, {{0.35, 0.3, 0.45, 0.55}, {0.6, 0.6, 0.75, 0.68}}),
          2);
  const SparseMatrix<double> a =
      assemble_stiffness(s.medium, s.grid, whole_domain(s.grid), true);

  const int element = s.grid.coarse_cell_id(2, 2);
  const auto global = build_global_basis(s.aux, s.grid, s.medium, element, 0);
  const DenseVector<double> psi_glo =
      expand_to_interior(s.grid, global.support, global.values);

  double previous = -1.0;
  for (int layers = 1; layers <= 3; ++layers) {
    const Region support = oversample(s.grid, coarse_element_region(s.grid, element), layers);
    const CemLocalSolver<double> solver(s.grid, s.medium, s.aux, support);
    BasisFunction<double> ms;
    ms.support = support;
    ms.values = solver.solve(solver.aux_rhs(element, 0));
    const double err =
        energy_norm(a, psi_glo - expand_to_interior(s.grid, support, ms.values));
    if (previous >= 0.0) CHECK(err < previous);
    previous = err;
  }
}
