// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "cemgms/driver.hpp"
#include "cemgms/online.hpp"
#include "test_helpers.hpp"

using namespace cemgms;
using cemgms::test::energy_norm;
using cemgms::test::expand_to_interior;
using cemgms::test::medium_from_rects;
using cemgms::test::random_vector;
using cemgms::test::uniform_medium;

namespace {

DiscreteProblem<double> toy_problem(int nx, int fpc, double contrast, int num_aux) {
  const GridHierarchy g = build_hierarchy(nx, nx, fpc);
  Medium<double> m = contrast > 1.0
                         ? medium_from_rects(g, contrast, {{0.3, 0.3, 0.45, 0.7}})
                         : uniform_medium(g);
  return build_discrete_problem(g, std::move(m), num_aux);
}

}  // namespace

TEST_CASE("residual of the exact fine solution vanishes") {
  auto p = toy_problem(4, 4, 1e3, 2);
  const DenseVector<double> b =
      assemble_load(SourceTerm<double>::f1(), p.medium, p.grid);
  const DenseVector<double> u_h = solve_spd(p.stiffness, b, 1e-10);
  CHECK(compute_residual(p.stiffness, u_h, b).norm() <= 1e-9 * b.norm());

  const DenseVector<double> zero = DenseVector<double>::Zero(b.size());
  CHECK((compute_residual(p.stiffness, zero, b) + b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("galerkin residual is orthogonal to the space") {
  auto p = toy_problem(4, 4, 1e3, 2);
  const DenseVector<double> b =
      assemble_load(SourceTerm<double>::f2(), p.medium, p.grid);
  const auto offline = build_cem_basis(p.aux, p.grid, p.medium, 1);
  const auto space = make_multiscale_space(p.grid, offline);
  const auto solve = solve_coarse(space, p.stiffness, b);
  const DenseVector<double> rho = compute_residual(p.stiffness, solve.u_ms, b);
  CHECK((space.prolongation.transpose() * rho).cwiseAbs().maxCoeff() <= 1e-10 * b.norm());
}

TEST_CASE("local indicator basics") {
  auto p = toy_problem(4, 2, 1.0, 1);
  const int n = p.grid.num_interior_nodes();

  const DenseVector<double> zero = DenseVector<double>::Zero(n);
  CHECK(local_indicator(p.grid, p.medium, zero, 5) == 0.0);

  // residual supported away from a corner neighborhood gives a zero indicator
  DenseVector<double> far = DenseVector<double>::Zero(n);
  const int far_node = p.grid.fine_node_id(p.grid.fine_nx - 1, p.grid.fine_ny - 1);
  far[p.grid.interior_index(far_node)] = 1.0;
  CHECK(local_indicator(p.grid, p.medium, far, p.grid.coarse_vertex_id(0, 0)) == 0.0);
}

TEST_CASE("local indicator matches the dense Riesz oracle") {
  auto p = toy_problem(4, 2, 1e2, 1);
  const DenseVector<double> rho = random_vector(p.grid.num_interior_nodes());
  for (int vertex : {p.grid.coarse_vertex_id(2, 2), p.grid.coarse_vertex_id(0, 0),
                     p.grid.coarse_vertex_id(3, 1)}) {
    const Region omega = vertex_neighborhood(p.grid, vertex);
    const auto nodes = interior_nodes_in(p.grid, omega);
    Eigen::VectorXd z(nodes.size());
    for (size_t k = 0; k < nodes.size(); ++k) {
      z[k] = rho[p.grid.interior_index(nodes[k])];
    }
    // sup_z r(v)/||v||_a via the spectral square root of the local stiffness
    const Eigen::MatrixXd a_dense(assemble_stiffness(p.medium, p.grid, omega, true));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a_dense);
    const Eigen::VectorXd half = es.operatorInverseSqrt() * z;
    const double expected = half.norm();
    CHECK(local_indicator(p.grid, p.medium, rho, vertex) ==
          doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("selection rule worked example") {
  DenseVector<double> deltas(3);
  deltas << 2.0, 1.0, 1.0;
  // total = 6; dropping both ones leaves 2 < 0.5 * 6, so one region suffices
  const auto selected = select_regions(deltas, 0.5);
  REQUIRE(selected.size() == 1);
  CHECK(selected[0] == 0);
}

TEST_CASE("selection rule edge cases") {
  DenseVector<double> deltas(4);
  deltas << 0.5, 2.0, 0.0, 1.0;
  SUBCASE("theta zero selects every nonzero indicator") {
    const auto selected = select_regions(deltas, 0.0);
    CHECK(selected == std::vector<int>{1, 3, 0});
  }
  SUBCASE("all-zero indicators select nothing") {
    const DenseVector<double> zeros = DenseVector<double>::Zero(4);
    CHECK(select_regions(zeros, 0.0).empty());
    CHECK(select_regions(zeros, 0.5).empty());
  }
  SUBCASE("near-zero indicators count as zero") {
    DenseVector<double> tiny(3);
    tiny << 1.0, 1e-16, 0.0;
    CHECK(select_regions(tiny, 0.0) == std::vector<int>{0});
  }
  SUBCASE("theta out of range") {
    CHECK_THROWS_AS(select_regions(deltas, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(select_regions(deltas, -0.1), std::invalid_argument);
  }
}

TEST_CASE("selection minimality property") {
  std::mt19937 gen(7);
  std::uniform_real_distribution<double> value(0.0, 3.0);
  std::uniform_real_distribution<double> thetas(0.05, 0.95);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 12;
    DenseVector<double> deltas(n);
    for (int i = 0; i < n; ++i) deltas[i] = value(gen);
    const double theta = thetas(gen);
    const auto selected = select_regions(deltas, theta);
    const int k = static_cast<int>(selected.size());

    std::vector<double> sorted(deltas.data(), deltas.data() + n);
    std::sort(sorted.rbegin(), sorted.rend());
    const double total =
        std::accumulate(sorted.begin(), sorted.end(), 0.0,
                        [](double acc, double d) { return acc + d * d; });
    auto tail = [&](int count) {
      double t = 0.0;
      for (int i = count; i < n; ++i) t += sorted[i] * sorted[i];
      return t;
    };
    if (total > 0.0) {
      CHECK(tail(k) < theta * total);
      if (k >= 1) CHECK_FALSE(tail(k - 1) < theta * total);
    }

    // permuting the list permutes the selection
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    DenseVector<double> shuffled(n);
    for (int i = 0; i < n; ++i) shuffled[perm[i]] = deltas[i];
    const auto selected_shuffled = select_regions(shuffled, theta);
    REQUIRE(selected_shuffled.size() == selected.size());
    std::multiset<double> a, b;
    for (int i : selected) a.insert(deltas[i]);
    for (int i : selected_shuffled) b.insert(shuffled[i]);
    CHECK(a == b);
  }
}

TEST_CASE("ties break by ascending vertex index") {
  DenseVector<double> deltas(5);
  deltas << 1.0, 2.0, 1.0, 2.0, 0.5;
  const auto selected = select_regions(deltas, 0.0);
  CHECK(selected == std::vector<int>{1, 3, 0, 2, 4});
}

TEST_CASE("online basis for a zero residual is zero") {
  auto p = toy_problem(4, 4, 1e2, 2);
  const DenseVector<double> zero = DenseVector<double>::Zero(p.grid.num_interior_nodes());
  const auto basis = build_online_basis(p.aux, p.grid, p.medium, p.pou, zero,
                                        p.grid.coarse_vertex_id(2, 2), 2);
  CHECK(basis.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(basis.kind == BasisFunction<double>::Kind::Online);
}

TEST_CASE("online basis satisfies its defining equation") {
  auto p = toy_problem(4, 4, 1e3, 2);
  const DenseVector<double> b = assemble_load(SourceTerm<double>::f1(), p.medium, p.grid);
  const auto offline = build_cem_basis(p.aux, p.grid, p.medium, 1);
  const auto space = make_multiscale_space(p.grid, offline);
  const auto solve = solve_coarse(space, p.stiffness, b);
  const DenseVector<double> rho = compute_residual(p.stiffness, solve.u_ms, b);

  const PiProjector<double> pi(p.aux, p.grid);
  const int vertex = p.grid.coarse_vertex_id(2, 2);
  const auto beta = build_online_basis(p.aux, p.grid, p.medium, p.pou, rho, vertex, 1);
  const auto interior = interior_nodes_in(p.grid, beta.support);
  const DenseVector<double> beta_full =
      scatter_nodes(beta.values, interior, p.grid.num_fine_nodes());
  const DenseVector<double> beta_pi = pi.project(beta_full);
  const SparseMatrix<double> a_full =
      assemble_stiffness(p.medium, p.grid, whole_domain(p.grid), false);

  // chi-weighted residual functional
  const auto omega_nodes = fine_nodes_in(p.grid, p.pou.neighborhoods[vertex]);
  const DenseVector<double> chi_full =
      scatter_nodes(p.pou.chi[vertex], omega_nodes, p.grid.num_fine_nodes());

  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const DenseVector<double> v_local = random_vector(interior.size());
    const DenseVector<double> v_full =
        scatter_nodes(v_local, interior, p.grid.num_fine_nodes());
    const DenseVector<double> v_pi = pi.project(v_full);
    double r_chi_v = 0.0;
    for (int k = 0; k < p.grid.num_interior_nodes(); ++k) {
      const int node = p.grid.interior_node(k);
      r_chi_v += rho[k] * chi_full[node] * v_full[node];
    }
    const double lhs = beta_full.dot(a_full * v_full) + beta_pi.dot(v_pi) - r_chi_v;
    const double scale = std::abs(beta_full.dot(a_full * v_full)) +
                         std::abs(beta_pi.dot(v_pi)) + std::abs(r_chi_v);
    worst = std::max(worst, std::abs(lhs) / std::max(scale, 1e-30));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("oversampled online basis approaches the global one") {
  auto p = toy_problem(8, 3, 1e2, 2);
  const DenseVector<double> b = assemble_load(SourceTerm<double>::f2(), p.medium, p.grid);
  const auto offline = build_cem_basis(p.aux, p.grid, p.medium, 1);
  const auto space = make_multiscale_space(p.grid, offline);
  const auto solve = solve_coarse(space, p.stiffness, b);
  const DenseVector<double> rho = compute_residual(p.stiffness, solve.u_ms, b);

  const int vertex = p.grid.coarse_vertex_id(4, 4);
  const auto global = global_online_basis(p.aux, p.grid, p.medium, p.pou, rho, vertex);
  const DenseVector<double> beta_glo =
      expand_to_interior(p.grid, global.support, global.values);

  double previous = -1.0;
  for (int layers = 1; layers <= 3; ++layers) {
    const auto beta = build_online_basis(p.aux, p.grid, p.medium, p.pou, rho, vertex, layers);
    const double err = energy_norm(
        p.stiffness, beta_glo - expand_to_interior(p.grid, beta.support, beta.values));
    if (previous >= 0.0) CHECK(err < previous);
    previous = err;
  }

  // with the patch covering the whole domain the two coincide
  const auto full = build_online_basis(p.aux, p.grid, p.medium, p.pou, rho, vertex, 5);
  const double diff = energy_norm(
      p.stiffness, beta_glo - expand_to_interior(p.grid, full.support, full.values));
  CHECK(diff <= 1e-10 * energy_norm(p.stiffness, beta_glo));
}

TEST_CASE("enrich_step grows the space and reduces the error") {
  auto p = toy_problem(4, 4, 1e3, 2);
  const DenseVector<double> b = assemble_load(SourceTerm<double>::f1(), p.medium, p.grid);
  const DenseVector<double> u_h = solve_spd(p.stiffness, b, 1e-10);

  EnrichmentState<double> state;
  state.space = make_multiscale_space(p.grid, build_cem_basis(p.aux, p.grid, p.medium, 1));
  auto solve = solve_coarse(state.space, p.stiffness, b);
  state.coefficients = solve.coefficients;
  state.u_ms = solve.u_ms;

  double previous_error = energy_norm(p.stiffness, u_h - state.u_ms);
  int expected_dof = state.space.dof();
  for (int m = 0; m < 2; ++m) {
    const auto outcome = enrich_step(state, p, b, 0.0, 1);
    CHECK_FALSE(state.converged);
    CHECK(outcome.added > 0);
    expected_dof += outcome.added;
    CHECK(state.space.dof() == expected_dof);
    const double error = energy_norm(p.stiffness, u_h - state.u_ms);
    CHECK(error <= previous_error + 1e-10);
    previous_error = error;
  }
  CHECK(state.iteration == 2);
}

TEST_CASE("zero load flags convergence immediately") {
  auto p = toy_problem(3, 3, 1.0, 1);
  const DenseVector<double> b = DenseVector<double>::Zero(p.grid.num_interior_nodes());
  EnrichmentState<double> state;
  state.space = make_multiscale_space(p.grid, build_cem_basis(p.aux, p.grid, p.medium, 1));
  const auto solve = solve_coarse(state.space, p.stiffness, b);
  state.u_ms = solve.u_ms;
  state.coefficients = solve.coefficients;

  const auto outcome = enrich_step(state, p, b, 0.0, 1);
  CHECK(state.converged);
  CHECK(outcome.added == 0);
  CHECK(state.iteration == 0);
}
