// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/experiment.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cemgms/io.hpp"
#include "cemgms/multiscale.hpp"
#include "cemgms/offline.hpp"

namespace cemgms {

namespace fs = std::filesystem;

namespace {

SourceTerm<double> make_source(const ExperimentConfig& config, const GridHierarchy& grid) {
  if (config.source == "f1") return SourceTerm<double>::f1();
  if (config.source == "f2") return SourceTerm<double>::f2();
  if (config.source == "f3") return SourceTerm<double>::f3();
  const std::string path = config.source.substr(5);  // file:<path>
  return SourceTerm<double>::from_grid(load_cell_field<double>(grid, path));
}

Medium<double> make_medium(const ExperimentConfig& config, const GridHierarchy& grid) {
  if (config.medium == "default") {
    return generate_default_medium<double>(grid, config.contrast);
  }
  return load_medium<double>(grid, config.medium.substr(5));
}

DenseVector<double> to_full_field(const GridHierarchy& g, const DenseVector<double>& interior) {
  DenseVector<double> full = DenseVector<double>::Zero(g.num_fine_nodes());
  for (int k = 0; k < g.num_interior_nodes(); ++k) full[g.interior_node(k)] = interior[k];
  return full;
}

std::string basis_file_name(const BasisFunction<double>& basis, size_t index) {
  char buf[96];
  if (basis.kind == BasisFunction<double>::Kind::Online) {
    std::snprintf(buf, sizeof(buf), "basis_%04zu_online_iter%d_v%d.csv", index,
                  basis.iteration, basis.owner_vertex);
  } else {
    std::snprintf(buf, sizeof(buf), "basis_%04zu_offline_e%d_j%d.csv", index,
                  basis.owner_element, basis.aux_index);
  }
  return buf;
}

}  // namespace

ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::vector<std::string>& override_echoes) {
  validate_config(config);

  const GridHierarchy grid =
      build_hierarchy(config.coarse_nx, config.coarse_ny, config.fine_per_coarse);
  const Medium<double> medium = make_medium(config, grid);
  const SourceTerm<double> source = make_source(config, grid);

  const DiscreteProblem<double> problem =
      build_discrete_problem(grid, medium, config.num_aux);
  const std::vector<BasisFunction<double>> offline =
      build_cem_basis(problem.aux, grid, problem.medium, config.layers);

  const RunResult<double> result =
      run_enrichment(problem, offline, source, config.theta, config.layers,
                     config.max_iters, config.tol_abs);

  fs::create_directories(config.out_dir);
  const fs::path out(config.out_dir);

  write_results_csv((out / "results.csv").string(), result.records);

  {
    std::ofstream manifest(out / "manifest.cfg");
    for (const auto& echo : override_echoes) manifest << "# override: " << echo << "\n";
    manifest << serialize_config(config);
  }

  if (config.exports_contain("fields")) {
    const int nodes_x = grid.fine_nx + 1, nodes_y = grid.fine_ny + 1;
    write_field_csv((out / "u_h.csv").string(), nodes_x, nodes_y,
                    to_full_field(grid, result.reference));
    write_field_csv((out / "u_ms.csv").string(), nodes_x, nodes_y,
                    to_full_field(grid, result.state.u_ms));
  }

  if (config.exports_contain("indicators")) {
    for (size_t m = 0; m < result.residual_states.size(); ++m) {
      char name[48];
      std::snprintf(name, sizeof(name), "indicators_iter%zu.csv", m);
      write_indicators_csv((out / name).string(), result.residual_states[m].indicators,
                           result.residual_states[m].selected);
    }
    write_count_map_csv((out / "online_counts.csv").string(), grid.coarse_nx + 1,
                        grid.coarse_ny + 1, result.online_count_per_vertex);
  }

  if (config.exports_contain("bases")) {
    fs::create_directories(out / "bases");
    const auto& bases = result.state.space.bases;
    for (size_t i = 0; i < bases.size(); ++i) {
      const DenseVector<double> full = scatter_nodes(
          bases[i].values, interior_nodes_in(grid, bases[i].support), grid.num_fine_nodes());
      write_field_csv((out / "bases" / basis_file_name(bases[i], i)).string(),
                      grid.fine_nx + 1, grid.fine_ny + 1, full);
    }
  }

  ExperimentArtifacts artifacts;
  artifacts.records = result.records;
  artifacts.out_dir = config.out_dir;
  artifacts.dropped_total = result.dropped_total;
  artifacts.max_galerkin_defect = result.max_galerkin_defect;
  artifacts.converged = result.state.converged;
  return artifacts;
}

}  // namespace cemgms
