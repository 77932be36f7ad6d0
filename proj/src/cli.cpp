// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cemgms/config.hpp"
#include "cemgms/experiment.hpp"
#include "cemgms/io.hpp"
#include "cemgms/medium.hpp"

namespace cemgms {

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides) {
  ExperimentConfig config = parse_config_file(config_path);
  for (const auto& assignment : overrides) apply_override(config, assignment);
  validate_config(config);

  const ExperimentArtifacts artifacts = run_experiment(config, overrides);
  std::cout << format_results_table(artifacts.records);
  std::cout << "results written to " << artifacts.out_dir << "\n";
  if (artifacts.dropped_total > 0) {
    std::cerr << "warning: dependence guard dropped " << artifacts.dropped_total
              << " online basis function(s)\n";
  }
  return 0;
}

int cmd_medium_generate(int coarse_nx, int coarse_ny, int fine_per_coarse, double contrast,
                        const std::string& out_path) {
  const GridHierarchy grid = build_hierarchy(coarse_nx, coarse_ny, fine_per_coarse);
  const Medium<double> medium = generate_default_medium<double>(grid, contrast);
  save_medium(medium, out_path);
  std::cout << "wrote " << out_path << " (" << medium.nx << "x" << medium.ny
            << " cells, contrast " << contrast << ")\n";
  return 0;
}

int cmd_medium_convert(const std::string& in_path, const std::string& out_path) {
  const Medium<double> medium = read_cell_field_file<double>(in_path, true);
  save_medium(medium, out_path);
  std::cout << "validated " << in_path << ", wrote normalized field to " << out_path << "\n";
  return 0;
}

void require_artifact(const fs::path& path) {
  if (!fs::exists(path)) {
    throw IoError("missing run artifact: " + path.string());
  }
}

int cmd_export(const std::string& run_dir, const std::string& what,
               std::string out_dir) {
  const fs::path run(run_dir);
  if (!fs::exists(run / "results.csv")) {
    throw IoError(run_dir + " is not a completed run directory (no results.csv)");
  }
  if (out_dir.empty()) out_dir = (run / "export").string();
  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  std::vector<std::string> written;
  if (what == "fields") {
    require_artifact(run / "u_h.csv");
    require_artifact(run / "u_ms.csv");
    const FieldData u_h = read_field_csv((run / "u_h.csv").string());
    const FieldData u_ms = read_field_csv((run / "u_ms.csv").string());
    if (u_h.nx != u_ms.nx || u_h.ny != u_ms.ny) {
      throw IoError("u_h.csv and u_ms.csv have mismatched dimensions");
    }
    write_field_csv((out / "u_h.csv").string(), u_h.nx, u_h.ny, u_h.values);
    write_field_csv((out / "u_ms.csv").string(), u_ms.nx, u_ms.ny, u_ms.values);
    written = {"u_h.csv", "u_ms.csv"};
  } else if (what == "indicators") {
    require_artifact(run / "online_counts.csv");
    std::vector<fs::path> files = {run / "online_counts.csv"};
    for (const auto& entry : fs::directory_iterator(run)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("indicators_iter", 0) == 0) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      fs::copy_file(file, out / file.filename(), fs::copy_options::overwrite_existing);
      written.push_back(file.filename().string());
    }
  } else if (what == "bases") {
    require_artifact(run / "bases");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(run / "bases")) files.push_back(entry.path());
    if (files.empty()) throw IoError("missing run artifact: no basis files under bases/");
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      fs::copy_file(file, out / file.filename(), fs::copy_options::overwrite_existing);
      written.push_back(file.filename().string());
    }
  } else {
    throw ConfigError("export: unknown target '" + what + "' (fields|bases|indicators)");
  }

  std::cout << "exported " << written.size() << " file(s) to " << out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"CEM-GMsFEM solver for high-contrast elliptic problems"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run an experiment from a config file");
  std::string config_path;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "Path to a key = value config file")->required();
  run->add_option("--set", overrides, "Override a config key (key=value, repeatable)");

  // medium
  auto* medium = app.add_subcommand("medium", "Generate or validate coefficient fields");
  auto* generate = medium->add_subcommand("generate", "Write the built-in high-contrast field");
  int coarse_nx = 10, coarse_ny = 10, fine_per_coarse = 20;
  double contrast = 1e4;
  std::string medium_out;
  generate->add_option("--coarse-nx", coarse_nx, "Coarse cells along x")->check(CLI::PositiveNumber);
  generate->add_option("--coarse-ny", coarse_ny, "Coarse cells along y")->check(CLI::PositiveNumber);
  generate->add_option("--fine-per-coarse", fine_per_coarse, "Fine cells per coarse cell per axis")
      ->check(CLI::PositiveNumber);
  generate->add_option("--contrast", contrast, "Coefficient value inside features");
  generate->add_option("--out", medium_out, "Output path")->required();
  auto* convert = medium->add_subcommand("convert", "Validate and normalize a field file");
  std::string convert_in, convert_out;
  convert->add_option("--in", convert_in, "Input field file")->required();
  convert->add_option("--out", convert_out, "Output path")->required();
  medium->require_subcommand(1);

  // export
  auto* exp = app.add_subcommand("export", "Extract plot-ready CSVs from a run directory");
  std::string run_dir, what, export_out;
  exp->add_option("--run-dir", run_dir, "Completed run directory")->required();
  exp->add_option("--what", what, "fields | bases | indicators")->required();
  exp->add_option("--out", export_out, "Output directory (default: <run-dir>/export)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (app.got_subcommand(run)) return cmd_run(config_path, overrides);
    if (app.got_subcommand(medium)) {
      if (medium->got_subcommand(generate)) {
        return cmd_medium_generate(coarse_nx, coarse_ny, fine_per_coarse, contrast, medium_out);
      }
      return cmd_medium_convert(convert_in, convert_out);
    }
    return cmd_export(run_dir, what, export_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cemgms
