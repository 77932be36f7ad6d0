// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cemgms {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Experiment knobs with the default setup: 10x10 coarse grid, 20 fine cells
/// per coarse cell, 3 auxiliary functions, 2 oversampling layers, uniform
/// enrichment (theta = 0) for 2 iterations on source f1 over the built-in
/// medium at contrast 1e4.
struct ExperimentConfig {
  int coarse_nx = 10;
  int coarse_ny = 10;
  int fine_per_coarse = 20;
  int num_aux = 3;
  int layers = 2;
  double theta = 0.0;
  int max_iters = 2;
  double tol_abs = 0.0;
  std::string source = "f1";      ///< f1 | f2 | f3 | file:<path>
  std::string medium = "default"; ///< default | file:<path>
  double contrast = 1e4;
  std::string out_dir = "out";
  std::vector<std::string> exports = {"fields", "indicators"};  ///< of {fields, bases, indicators}

  bool exports_contain(const std::string& what) const;
};

/// Parses "key = value" lines; blank lines and '#' comments are ignored.
/// `origin` names the source in error messages.
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

ExperimentConfig parse_config_file(const std::string& path);

/// Applies one "key=value" override on top of a parsed config.
void apply_override(ExperimentConfig& config, const std::string& assignment);

/// Range and syntax validation; throws ConfigError naming the offending key.
void validate_config(const ExperimentConfig& config);

/// Canonical "key = value" rendering; parse_config_text inverts it.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace cemgms
