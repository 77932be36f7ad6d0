// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cemgms/config.hpp"
#include "cemgms/driver.hpp"

namespace cemgms {

/// What a completed run left behind.
struct ExperimentArtifacts {
  std::vector<ErrorRecord<double>> records;
  std::string out_dir;
  int dropped_total = 0;
  double max_galerkin_defect = 0.0;
  bool converged = false;
};

/// Runs the configured experiment end to end and writes its artifacts under
/// config.out_dir: results.csv and manifest.cfg always; u_h.csv/u_ms.csv,
/// per-iteration indicator dumps with the online-count map, and per-basis
/// fields according to the exports flags. `override_echoes` lines are
/// recorded as comments at the top of the manifest. Deterministic for a
/// fixed config.
ExperimentArtifacts run_experiment(const ExperimentConfig& config,
                                   const std::vector<std::string>& override_echoes = {});

}  // namespace cemgms
