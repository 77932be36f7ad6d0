// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "cemgms/core.hpp"
#include "cemgms/driver.hpp"

namespace cemgms {

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Rectangular scalar field in the export format: "nx ny" header, then ny
/// rows of nx comma-separated values, bottom row first.
struct FieldData {
  int nx = 0;
  int ny = 0;
  DenseVector<double> values;  ///< row-major
};

void write_field_csv(const std::string& path, int nx, int ny,
                     const DenseVector<double>& values);

FieldData read_field_csv(const std::string& path);

/// results.csv: header
/// iteration,dof,online_added,l2_error_pct,energy_error_pct,sum_delta_sq
/// and one row per iteration, 12 significant digits.
void write_results_csv(const std::string& path,
                       const std::vector<ErrorRecord<double>>& records);

std::string format_results_table(const std::vector<ErrorRecord<double>>& records);

/// Per-iteration indicator dump: header vertex,delta,selected.
void write_indicators_csv(const std::string& path, const DenseVector<double>& deltas,
                          const std::vector<int>& selected);

/// Per-coarse-vertex integer map (e.g. online-basis counts) in the field
/// layout.
void write_count_map_csv(const std::string& path, int nx, int ny,
                         const std::vector<int>& counts);

}  // namespace cemgms
