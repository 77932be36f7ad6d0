// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace cemgms {

namespace {

std::string fmt(double v, const char* spec) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

void write_field_csv(const std::string& path, int nx, int ny,
                     const DenseVector<double>& values) {
  if (values.size() != static_cast<Eigen::Index>(nx) * ny) {
    throw IoError("write_field_csv: value count does not match " + std::to_string(nx) +
                  "x" + std::to_string(ny));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << nx << " " << ny << "\n";
  for (int row = 0; row < ny; ++row) {
    for (int col = 0; col < nx; ++col) {
      out << fmt(values[static_cast<Eigen::Index>(row) * nx + col], "%.17g")
          << (col + 1 == nx ? "" : ",");
    }
    out << "\n";
  }
}

FieldData read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  FieldData field;
  std::string header;
  if (!std::getline(in, header)) throw IoError(path + ": missing header");
  if (std::sscanf(header.c_str(), "%d %d", &field.nx, &field.ny) != 2 || field.nx < 1 ||
      field.ny < 1) {
    throw IoError(path + ": malformed header, expected 'nx ny'");
  }
  field.values.resize(static_cast<Eigen::Index>(field.nx) * field.ny);
  std::string line;
  for (int row = 0; row < field.ny; ++row) {
    if (!std::getline(in, line)) throw IoError(path + ": missing row " + std::to_string(row));
    std::stringstream ss(line);
    std::string item;
    for (int col = 0; col < field.nx; ++col) {
      if (!std::getline(ss, item, ',')) {
        throw IoError(path + ": missing value at row " + std::to_string(row) + ", column " +
                      std::to_string(col));
      }
      try {
        field.values[static_cast<Eigen::Index>(row) * field.nx + col] = std::stod(item);
      } catch (const std::exception&) {
        throw IoError(path + ": bad value at row " + std::to_string(row) + ", column " +
                      std::to_string(col));
      }
    }
  }
  return field;
}

void write_results_csv(const std::string& path,
                       const std::vector<ErrorRecord<double>>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "iteration,dof,online_added,l2_error_pct,energy_error_pct,sum_delta_sq\n";
  for (const auto& r : records) {
    out << r.iteration << "," << r.dof << "," << r.online_added << ","
        << fmt(r.l2_error_pct, "%.12g") << "," << fmt(r.energy_error_pct, "%.12g") << ","
        << fmt(r.sum_delta_sq, "%.12g") << "\n";
  }
}

std::string format_results_table(const std::vector<ErrorRecord<double>>& records) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%5s %6s %7s %14s %14s %14s\n", "iter", "dof", "added",
                "l2_error_pct", "energy_pct", "sum_delta_sq");
  out << line;
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%5d %6d %7d %14.6g %14.6g %14.6g\n", r.iteration,
                  r.dof, r.online_added, r.l2_error_pct, r.energy_error_pct, r.sum_delta_sq);
    out << line;
  }
  return out.str();
}

void write_indicators_csv(const std::string& path, const DenseVector<double>& deltas,
                          const std::vector<int>& selected) {
  std::vector<bool> chosen(deltas.size(), false);
  for (int v : selected) chosen[v] = true;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << "vertex,delta,selected\n";
  for (Eigen::Index v = 0; v < deltas.size(); ++v) {
    out << v << "," << fmt(deltas[v], "%.12g") << "," << (chosen[v] ? 1 : 0) << "\n";
  }
}

void write_count_map_csv(const std::string& path, int nx, int ny,
                         const std::vector<int>& counts) {
  if (counts.size() != static_cast<size_t>(nx) * ny) {
    throw IoError("write_count_map_csv: count size does not match grid");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << nx << " " << ny << "\n";
  for (int row = 0; row < ny; ++row) {
    for (int col = 0; col < nx; ++col) {
      out << counts[static_cast<size_t>(row) * nx + col] << (col + 1 == nx ? "" : ",");
    }
    out << "\n";
  }
}

}  // namespace cemgms
