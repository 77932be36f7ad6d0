// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#include "cemgms/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cemgms {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int out = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

std::vector<std::string> parse_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void assign(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "coarse_nx") c.coarse_nx = parse_int(key, value);
  else if (key == "coarse_ny") c.coarse_ny = parse_int(key, value);
  else if (key == "fine_per_coarse") c.fine_per_coarse = parse_int(key, value);
  else if (key == "num_aux") c.num_aux = parse_int(key, value);
  else if (key == "layers") c.layers = parse_int(key, value);
  else if (key == "theta") c.theta = parse_double(key, value);
  else if (key == "max_iters") c.max_iters = parse_int(key, value);
  else if (key == "tol_abs") c.tol_abs = parse_double(key, value);
  else if (key == "source") c.source = value;
  else if (key == "medium") c.medium = value;
  else if (key == "contrast") c.contrast = parse_double(key, value);
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "exports") c.exports = parse_list(value);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

bool ExperimentConfig::exports_contain(const std::string& what) const {
  return std::find(exports.begin(), exports.end(), what) != exports.end();
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
  ExperimentConfig config;
  std::stringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected 'key = value', got '" + line + "'");
    }
    assign(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected key=value");
  }
  assign(config, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void validate_config(const ExperimentConfig& c) {
  if (c.coarse_nx < 1) throw ConfigError("config key 'coarse_nx': must be >= 1");
  if (c.coarse_ny < 1) throw ConfigError("config key 'coarse_ny': must be >= 1");
  if (c.fine_per_coarse < 1) throw ConfigError("config key 'fine_per_coarse': must be >= 1");
  if (c.num_aux < 1) throw ConfigError("config key 'num_aux': must be >= 1");
  if (c.layers < 1) throw ConfigError("config key 'layers': must be >= 1");
  if (!(c.theta >= 0.0 && c.theta < 1.0)) {
    throw ConfigError("config key 'theta': must lie in [0, 1)");
  }
  if (c.max_iters < 0) throw ConfigError("config key 'max_iters': must be >= 0");
  if (!(c.tol_abs >= 0.0)) throw ConfigError("config key 'tol_abs': must be >= 0");
  if (!(c.contrast >= 1.0)) throw ConfigError("config key 'contrast': must be >= 1");
  const bool source_ok = c.source == "f1" || c.source == "f2" || c.source == "f3" ||
                         c.source.rfind("file:", 0) == 0;
  if (!source_ok) {
    throw ConfigError("config key 'source': expected f1, f2, f3 or file:<path>");
  }
  const bool medium_ok = c.medium == "default" || c.medium.rfind("file:", 0) == 0;
  if (!medium_ok) {
    throw ConfigError("config key 'medium': expected default or file:<path>");
  }
  if (c.out_dir.empty()) throw ConfigError("config key 'out_dir': must not be empty");
  for (const auto& e : c.exports) {
    if (e != "fields" && e != "bases" && e != "indicators") {
      throw ConfigError("config key 'exports': unknown export '" + e + "'");
    }
  }
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "coarse_nx = " << c.coarse_nx << "\n";
  out << "coarse_ny = " << c.coarse_ny << "\n";
  out << "fine_per_coarse = " << c.fine_per_coarse << "\n";
  out << "num_aux = " << c.num_aux << "\n";
  out << "layers = " << c.layers << "\n";
  out << "theta = " << format_double(c.theta) << "\n";
  out << "max_iters = " << c.max_iters << "\n";
  out << "tol_abs = " << format_double(c.tol_abs) << "\n";
  out << "source = " << c.source << "\n";
  out << "medium = " << c.medium << "\n";
  out << "contrast = " << format_double(c.contrast) << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  out << "exports = ";
  for (size_t i = 0; i < c.exports.size(); ++i) {
    out << c.exports[i] << (i + 1 < c.exports.size() ? "," : "");
  }
  out << "\n";
  return out.str();
}

}  // namespace cemgms
