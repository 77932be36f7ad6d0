// Copyright (c) 2026 the cemgms authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <exception>
#include <stdexcept>
#include <string>

namespace cemgms {

template <typename T>
using DenseMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <typename T>
using DenseVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <typename T>
using SparseMatrix = Eigen::SparseMatrix<T>;

template <typename T>
using Triplet = Eigen::Triplet<T>;

/// Thrown when a linear solve does not reach the requested accuracy.
/// Carries the relative residual that was actually achieved.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual)
      : std::runtime_error(what), achieved_residual_(achieved_residual) {}

  double achieved_residual() const { return achieved_residual_; }

 private:
  double achieved_residual_;
};

/// Thrown when a coarse Galerkin matrix is numerically singular and the
/// dependence guard could not repair it.
class DependenceError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs f(i) for i in [0, n), possibly in parallel. Iterations must write to
/// disjoint slots; the first exception thrown is rethrown after the loop.
template <typename F>
void parallel_for_index(int n, F&& f) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(cemgms_parallel_for_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace cemgms
