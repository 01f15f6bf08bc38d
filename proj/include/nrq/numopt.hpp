#pragma once

#include <functional>

#include "nrq/linalg.hpp"

namespace nrq::numopt {

/// Smooth scalar function with its analytic gradient.
struct ObjectiveFn {
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
};

struct SolverSettings {
  int memory_pairs = 10;
  int max_iterations = 50;
  double gradient_tolerance = 1e-6;  // infinity norm
  int max_line_search_steps = 20;

  /// Throws UsageError unless every field is strictly positive.
  void validate() const;
};

struct SolverResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Set when a line search exhausted its budget; `x` is the best iterate found.
  bool line_search_failed = false;
};

/// Limited-memory quasi-Newton ascent with Armijo backtracking (unconstrained).
/// The returned value is never below f(x0). Throws NumericalError if f or its
/// gradient is non-finite at x0 or at an accepted iterate.
SolverResult maximize(const ObjectiveFn& f, const Vector& x0, const SolverSettings& settings = {});

/// Max over coordinates of |g - g_fd| / (|g| + |g_fd| + 1e-12), using central differences.
double check_gradient(const ObjectiveFn& f, const Vector& x, double step);
/// Same, with step 1e-6·(1 + ‖x‖∞).
double check_gradient(const ObjectiveFn& f, const Vector& x);

/// Eigenvectors of the K largest eigenvalues of a symmetric matrix, descending.
/// Each column's largest-magnitude entry (lowest index on ties) is made positive.
Matrix top_eigenvectors(const Matrix& c, Eigen::Index k);

struct Svd {
  Matrix left;      // S
  Vector singular;  // descending, non-negative
  Matrix right;     // Ŝ, so that M = S·diag(Λ)·Ŝᵀ
};

Svd svd(const Matrix& m);

}  // namespace nrq::numopt
