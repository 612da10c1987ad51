#pragma once

#include <span>
#include <vector>

#include "ddsim/linalg.hpp"

namespace ddsim {

struct CgResult {
  std::vector<double> solution;
  int iterations = 0;
  /// |A x - b| / |b|, recomputed from A at exit (0 when b = 0).
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradient for a symmetric positive definite operator given as a
/// callable `apply(std::span<const double>) -> std::vector<double>`.
///
/// The recurrence residual drifts from the true residual in floating point,
/// so when the recurrence reports convergence the true residual is recomputed
/// and the iteration restarts from the current iterate if it is still too
/// large.
template <class Apply>
CgResult conjugate_gradient(const Apply& apply, std::span<const double> rhs, double rel_tol,
                            int max_iterations) {
  using linalg::axpy;
  using linalg::dot;

  const std::size_t n = rhs.size();
  CgResult result;
  result.solution.assign(n, 0.0);
  const double rhs_norm = linalg::norm(rhs);
  if (rhs_norm == 0.0) {
    result.converged = true;
    return result;
  }
  const double target = rel_tol * rhs_norm;

  std::vector<double> r(rhs.begin(), rhs.end());
  double true_residual = rhs_norm;
  while (result.iterations < max_iterations) {
    std::vector<double> p = r;
    double rho = dot(r, r);
    while (result.iterations < max_iterations && std::sqrt(rho) > target) {
      const std::vector<double> q = apply(p);
      const double curvature = dot(p, q);
      if (!(curvature > 0.0)) break;
      const double alpha = rho / curvature;
      axpy(alpha, p, result.solution);
      axpy(-alpha, q, r);
      const double rho_next = dot(r, r);
      const double beta = rho_next / rho;
      rho = rho_next;
      for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
      ++result.iterations;
    }
    // True residual b - A x.
    const std::vector<double> ax = apply(result.solution);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - ax[i];
    const double previous = true_residual;
    true_residual = linalg::norm(r);
    if (true_residual <= target) break;
    // No progress since the last restart: rounding floor reached.
    if (true_residual >= previous) break;
  }
  result.relative_residual = true_residual / rhs_norm;
  result.converged = true_residual <= target;
  return result;
}

}  // namespace ddsim
