#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <vector>

// Small dense-vector helpers for parameter-sized (d + 1) vectors.
namespace ddsim::linalg {

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  assert(x.size() == y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline std::vector<double> scaled(std::span<const double> x, double alpha) {
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v *= alpha;
  return out;
}

}  // namespace ddsim::linalg
