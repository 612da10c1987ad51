#include "ddsim/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <vector>

namespace ddsim::kernels {

namespace {

inline double affine_dot(std::span<const double> row, std::span<const double> params) {
  double s = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) s += row[j] * params[j];
  return s + params[row.size()];
}

inline void accumulate_row(std::span<const double> row, double c, double* out) {
  for (std::size_t j = 0; j < row.size(); ++j) out[j] += c * row[j];
  out[row.size()] += c;
}

std::size_t block_count(std::size_t n) { return (n + kBlockRows - 1) / kBlockRows; }

}  // namespace

void affine_scores(const FeatureMatrix& x, std::span<const double> params,
                   std::span<double> out) {
  assert(params.size() == x.cols() + 1 && out.size() == x.rows());
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static) if (n > static_cast<std::ptrdiff_t>(kBlockRows))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = affine_dot(x.row(static_cast<std::size_t>(i)), params);
  }
}

void weighted_row_sum(const FeatureMatrix& x, std::span<const double> coef,
                      std::span<double> out) {
  assert(coef.size() == x.rows() && out.size() == x.cols() + 1);
  const std::size_t n = x.rows();
  const std::size_t width = x.cols() + 1;
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks * width, 0.0);

#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockRows;
    const std::size_t hi = std::min(n, lo + kBlockRows);
    double* acc = partial.data() + static_cast<std::size_t>(b) * width;
    for (std::size_t i = lo; i < hi; ++i) accumulate_row(x.row(i), coef[i], acc);
  }

  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* acc = partial.data() + b * width;
    for (std::size_t j = 0; j < width; ++j) out[j] += acc[j];
  }
}

double blocked_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t blocks = block_count(n);
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static) if (blocks > 1)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlockRows;
    const std::size_t hi = std::min(n, lo + kBlockRows);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += values[i];
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

namespace serial {

void affine_scores(const FeatureMatrix& x, std::span<const double> params,
                   std::span<double> out) {
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = affine_dot(x.row(i), params);
}

void weighted_row_sum(const FeatureMatrix& x, std::span<const double> coef,
                      std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i) accumulate_row(x.row(i), coef[i], out.data());
}

double blocked_sum(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) total += v;
  return total;
}

}  // namespace serial

}  // namespace ddsim::kernels
