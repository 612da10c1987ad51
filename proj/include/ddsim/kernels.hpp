#pragma once

#include <cstddef>
#include <span>

#include "ddsim/dataset.hpp"

// Row-parallel kernels over a feature matrix augmented with a constant 1
// column (the intercept). Parameter vectors have length cols() + 1.
//
// Reductions split the rows into fixed blocks of kBlockRows, reduce each
// block sequentially, then add the block partials in block order. The block
// layout does not depend on the thread count, so parallel results are
// bitwise identical for any OMP_NUM_THREADS.
namespace ddsim::kernels {

inline constexpr std::size_t kBlockRows = 256;

/// out[i] = params . [x_i; 1]
void affine_scores(const FeatureMatrix& x, std::span<const double> params,
                   std::span<double> out);

/// out = sum_i coef[i] * [x_i; 1]
void weighted_row_sum(const FeatureMatrix& x, std::span<const double> coef,
                      std::span<double> out);

/// sum_i values[i]
double blocked_sum(std::span<const double> values);

/// Single-threaded reference versions: plain row-order loops with no
/// blocking. They agree with the parallel kernels to rounding, and exactly
/// when rows() <= kBlockRows.
namespace serial {

void affine_scores(const FeatureMatrix& x, std::span<const double> params,
                   std::span<double> out);
void weighted_row_sum(const FeatureMatrix& x, std::span<const double> coef,
                      std::span<double> out);
double blocked_sum(std::span<const double> values);

}  // namespace serial

}  // namespace ddsim::kernels
