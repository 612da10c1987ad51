#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/dataset.hpp"
#include "ddsim/influence.hpp"

namespace ddsim {

// Turning signed valuations into non-negative dividend weights.
//
//   shift           v - min(v)
//   absolute_value  |v| - min(|v|)
//   clipping        max(v, 0)
//   binning         weight w at or above the q-quantile, 1 below it
//
// No transform can produce a negative weight: dividends never become debts.
enum class TransformKind { shift, absolute_value, clipping, binning };

std::string to_string(TransformKind kind);
TransformKind parse_transform(std::string_view name);

struct TransformSpec {
  TransformKind kind = TransformKind::shift;
  /// Binning only.
  double binning_quantile = 0.5;
  /// Binning only; reward multiplier of the upper bin.
  double binning_weight = 2.0;

  bool operator==(const TransformSpec&) const = default;
};

/// Throws ConfigError for binning parameters outside q in (0,1), w > 1.
void validate_transform(const TransformSpec& spec);

enum class AllocationMode {
  per_observation,
  summed_influence,
  fixed_per_observation,
  fixed_per_contributor,
};

std::string to_string(AllocationMode mode);
AllocationMode parse_mode(std::string_view name);
bool is_fixed(AllocationMode mode);

/// Per-contributor dividend shares. `contributors` is sorted and parallel to
/// `fractions` (and to `amounts` once a pool is applied).
struct DividendAllocation {
  std::vector<std::string> contributors;
  std::vector<double> fractions;
  AllocationMode mode = AllocationMode::per_observation;
  std::optional<TransformSpec> transform;
  std::optional<double> pool;
  std::vector<double> amounts;
  /// Set when every transformed weight was zero and the allocation fell back
  /// to equal shares per contributor.
  bool uniform_fallback = false;

  std::size_t size() const { return contributors.size(); }
  /// Amounts when a pool is set, fractions otherwise.
  std::span<const double> dividends() const { return pool ? amounts : fractions; }
};

/// Linear-interpolation quantile of the sorted values at h = (n - 1) q.
/// For q = 0.5 this is the usual median (midpoint of the central pair).
double interpolated_quantile(std::span<const double> values, double q);

/// Unnormalized non-negative weights. Throws DataError on empty or
/// non-finite input.
std::vector<double> transform_values(std::span<const double> values, const TransformSpec& spec);

/// Influence-based allocation.
///   per_observation:  transform row deltas, normalize over rows, then sum
///                     each contributor's row fractions.
///   summed_influence: sum raw deltas per contributor, then transform and
///                     normalize at contributor level.
DividendAllocation allocate(std::span<const double> deltas, const ContributorIndex& index,
                            AllocationMode mode, const TransformSpec& spec);
DividendAllocation allocate(const ValuationVector& valuation, const ContributorIndex& index,
                            AllocationMode mode, const TransformSpec& spec);

/// Valuation-free allocations: equal value per row or per contributor.
DividendAllocation fixed_allocation(const ContributorIndex& index, AllocationMode mode);

/// amounts[c] = fractions[c] * pool. Throws ConfigError for a negative pool.
DividendAllocation to_currency(DividendAllocation allocation, double pool);

/// `contributor_id,fraction,amount` rows; amount is empty without a pool.
std::string allocation_csv(const DividendAllocation& allocation);
/// Inverse of allocation_csv for the columns it carries (mode, transform and
/// fallback are not stored in the CSV).
DividendAllocation parse_allocation_csv(std::string_view text);

}  // namespace ddsim
