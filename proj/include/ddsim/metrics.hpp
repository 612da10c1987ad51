#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ddsim/dataset.hpp"
#include "ddsim/dividends.hpp"

namespace ddsim {

/// Reference income Gini indices used to annotate reports.
inline constexpr double kUnitedStatesGini = 39.1;
inline constexpr double kFinlandGini = 25.9;

inline constexpr double kDisparityThreshold = 0.8;
inline constexpr double kAgeBandThreshold = 40.0;

struct GiniResult {
  /// 0 (everyone equal) to 100 (one unit holds everything).
  double value = 0.0;
  std::size_t n = 0;
};

/// Gini index scaled to [0, 100] with the sample-corrected denominator
///   100 * sum_ij |v_i - v_j| / (2 n (n - 1) mean)
/// so a single holder gives exactly 100 for any n >= 2. O(n log n).
/// Throws DataError for negative, non-finite or all-zero input.
GiniResult gini(std::span<const double> values);

/// Midpoint of the two central values for even counts.
double median(std::vector<double> values);

/// "under 40" or "40+".
std::string age_band(double age);

/// Median dividend of the contributors in each group of `attribute`.
/// Numeric attributes named "age" (any case) are banded by age_band first.
/// Every contributor must map to a single group value across their rows.
std::map<std::string, double> group_medians(const DividendAllocation& allocation,
                                            const ObservationTable& table,
                                            const std::string& attribute);

struct GroupPairRatio {
  std::string group_a;
  std::string group_b;
  /// min(median_a, median_b) / max(median_a, median_b); 1 if both are zero.
  double ratio = 1.0;
  bool flagged = false;
};

struct DisparityReport {
  std::string attribute;
  std::map<std::string, double> group_medians;
  /// Every unordered pair, groups in sorted order.
  std::vector<GroupPairRatio> pairs;
  double threshold = kDisparityThreshold;

  std::vector<std::pair<std::string, std::string>> flags() const;
};

/// Throws DataError for fewer than two groups, negative medians, or all
/// medians zero.
DisparityReport disparity_report(const std::map<std::string, double>& medians,
                                 double threshold = kDisparityThreshold,
                                 std::string attribute = {});

/// Arithmetic mean of every pairwise ratio across each key's reports.
std::map<std::string, double> mean_ratio_summary(
    const std::map<std::string, std::vector<DisparityReport>>& reports_by_transform);

nlohmann::json to_json(const DisparityReport& report);
/// `attribute,groupA,groupB,ratio,flagged` rows.
std::string disparity_csv(std::span<const DisparityReport> reports);

}  // namespace ddsim
