#include "ddsim/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "ddsim/errors.hpp"
#include "ddsim/format.hpp"

namespace ddsim {

namespace {

bool is_age_attribute(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "age";
}

}  // namespace

GiniResult gini(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw DataError("Gini index of an empty vector");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError("Gini index needs finite non-negative values");
    }
  }
  if (n == 1) return {0.0, 1};

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = compensated_sum(sorted);
  if (total == 0.0) {
    throw DataError(
        "Gini index is undefined for all-zero dividends; the allocation should have fallen back "
        "to uniform fractions");
  }
  // sum_ij |v_i - v_j| = 2 sum_k (2k - n + 1) v_(k) over ascending order.
  std::vector<double> terms(n);
  for (std::size_t k = 0; k < n; ++k) {
    terms[k] = (2.0 * static_cast<double>(k) - static_cast<double>(n) + 1.0) * sorted[k];
  }
  const double weighted = compensated_sum(terms);
  const double nd = static_cast<double>(n);
  // 2 * weighted / (2 n (n-1) mean) with mean = total / n.
  const double value = 100.0 * weighted / ((nd - 1.0) * total);
  return {std::clamp(value, 0.0, 100.0), n};
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty group");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<long>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<long>(mid));
  return lower + (upper - lower) / 2.0;
}

std::string age_band(double age) { return age < kAgeBandThreshold ? "under 40" : "40+"; }

std::map<std::string, double> group_medians(const DividendAllocation& allocation,
                                            const ObservationTable& table,
                                            const std::string& attribute) {
  const auto column = table.demographics.find(attribute);
  if (column == table.demographics.end()) {
    throw DataError("demographic attribute '" + attribute + "' is not in the table");
  }
  const bool band = column->second.numeric && is_age_attribute(attribute);

  std::map<std::string, std::string> group_of;
  for (std::size_t i = 0; i < table.size(); ++i) {
    std::string group = column->second.values[i];
    if (band) group = age_band(*read_double(group));
    const auto [it, inserted] = group_of.emplace(table.contributor_ids[i], group);
    if (!inserted && it->second != group) {
      throw DataError("contributor '" + table.contributor_ids[i] + "' has conflicting '" +
                      attribute + "' values ('" + it->second + "' and '" + group + "')");
    }
  }

  const auto dividends = allocation.dividends();
  std::map<std::string, std::vector<double>> members;
  for (std::size_t c = 0; c < allocation.size(); ++c) {
    const auto it = group_of.find(allocation.contributors[c]);
    if (it == group_of.end()) {
      throw DataError("contributor '" + allocation.contributors[c] +
                      "' does not appear in the table");
    }
    members[it->second].push_back(dividends[c]);
  }
  std::map<std::string, double> medians;
  for (auto& [group, values] : members) medians.emplace(group, median(std::move(values)));
  return medians;
}

std::vector<std::pair<std::string, std::string>> DisparityReport::flags() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& pair : pairs) {
    if (pair.flagged) out.emplace_back(pair.group_a, pair.group_b);
  }
  return out;
}

DisparityReport disparity_report(const std::map<std::string, double>& medians, double threshold,
                                 std::string attribute) {
  if (medians.size() < 2) throw DataError("disparity report needs at least two groups");
  bool any_positive = false;
  for (const auto& [group, m] : medians) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw DataError("group '" + group + "' has an invalid median dividend");
    }
    any_positive |= m > 0.0;
  }
  if (!any_positive) throw DataError("every group median is zero");

  DisparityReport report;
  report.attribute = std::move(attribute);
  report.group_medians = medians;
  report.threshold = threshold;
  for (auto a = medians.begin(); a != medians.end(); ++a) {
    for (auto b = std::next(a); b != medians.end(); ++b) {
      GroupPairRatio pair{a->first, b->first};
      const double hi = std::max(a->second, b->second);
      const double lo = std::min(a->second, b->second);
      // Both zero: no evidence of disparity.
      pair.ratio = hi == 0.0 ? 1.0 : lo / hi;
      pair.flagged = pair.ratio < threshold;
      report.pairs.push_back(std::move(pair));
    }
  }
  return report;
}

std::map<std::string, double> mean_ratio_summary(
    const std::map<std::string, std::vector<DisparityReport>>& reports_by_transform) {
  if (reports_by_transform.empty()) throw DataError("no disparity reports to summarize");
  std::map<std::string, double> summary;
  for (const auto& [transform, reports] : reports_by_transform) {
    std::vector<double> ratios;
    for (const auto& report : reports) {
      for (const auto& pair : report.pairs) ratios.push_back(pair.ratio);
    }
    if (ratios.empty()) {
      throw DataError("no pairwise ratios recorded for '" + transform + "'");
    }
    summary[transform] = compensated_sum(ratios) / static_cast<double>(ratios.size());
  }
  return summary;
}

nlohmann::json to_json(const DisparityReport& report) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& pair : report.pairs) {
    pairs.push_back({{"group_a", pair.group_a},
                     {"group_b", pair.group_b},
                     {"ratio", pair.ratio},
                     {"flagged", pair.flagged}});
  }
  return {{"attribute", report.attribute},
          {"group_medians", report.group_medians},
          {"pairwise_ratios", pairs},
          {"threshold", report.threshold},
          {"baselines", {{"united_states_gini", kUnitedStatesGini}, {"finland_gini", kFinlandGini}}}};
}

std::string disparity_csv(std::span<const DisparityReport> reports) {
  std::string out = "attribute,groupA,groupB,ratio,flagged\n";
  for (const auto& report : reports) {
    for (const auto& pair : report.pairs) {
      out += csv_field(report.attribute) + ',' + csv_field(pair.group_a) + ',' +
             csv_field(pair.group_b) + ',' + format_double(pair.ratio) + ',' +
             (pair.flagged ? "true" : "false") + '\n';
    }
  }
  return out;
}

}  // namespace ddsim
