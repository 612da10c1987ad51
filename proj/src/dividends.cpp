#include "ddsim/dividends.hpp"

#include <algorithm>
#include <cmath>

#include "ddsim/errors.hpp"
#include "ddsim/format.hpp"

namespace ddsim {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  if (values.empty()) throw DataError(std::string(what) + " is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw DataError(std::string(what) + " has a non-finite entry at position " +
                      std::to_string(i));
    }
  }
}

std::vector<std::string> contributor_ids(const ContributorIndex& index) {
  std::vector<std::string> ids;
  ids.reserve(index.groups.size());
  for (const auto& [id, rows] : index.groups) ids.push_back(id);
  return ids;
}

/// Divides by the total; false when every weight is zero.
bool normalize(std::vector<double>& weights) {
  const double total = compensated_sum(weights);
  if (!(total > 0.0)) return false;
  for (double& w : weights) w /= total;
  return true;
}

void fill_uniform(DividendAllocation& allocation) {
  const double share = 1.0 / static_cast<double>(allocation.contributors.size());
  allocation.fractions.assign(allocation.contributors.size(), share);
  allocation.uniform_fallback = true;
}

}  // namespace

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::shift:
      return "shift";
    case TransformKind::absolute_value:
      return "absolute_value";
    case TransformKind::clipping:
      return "clipping";
    case TransformKind::binning:
      return "binning";
  }
  return "unknown";
}

TransformKind parse_transform(std::string_view name) {
  for (auto kind : {TransformKind::shift, TransformKind::absolute_value, TransformKind::clipping,
                    TransformKind::binning}) {
    if (name == to_string(kind)) return kind;
  }
  throw ConfigError("unknown transform '" + std::string(name) + "'");
}

void validate_transform(const TransformSpec& spec) {
  if (spec.kind != TransformKind::binning) return;
  if (!(spec.binning_quantile > 0.0 && spec.binning_quantile < 1.0)) {
    throw ConfigError("binning quantile must lie in (0, 1)");
  }
  if (!(spec.binning_weight > 1.0)) throw ConfigError("binning weight must exceed 1");
}

std::string to_string(AllocationMode mode) {
  switch (mode) {
    case AllocationMode::per_observation:
      return "per_observation";
    case AllocationMode::summed_influence:
      return "summed_influence";
    case AllocationMode::fixed_per_observation:
      return "fixed_per_observation";
    case AllocationMode::fixed_per_contributor:
      return "fixed_per_contributor";
  }
  return "unknown";
}

AllocationMode parse_mode(std::string_view name) {
  for (auto mode : {AllocationMode::per_observation, AllocationMode::summed_influence,
                    AllocationMode::fixed_per_observation, AllocationMode::fixed_per_contributor}) {
    if (name == to_string(mode)) return mode;
  }
  throw ConfigError("unknown allocation mode '" + std::string(name) + "'");
}

bool is_fixed(AllocationMode mode) {
  return mode == AllocationMode::fixed_per_observation ||
         mode == AllocationMode::fixed_per_contributor;
}

double interpolated_quantile(std::span<const double> values, double q) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> transform_values(std::span<const double> values, const TransformSpec& spec) {
  require_finite(values, "valuation vector");
  validate_transform(spec);
  std::vector<double> out(values.begin(), values.end());
  switch (spec.kind) {
    case TransformKind::shift: {
      const double lowest = *std::min_element(out.begin(), out.end());
      for (double& v : out) v -= lowest;
      break;
    }
    case TransformKind::absolute_value: {
      for (double& v : out) v = std::abs(v);
      const double lowest = *std::min_element(out.begin(), out.end());
      for (double& v : out) v -= lowest;
      break;
    }
    case TransformKind::clipping:
      for (double& v : out) v = std::max(v, 0.0);
      break;
    case TransformKind::binning: {
      const double threshold = interpolated_quantile(values, spec.binning_quantile);
      for (double& v : out) v = v >= threshold ? spec.binning_weight : 1.0;
      break;
    }
  }
  return out;
}

DividendAllocation allocate(std::span<const double> deltas, const ContributorIndex& index,
                            AllocationMode mode, const TransformSpec& spec) {
  if (is_fixed(mode)) return fixed_allocation(index, mode);
  if (deltas.size() != index.observation_count()) {
    throw DataError("valuation has " + std::to_string(deltas.size()) +
                    " entries but the contributor index covers " +
                    std::to_string(index.observation_count()) + " observations");
  }
  require_finite(deltas, "valuation vector");

  DividendAllocation allocation;
  allocation.mode = mode;
  allocation.transform = spec;
  allocation.contributors = contributor_ids(index);
  allocation.fractions.reserve(allocation.contributors.size());

  if (mode == AllocationMode::per_observation) {
    std::vector<double> weights = transform_values(deltas, spec);
    if (!normalize(weights)) {
      fill_uniform(allocation);
      return allocation;
    }
    std::vector<double> share;
    for (const auto& [id, rows] : index.groups) {
      share.clear();
      for (std::size_t row : rows) share.push_back(weights.at(row));
      allocation.fractions.push_back(compensated_sum(share));
    }
    return allocation;
  }

  std::vector<double> summed;
  summed.reserve(index.groups.size());
  std::vector<double> member_deltas;
  for (const auto& [id, rows] : index.groups) {
    member_deltas.clear();
    for (std::size_t row : rows) member_deltas.push_back(deltas[row]);
    summed.push_back(compensated_sum(member_deltas));
  }
  allocation.fractions = transform_values(summed, spec);
  if (!normalize(allocation.fractions)) fill_uniform(allocation);
  return allocation;
}

DividendAllocation allocate(const ValuationVector& valuation, const ContributorIndex& index,
                            AllocationMode mode, const TransformSpec& spec) {
  return allocate(valuation.deltas, index, mode, spec);
}

DividendAllocation fixed_allocation(const ContributorIndex& index, AllocationMode mode) {
  if (!is_fixed(mode)) {
    throw ConfigError("fixed_allocation needs a fixed mode, got " + to_string(mode));
  }
  if (index.groups.empty()) throw DataError("contributor index is empty");
  DividendAllocation allocation;
  allocation.mode = mode;
  allocation.contributors = contributor_ids(index);
  const double n = static_cast<double>(index.observation_count());
  const double m = static_cast<double>(index.contributor_count());
  for (const auto& [id, rows] : index.groups) {
    allocation.fractions.push_back(mode == AllocationMode::fixed_per_observation
                                       ? static_cast<double>(rows.size()) / n
                                       : 1.0 / m);
  }
  return allocation;
}

DividendAllocation to_currency(DividendAllocation allocation, double pool) {
  if (!(pool >= 0.0) || !std::isfinite(pool)) {
    throw ConfigError("funding pool must be a finite non-negative amount");
  }
  allocation.pool = pool;
  allocation.amounts.resize(allocation.fractions.size());
  for (std::size_t c = 0; c < allocation.fractions.size(); ++c) {
    allocation.amounts[c] = allocation.fractions[c] * pool;
  }
  return allocation;
}

std::string allocation_csv(const DividendAllocation& allocation) {
  std::string out = "contributor_id,fraction,amount\n";
  for (std::size_t c = 0; c < allocation.size(); ++c) {
    out += csv_field(allocation.contributors[c]);
    out += ',';
    out += format_double(allocation.fractions[c]);
    out += ',';
    if (allocation.pool) out += format_double(allocation.amounts[c]);
    out += '\n';
  }
  return out;
}

DividendAllocation parse_allocation_csv(std::string_view text) {
  const auto rows = parse_csv(text);
  if (rows.empty() || rows.front() != std::vector<std::string>{"contributor_id", "fraction",
                                                                "amount"}) {
    throw DataError("allocation CSV must start with 'contributor_id,fraction,amount'");
  }
  DividendAllocation allocation;
  bool any_amount = false;
  bool all_amount = true;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 3) throw DataError("allocation CSV row " + std::to_string(r) + " malformed");
    const auto fraction = read_double(row[1]);
    if (!fraction) throw DataError("bad fraction on allocation CSV row " + std::to_string(r));
    allocation.contributors.push_back(row[0]);
    allocation.fractions.push_back(*fraction);
    const auto amount = read_double(row[2]);
    any_amount |= amount.has_value();
    all_amount &= amount.has_value();
    allocation.amounts.push_back(amount.value_or(0.0));
  }
  if (any_amount != all_amount) throw DataError("allocation CSV has partial amount column");
  if (any_amount) {
    // The pool itself is not stored; recover it from the total.
    allocation.pool = compensated_sum(allocation.amounts);
  } else {
    allocation.amounts.clear();
  }
  return allocation;
}

}  // namespace ddsim
