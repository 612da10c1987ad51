#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ddsim {

/// Dense row-major matrix of standardized features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const double> data() const { return data_; }

  bool operator==(const FeatureMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// A demographic attribute column. Values are kept as the source strings;
/// `numeric` is set when every value parses as a finite number (e.g. age).
struct DemographicColumn {
  std::vector<std::string> values;
  bool numeric = false;

  bool operator==(const DemographicColumn&) const = default;
};

/// Observations plus their labels, contributors and demographic annotations.
///
/// Labels are always -1 or +1. `row_ids` index into the table the rows were
/// originally loaded as, and survive splitting and subsetting.
struct ObservationTable {
  FeatureMatrix features;
  std::vector<double> labels;
  std::vector<std::string> contributor_ids;
  std::map<std::string, DemographicColumn> demographics;
  std::vector<std::size_t> row_ids;
  std::vector<std::string> feature_names;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  bool operator==(const ObservationTable&) const = default;
};

/// Rows in `rows` order. Row ids, contributors and demographics follow.
ObservationTable select_rows(const ObservationTable& table, std::span<const std::size_t> rows);

/// The table without row `skip`.
ObservationTable drop_row(const ObservationTable& table, std::size_t skip);

/// Checks every table invariant; throws DataError naming the first violation.
/// `require_both_classes` is set for tables about to be fitted.
void validate_table(const ObservationTable& table, bool require_both_classes);

bool has_both_classes(std::span<const double> labels);

enum class Cardinality { one_to_one, one_to_many };

struct ContributorIndex {
  /// contributor id -> ascending row indices. Ordered by contributor id.
  std::map<std::string, std::vector<std::size_t>> groups;
  Cardinality cardinality = Cardinality::one_to_one;

  std::size_t contributor_count() const { return groups.size(); }
  std::size_t observation_count() const;
};

ContributorIndex build_contributor_index(const ObservationTable& table);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct TrainTestSplit {
  ObservationTable train;
  ObservationTable test;
};

/// Seeded Fisher-Yates shuffle, then the first round(f * n) shuffled rows
/// become the test part. Both parts keep the parent's row order.
TrainTestSplit split_train_test(const ObservationTable& table, const SplitSpec& spec);

/// Column roles for CSV loading.
struct Schema {
  std::string label;
  /// Column holding contributor ids; nullopt means every row is its own
  /// contributor (one-to-one data, ids are the row index).
  std::optional<std::string> contributor;
  std::vector<std::string> demographics;
  std::vector<std::string> drop;
  bool demographics_as_features = true;
  bool standardize = true;

  bool operator==(const Schema&) const = default;
};

/// Parses CSV text with a header row (RFC 4180 quoting).
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

ObservationTable load_dataset_text(std::string_view csv_text, const Schema& schema);
ObservationTable load_dataset(const std::filesystem::path& path, const Schema& schema);

}  // namespace ddsim
