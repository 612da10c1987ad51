#include "ddsim/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ddsim/errors.hpp"
#include "ddsim/random.hpp"

namespace ddsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_number(std::string_view raw) {
  auto s = trim(raw);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

std::string where(std::size_t row, const std::string& column) {
  // +2: one for the header line, one for 1-based numbering.
  std::ostringstream os;
  os << "row " << row << " (line " << row + 2 << "), column '" << column << "'";
  return os.str();
}

void standardize_columns(FeatureMatrix& x) {
  const std::size_t n = x.rows();
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double lo = x(0, j);
    double hi = x(0, j);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += x(i, j);
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    mean /= static_cast<double>(n);
    if (lo == hi) {
      for (std::size_t i = 0; i < n; ++i) x(i, j) = 0.0;
      continue;
    }
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) var += (x(i, j) - mean) * (x(i, j) - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) x(i, j) = (x(i, j) - mean) / sd;
  }
}

}  // namespace

std::size_t ContributorIndex::observation_count() const {
  std::size_t total = 0;
  for (const auto& [id, rows] : groups) total += rows.size();
  return total;
}

bool has_both_classes(std::span<const double> labels) {
  bool pos = false;
  bool neg = false;
  for (double y : labels) {
    pos |= y > 0;
    neg |= y < 0;
  }
  return pos && neg;
}

ObservationTable select_rows(const ObservationTable& table, std::span<const std::size_t> rows) {
  ObservationTable out;
  out.features = FeatureMatrix(rows.size(), table.dim());
  out.feature_names = table.feature_names;
  out.labels.reserve(rows.size());
  out.contributor_ids.reserve(rows.size());
  out.row_ids.reserve(rows.size());
  for (const auto& [name, column] : table.demographics) {
    out.demographics[name].numeric = column.numeric;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    const auto src = table.features.row(i);
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
    out.labels.push_back(table.labels[i]);
    out.contributor_ids.push_back(table.contributor_ids[i]);
    out.row_ids.push_back(table.row_ids[i]);
    for (const auto& [name, column] : table.demographics) {
      out.demographics[name].values.push_back(column.values[i]);
    }
  }
  return out;
}

ObservationTable drop_row(const ObservationTable& table, std::size_t skip) {
  std::vector<std::size_t> keep;
  keep.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i != skip) keep.push_back(i);
  }
  return select_rows(table, keep);
}

void validate_table(const ObservationTable& table, bool require_both_classes) {
  const std::size_t n = table.size();
  if (n == 0) throw DataError("table has no rows");
  if (table.dim() == 0) throw DataError("table has no feature columns");
  if (table.features.rows() != n || table.contributor_ids.size() != n ||
      table.row_ids.size() != n) {
    throw DataError("table columns have inconsistent lengths");
  }
  for (const auto& [name, column] : table.demographics) {
    if (column.values.size() != n) {
      throw DataError("demographic column '" + name + "' has the wrong length");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (table.labels[i] != 1.0 && table.labels[i] != -1.0) {
      throw DataError("label at row " + std::to_string(i) + " is not -1 or +1");
    }
    if (table.contributor_ids[i].empty()) {
      throw DataError("empty contributor id at row " + std::to_string(i));
    }
    for (double v : table.features.row(i)) {
      if (!std::isfinite(v)) throw DataError("non-finite feature at row " + std::to_string(i));
    }
  }
  if (require_both_classes && !has_both_classes(table.labels)) {
    throw DataError("table contains a single label class");
  }
}

ContributorIndex build_contributor_index(const ObservationTable& table) {
  ContributorIndex index;
  for (std::size_t i = 0; i < table.size(); ++i) {
    index.groups[table.contributor_ids[i]].push_back(i);
  }
  const bool all_single = std::all_of(index.groups.begin(), index.groups.end(),
                                      [](const auto& g) { return g.second.size() == 1; });
  index.cardinality = all_single ? Cardinality::one_to_one : Cardinality::one_to_many;
  return index;
}

TrainTestSplit split_train_test(const ObservationTable& table, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw DataError("test_fraction must lie in (0, 1)");
  }
  const std::size_t n = table.size();
  const auto n_test =
      static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (n_test == 0 || n_test >= n) {
    throw DataError("test_fraction " + std::to_string(spec.test_fraction) + " on " +
                    std::to_string(n) + " rows leaves an empty train or test part");
  }
  std::mt19937_64 rng(spec.seed);
  const auto order = shuffled_indices(n, rng);
  std::vector<std::size_t> test_rows(order.begin(), order.begin() + static_cast<long>(n_test));
  std::vector<std::size_t> train_rows(order.begin() + static_cast<long>(n_test), order.end());
  std::sort(test_rows.begin(), test_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  TrainTestSplit split{select_rows(table, train_rows), select_rows(table, test_rows)};
  if (!has_both_classes(split.train.labels)) {
    throw DataError(
        "training split contains a single label class; re-split with a different seed or a "
        "smaller test_fraction");
  }
  return split;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    const bool blank = row.size() == 1 && row.front().empty() && !field_started;
    if (!blank) rows.push_back(std::move(row));
    row.clear();
    field_started = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field in CSV");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

ObservationTable load_dataset_text(std::string_view csv_text, const Schema& schema) {
  auto rows = parse_csv(csv_text);
  if (rows.empty()) throw DataError("CSV has no header row");
  const std::vector<std::string> header = [&] {
    std::vector<std::string> h;
    for (const auto& cell : rows.front()) h.emplace_back(trim(cell));
    return h;
  }();
  rows.erase(rows.begin());
  const std::size_t n = rows.size();
  if (n < 2) throw DataError("dataset needs at least 2 rows, found " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != header.size()) {
      throw DataError("row " + std::to_string(i) + " has " + std::to_string(rows[i].size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
  }

  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("schema names missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };

  const std::size_t label_col = column_of(schema.label);
  std::optional<std::size_t> contributor_col;
  if (schema.contributor) contributor_col = column_of(*schema.contributor);
  std::set<std::size_t> demographic_cols;
  for (const auto& name : schema.demographics) demographic_cols.insert(column_of(name));
  std::set<std::size_t> dropped;
  for (const auto& name : schema.drop) dropped.insert(column_of(name));

  if (contributor_col == label_col || demographic_cols.contains(label_col) ||
      dropped.contains(label_col)) {
    throw ConfigError("label column '" + schema.label + "' is assigned a second role");
  }

  ObservationTable table;
  table.row_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) table.row_ids[i] = i;

  // Labels: {0,1} or {-1,+1}.
  table.labels.resize(n);
  bool saw_zero = false;
  bool saw_minus_one = false;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = parse_number(rows[i][label_col]);
    if (!v || (*v != 0.0 && *v != 1.0 && *v != -1.0)) {
      throw DataError("label at " + where(i, schema.label) + " is not one of 0, 1, -1, +1");
    }
    saw_zero |= *v == 0.0;
    saw_minus_one |= *v == -1.0;
    table.labels[i] = *v == 1.0 ? 1.0 : -1.0;
  }
  if (saw_zero && saw_minus_one) {
    throw DataError("label column '" + schema.label + "' mixes {0,1} and {-1,+1} encodings");
  }
  if (!has_both_classes(table.labels)) {
    throw DataError("label column '" + schema.label + "' contains a single class");
  }

  table.contributor_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (contributor_col) {
      const auto id = trim(rows[i][*contributor_col]);
      if (id.empty()) throw DataError("empty contributor id at " + where(i, *schema.contributor));
      table.contributor_ids[i] = std::string(id);
    } else {
      table.contributor_ids[i] = std::to_string(i);
    }
  }

  for (std::size_t c : demographic_cols) {
    DemographicColumn column;
    column.numeric = true;
    column.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto cell = trim(rows[i][c]);
      column.values.emplace_back(cell);
      const auto v = parse_number(cell);
      column.numeric = column.numeric && v && std::isfinite(*v);
    }
    table.demographics.emplace(header[c], std::move(column));
  }

  // Feature columns in header order; categorical ones expand to one-hot blocks.
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == label_col || c == contributor_col || dropped.contains(c)) continue;
    if (demographic_cols.contains(c) && !schema.demographics_as_features) continue;

    bool numeric = true;
    for (std::size_t i = 0; i < n && numeric; ++i) {
      const auto cell = trim(rows[i][c]);
      numeric = cell.empty() || parse_number(cell).has_value();
    }
    if (numeric) {
      std::vector<double> values(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto v = parse_number(rows[i][c]);
        if (!v) throw DataError("missing value at " + where(i, header[c]));
        if (!std::isfinite(*v)) throw DataError("non-finite value at " + where(i, header[c]));
        values[i] = *v;
      }
      table.feature_names.push_back(header[c]);
      columns.push_back(std::move(values));
    } else {
      std::set<std::string> levels;
      for (std::size_t i = 0; i < n; ++i) levels.emplace(trim(rows[i][c]));
      for (const auto& level : levels) {
        std::vector<double> values(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = trim(rows[i][c]) == level ? 1.0 : 0.0;
        table.feature_names.push_back(header[c] + "=" + level);
        columns.push_back(std::move(values));
      }
    }
  }
  if (columns.empty()) throw DataError("schema leaves no feature columns");

  table.features = FeatureMatrix(n, columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) {
    for (std::size_t i = 0; i < n; ++i) table.features(i, j) = columns[j][i];
  }
  if (schema.standardize) standardize_columns(table.features);
  validate_table(table, true);
  return table;
}

ObservationTable load_dataset(const std::filesystem::path& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_dataset_text(buffer.str(), schema);
}

}  // namespace ddsim
