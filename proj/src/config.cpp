#include "ddsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "ddsim/errors.hpp"
#include "ddsim/format.hpp"

namespace ddsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma == std::string_view::npos
                                                   ? std::string_view::npos
                                                   : comma - start));
    if (!item.empty()) items.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  const auto v = read_double(value);
  if (!v || !std::isfinite(*v)) throw ConfigError("'" + key + "' expects a number, got '" + value + "'");
  return *v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + value + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + value + "'");
}

int to_int(const std::string& key, const std::string& value) {
  const auto v = to_unsigned(key, value);
  if (v > static_cast<std::uint64_t>(INT32_MAX)) throw ConfigError("'" + key + "' is too large");
  return static_cast<int>(v);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "dataset.path",        "schema.label",        "schema.contributor",
      "schema.demographic",  "schema.drop",         "schema.demographics_as_features",
      "schema.standardize",  "model.loss",          "model.l2",
      "model.hinge_temperature", "model.tolerance", "model.max_iterations",
      "solver.cg_tolerance", "solver.cg_max_iterations", "solver.damping",
      "split.test_fraction", "scenarios",           "binning.quantile",
      "binning.weight",      "funding.pool",        "audit.attributes",
      "validate.sample_size", "output.dir",         "seed"};
  return keys;
}

std::vector<Scenario> default_scenarios() {
  return {{AllocationMode::per_observation, TransformKind::shift},
          {AllocationMode::per_observation, TransformKind::absolute_value},
          {AllocationMode::per_observation, TransformKind::clipping},
          {AllocationMode::per_observation, TransformKind::binning},
          {AllocationMode::fixed_per_observation, std::nullopt}};
}

}  // namespace

std::string Scenario::name() const {
  return transform ? to_string(mode) + "_" + to_string(*transform) : to_string(mode);
}

std::string Scenario::spelling() const {
  return transform ? to_string(mode) + ":" + to_string(*transform) : to_string(mode);
}

Scenario parse_scenario(std::string_view text) {
  const auto colon = text.find(':');
  Scenario scenario;
  scenario.mode = parse_mode(trim(text.substr(0, colon)));
  if (colon != std::string_view::npos) scenario.transform = parse_transform(trim(text.substr(colon + 1)));
  if (is_fixed(scenario.mode) && scenario.transform) {
    throw ConfigError("scenario '" + std::string(text) + "': fixed modes take no transform");
  }
  if (!is_fixed(scenario.mode) && !scenario.transform) {
    throw ConfigError("scenario '" + std::string(text) + "' needs a transform (mode:transform)");
  }
  return scenario;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  std::map<std::string, std::string> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (!known_keys().contains(key)) {
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!entries.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    return it->second;
  };
  auto resolve = [&](const std::string& raw) {
    std::filesystem::path p(raw);
    if (p.is_relative()) p = base_dir / p;
    return std::filesystem::absolute(p).lexically_normal();
  };

  RunConfig config;
  const auto path = take("dataset.path");
  if (!path || path->empty()) throw ConfigError("config is missing 'dataset.path'");
  config.dataset_path = resolve(*path);

  const auto label = take("schema.label");
  if (!label || label->empty()) throw ConfigError("config is missing 'schema.label'");
  config.schema.label = *label;
  if (const auto v = take("schema.contributor"); v && !v->empty() && *v != "row_index") {
    config.schema.contributor = *v;
  }
  if (const auto v = take("schema.demographic")) config.schema.demographics = split_list(*v);
  if (const auto v = take("schema.drop")) config.schema.drop = split_list(*v);
  if (const auto v = take("schema.demographics_as_features")) {
    config.schema.demographics_as_features = to_bool("schema.demographics_as_features", *v);
  }
  if (const auto v = take("schema.standardize")) {
    config.schema.standardize = to_bool("schema.standardize", *v);
  }

  if (const auto v = take("model.loss")) config.model.loss = parse_loss_family(*v);
  if (const auto v = take("model.l2")) config.model.l2 = to_real("model.l2", *v);
  if (const auto v = take("model.hinge_temperature")) {
    config.model.hinge_temperature = to_real("model.hinge_temperature", *v);
  }
  if (const auto v = take("model.tolerance")) config.model.tolerance = to_real("model.tolerance", *v);
  if (const auto v = take("model.max_iterations")) {
    config.model.max_iterations = to_int("model.max_iterations", *v);
  }
  validate_spec(config.model);

  if (const auto v = take("solver.cg_tolerance")) {
    config.solver.cg_tolerance = to_real("solver.cg_tolerance", *v);
  }
  if (const auto v = take("solver.cg_max_iterations")) {
    config.solver.cg_max_iterations = to_int("solver.cg_max_iterations", *v);
  }
  if (const auto v = take("solver.damping")) config.solver.damping = to_real("solver.damping", *v);
  if (!(config.solver.cg_tolerance > 0.0)) throw ConfigError("solver.cg_tolerance must be positive");
  if (config.solver.damping < 0.0) throw ConfigError("solver.damping must be non-negative");

  if (const auto v = take("split.test_fraction")) {
    config.test_fraction = to_real("split.test_fraction", *v);
  }
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw ConfigError("split.test_fraction must lie in (0, 1)");
  }

  if (const auto v = take("scenarios")) {
    for (const auto& item : split_list(*v)) config.scenarios.push_back(parse_scenario(item));
    if (config.scenarios.empty()) throw ConfigError("'scenarios' lists no scenario");
  } else {
    config.scenarios = default_scenarios();
  }
  std::set<std::string> names;
  for (const auto& s : config.scenarios) {
    if (!names.insert(s.name()).second) throw ConfigError("duplicate scenario '" + s.spelling() + "'");
  }

  if (const auto v = take("binning.quantile")) config.binning_quantile = to_real("binning.quantile", *v);
  if (const auto v = take("binning.weight")) config.binning_weight = to_real("binning.weight", *v);
  validate_transform(config.transform_spec(TransformKind::binning));

  if (const auto v = take("funding.pool"); v && *v != "auto" && !v->empty()) {
    config.pool = to_real("funding.pool", *v);
    if (*config.pool < 0.0) throw ConfigError("funding.pool must be non-negative");
  }

  if (const auto v = take("audit.attributes")) config.audit_attributes = split_list(*v);
  for (const auto& attribute : config.audit_attributes) {
    if (std::find(config.schema.demographics.begin(), config.schema.demographics.end(),
                  attribute) == config.schema.demographics.end()) {
      throw ConfigError("audit attribute '" + attribute +
                        "' is not declared in schema.demographic");
    }
  }

  if (const auto v = take("validate.sample_size")) {
    config.validation_sample_size = to_unsigned("validate.sample_size", *v);
    if (config.validation_sample_size == 0) throw ConfigError("validate.sample_size must be positive");
  }
  config.output_dir = resolve(take("output.dir").value_or("out"));
  if (const auto v = take("seed")) config.seed = to_unsigned("seed", *v);
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), std::filesystem::absolute(path).parent_path());
}

std::string write_run_config(const RunConfig& config) {
  std::vector<std::string> scenarios;
  for (const auto& s : config.scenarios) scenarios.push_back(s.spelling());

  std::ostringstream out;
  out << "# effective configuration (defaults resolved)\n";
  out << "dataset.path = " << config.dataset_path.string() << "\n";
  out << "schema.label = " << config.schema.label << "\n";
  out << "schema.contributor = " << config.schema.contributor.value_or("row_index") << "\n";
  out << "schema.demographic = " << join(config.schema.demographics) << "\n";
  out << "schema.drop = " << join(config.schema.drop) << "\n";
  out << "schema.demographics_as_features = "
      << (config.schema.demographics_as_features ? "true" : "false") << "\n";
  out << "schema.standardize = " << (config.schema.standardize ? "true" : "false") << "\n";
  out << "model.loss = " << to_string(config.model.loss) << "\n";
  out << "model.l2 = " << format_double(config.model.l2) << "\n";
  out << "model.hinge_temperature = " << format_double(config.model.hinge_temperature) << "\n";
  out << "model.tolerance = " << format_double(config.model.tolerance) << "\n";
  out << "model.max_iterations = " << config.model.max_iterations << "\n";
  out << "solver.cg_tolerance = " << format_double(config.solver.cg_tolerance) << "\n";
  out << "solver.cg_max_iterations = " << config.solver.cg_max_iterations << "\n";
  out << "solver.damping = " << format_double(config.solver.damping) << "\n";
  out << "split.test_fraction = " << format_double(config.test_fraction) << "\n";
  out << "scenarios = " << join(scenarios) << "\n";
  out << "binning.quantile = " << format_double(config.binning_quantile) << "\n";
  out << "binning.weight = " << format_double(config.binning_weight) << "\n";
  out << "funding.pool = " << (config.pool ? format_double(*config.pool) : "auto") << "\n";
  out << "audit.attributes = " << join(config.audit_attributes) << "\n";
  out << "validate.sample_size = " << config.validation_sample_size << "\n";
  out << "output.dir = " << config.output_dir.string() << "\n";
  out << "seed = " << config.seed << "\n";
  return out.str();
}

}  // namespace ddsim
