#include "ddsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>

#include "ddsim/errors.hpp"
#include "ddsim/format.hpp"

namespace ddsim {

namespace {

constexpr const char* kEffectiveConfig = "effective_config.txt";

struct ScenarioOutcome {
  DividendAllocation allocation;
  GiniResult gini;
  std::vector<DisparityReport> disparities;
  std::vector<std::string> notes;
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string dump(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

std::string fingerprint_hex(std::uint64_t value) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(value));
  return buffer;
}

nlohmann::json transform_json(const std::optional<TransformSpec>& spec) {
  if (!spec) return nullptr;
  nlohmann::json doc = {{"kind", to_string(spec->kind)}};
  if (spec->kind == TransformKind::binning) {
    doc["quantile"] = spec->binning_quantile;
    doc["weight"] = spec->binning_weight;
  }
  return doc;
}

ScenarioOutcome evaluate_scenario(const RunConfig& config, const Scenario& scenario,
                                  const ValuationVector& valuation, const ContributorIndex& index,
                                  const ObservationTable& train) {
  ScenarioOutcome outcome;
  DividendAllocation allocation =
      scenario.transform
          ? allocate(valuation, index, scenario.mode, config.transform_spec(*scenario.transform))
          : fixed_allocation(index, scenario.mode);
  const double pool = config.pool.value_or(static_cast<double>(index.contributor_count()));
  outcome.allocation = to_currency(std::move(allocation), pool);
  outcome.gini = gini(outcome.allocation.fractions);

  for (const auto& attribute : config.audit_attributes) {
    const auto medians = group_medians(outcome.allocation, train, attribute);
    if (medians.size() < 2) {
      outcome.notes.push_back("attribute '" + attribute + "' has a single group");
      continue;
    }
    const bool all_zero = std::all_of(medians.begin(), medians.end(),
                                      [](const auto& m) { return m.second == 0.0; });
    if (all_zero) {
      outcome.notes.push_back("every '" + attribute + "' group has median dividend 0");
      continue;
    }
    outcome.disparities.push_back(disparity_report(medians, kDisparityThreshold, attribute));
  }
  return outcome;
}

nlohmann::json scenario_json(const Scenario& scenario, const ScenarioOutcome& outcome) {
  nlohmann::json disparity = nlohmann::json::array();
  for (const auto& report : outcome.disparities) disparity.push_back(to_json(report));
  const auto& allocation = outcome.allocation;
  return {{"scenario", scenario.name()},
          {"mode", to_string(scenario.mode)},
          {"transform", transform_json(allocation.transform)},
          {"pool", allocation.pool.value_or(0.0)},
          {"contributors", allocation.size()},
          {"mean_amount", compensated_sum(allocation.amounts) /
                              static_cast<double>(allocation.size())},
          {"uniform_fallback", allocation.uniform_fallback},
          {"gini", outcome.gini.value},
          {"baselines", {{"united_states_gini", kUnitedStatesGini}, {"finland_gini", kFinlandGini}}},
          {"disparity", disparity},
          {"notes", outcome.notes}};
}

std::string valuation_csv(const ObservationTable& train, const ValuationVector& valuation) {
  std::string out = "row_id,contributor_id,delta\n";
  for (std::size_t i = 0; i < train.size(); ++i) {
    out += std::to_string(train.row_ids[i]) + ',' + csv_field(train.contributor_ids[i]) + ',' +
           format_double(valuation.deltas[i]) + '\n';
  }
  return out;
}

}  // namespace

std::string histogram_csv(std::span<const double> values, int bins) {
  if (values.empty()) throw DataError("histogram of an empty vector");
  if (bins <= 0) throw ConfigError("histogram needs a positive bin count");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double width = (hi - lo) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      b = static_cast<std::size_t>(std::floor((v - lo) / width));
      b = std::min(b, counts.size() - 1);
    }
    ++counts[b];
  }
  std::string out = "bin_lower,bin_upper,count\n";
  for (int b = 0; b < bins; ++b) {
    const double lower = lo + width * b;
    const double upper = b + 1 == bins ? hi : lo + width * (b + 1);
    out += format_double(lower) + ',' + format_double(upper) + ',' +
           std::to_string(counts[static_cast<std::size_t>(b)]) + '\n';
  }
  return out;
}

std::string summary_csv(std::span<const ScenarioSummary> rows) {
  std::string out = "scenario,mode,transform,gini,uniform_fallback,contributors\n";
  for (const auto& row : rows) {
    out += row.name + ',' + row.mode + ',' + row.transform + ',' + format_double(row.gini) + ',' +
           (row.uniform_fallback ? "true" : "false") + ',' + std::to_string(row.contributors) +
           '\n';
  }
  return out;
}

std::string gini_plot_csv(std::span<const ScenarioSummary> rows) {
  std::string out = "series,label,x,y\n";
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out += "gini," + rows[k].name + ',' + format_double(rows[k].gini) + ',' + std::to_string(k) +
           '\n';
  }
  const std::string top = std::to_string(rows.empty() ? 0 : rows.size() - 1);
  for (const auto& [series, label, x] :
       {std::tuple{"baseline_united_states", "United States", kUnitedStatesGini},
        std::tuple{"baseline_finland", "Finland", kFinlandGini}}) {
    out += std::string(series) + ',' + label + ',' + format_double(x) + ",0\n";
    out += std::string(series) + ',' + label + ',' + format_double(x) + ',' + top + '\n';
  }
  return out;
}

ArtifactSet simulate_artifacts(const RunConfig& config) {
  const ObservationTable table = load_dataset(config.dataset_path, config.schema);
  const TrainTestSplit split = split_train_test(table, config.split_spec());
  const FittedModel model = train(config.model, split.train);
  if (!model.converged) {
    throw NumericalError("training did not converge within " +
                         std::to_string(config.model.max_iterations) +
                         " iterations (gradient norm " +
                         std::to_string(model.final_gradient_norm) + ")");
  }
  const ValuationVector valuation =
      estimate_loo_deltas(model, split.train, split.test, config.solver);
  const ContributorIndex index = build_contributor_index(split.train);

  // Scenarios are independent given the shared valuation.
  const auto& scenarios = config.scenarios;
  std::vector<ScenarioOutcome> outcomes(scenarios.size());
  std::vector<std::exception_ptr> failures(scenarios.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(scenarios.size()); ++k) {
    const auto u = static_cast<std::size_t>(k);
    try {
      outcomes[u] = evaluate_scenario(config, scenarios[u], valuation, index, split.train);
    } catch (...) {
      failures[u] = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < failures.size(); ++k) {
    if (!failures[k]) continue;
    try {
      std::rethrow_exception(failures[k]);
    } catch (const DataError& e) {
      throw DataError("scenario " + scenarios[k].spelling() + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("scenario " + scenarios[k].spelling() + ": " + e.what());
    } catch (const NumericalError& e) {
      throw NumericalError("scenario " + scenarios[k].spelling() + ": " + e.what());
    }
  }

  ArtifactSet artifacts;
  artifacts[kEffectiveConfig] = write_run_config(config);
  artifacts["valuation.csv"] = valuation_csv(split.train, valuation);
  artifacts["histogram_valuation.csv"] = histogram_csv(valuation.deltas);

  std::vector<ScenarioSummary> rows;
  std::map<std::string, std::vector<DisparityReport>> by_scenario;
  nlohmann::json scenario_list = nlohmann::json::array();
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto& scenario = scenarios[k];
    const auto& outcome = outcomes[k];
    const std::string name = scenario.name();
    artifacts["allocation_" + name + ".csv"] = allocation_csv(outcome.allocation);
    artifacts["report_" + name + ".json"] = dump(scenario_json(scenario, outcome));
    artifacts["histogram_" + name + ".csv"] = histogram_csv(outcome.allocation.amounts);
    if (!config.audit_attributes.empty()) {
      artifacts["disparity_" + name + ".csv"] = disparity_csv(outcome.disparities);
    }
    if (!outcome.disparities.empty()) by_scenario[name] = outcome.disparities;
    rows.push_back({name, to_string(scenario.mode),
                    scenario.transform ? to_string(*scenario.transform) : "",
                    outcome.gini.value, outcome.allocation.uniform_fallback,
                    outcome.allocation.size()});
    scenario_list.push_back({{"scenario", name},
                             {"gini", outcome.gini.value},
                             {"uniform_fallback", outcome.allocation.uniform_fallback}});
  }
  artifacts["summary.csv"] = summary_csv(rows);
  artifacts["plot_gini.csv"] = gini_plot_csv(rows);

  nlohmann::json summary = {
      {"train_size", split.train.size()},
      {"test_size", split.test.size()},
      {"contributors", index.contributor_count()},
      {"cardinality", index.cardinality == Cardinality::one_to_one ? "one_to_one" : "one_to_many"},
      {"model",
       {{"loss", to_string(model.spec.loss)},
        {"converged", model.converged},
        {"final_gradient_norm", model.final_gradient_norm},
        {"iterations", model.iterations},
        {"fingerprint", fingerprint_hex(valuation.model_fingerprint)}}},
      {"solver_diagnostics", to_json(valuation.solver)},
      {"scenarios", scenario_list},
      {"mean_ratio_by_scenario",
       by_scenario.empty() ? nlohmann::json::object() : nlohmann::json(mean_ratio_summary(by_scenario))},
      {"baselines", {{"united_states_gini", kUnitedStatesGini}, {"finland_gini", kFinlandGini}}}};
  artifacts["summary.json"] = dump(summary);
  return artifacts;
}

void write_artifacts(const std::filesystem::path& dir, const ArtifactSet& artifacts) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  try {
    for (const auto& [name, contents] : artifacts) {
      const auto path = dir / name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      written.push_back(path);
      out << contents;
      out.close();
      if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& path : written) std::filesystem::remove(path, ignored);
    throw;
  }
}

void run_simulate(const RunConfig& config) {
  write_artifacts(config.output_dir, simulate_artifacts(config));
}

ValidationReport run_validate(const RunConfig& config) {
  const ObservationTable table = load_dataset(config.dataset_path, config.schema);
  const TrainTestSplit split = split_train_test(table, config.split_spec());
  const std::size_t sample = std::min(config.validation_sample_size, split.train.size());
  ValidationReport report = validate_influence(config.model, split.train, split.test, sample,
                                               config.validation_seed(), config.solver);
  nlohmann::json doc = to_json(report);
  doc["requested_sample_size"] = config.validation_sample_size;
  doc["train_size"] = split.train.size();
  write_artifacts(config.output_dir, {{"validation.json", dump(doc)},
                                      {kEffectiveConfig, write_run_config(config)}});
  return report;
}

ArtifactSet report_artifacts(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("report input '" + dir.string() + "' is not a directory");
  }
  std::vector<std::string> names;
  const auto summary_path = dir / "summary.json";
  if (std::filesystem::exists(summary_path)) {
    const auto summary = nlohmann::json::parse(read_file(summary_path));
    for (const auto& entry : summary.at("scenarios")) names.push_back(entry.at("scenario"));
  } else {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const std::string file = entry.path().filename().string();
      if (file.starts_with("allocation_") && file.ends_with(".csv")) {
        names.push_back(file.substr(11, file.size() - 15));
      }
    }
    std::sort(names.begin(), names.end());
  }
  if (names.empty()) throw DataError("no allocations found in '" + dir.string() + "'");

  ArtifactSet artifacts;
  std::vector<ScenarioSummary> rows;
  for (const auto& name : names) {
    const DividendAllocation allocation =
        parse_allocation_csv(read_file(dir / ("allocation_" + name + ".csv")));
    const auto meta = nlohmann::json::parse(read_file(dir / ("report_" + name + ".json")));
    ScenarioSummary row;
    row.name = name;
    row.mode = meta.at("mode").get<std::string>();
    row.transform = meta.at("transform").is_null()
                        ? std::string()
                        : meta.at("transform").at("kind").get<std::string>();
    row.uniform_fallback = meta.at("uniform_fallback").get<bool>();
    row.gini = gini(allocation.fractions).value;
    row.contributors = allocation.size();
    rows.push_back(row);
    artifacts["histogram_" + name + ".csv"] = histogram_csv(allocation.dividends());
  }
  artifacts["summary.csv"] = summary_csv(rows);
  artifacts["plot_gini.csv"] = gini_plot_csv(rows);
  return artifacts;
}

void run_report(const std::filesystem::path& dir) { write_artifacts(dir, report_artifacts(dir)); }

}  // namespace ddsim
