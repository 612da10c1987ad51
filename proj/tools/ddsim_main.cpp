// Command-line runner: simulate, validate, report.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ddsim/config.hpp"
#include "ddsim/errors.hpp"
#include "ddsim/pipeline.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kOtherFailure = 1,
  kConfigFailure = 2,
  kDataFailure = 3,
  kNumericalFailure = 4,
};

ddsim::RunConfig load(const std::string& path, const std::optional<std::string>& output) {
  ddsim::RunConfig config = ddsim::load_run_config(path);
  if (output) config.output_dir = std::filesystem::absolute(*output).lexically_normal();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data dividend policy simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> output;
  std::string input_dir;

  auto* simulate = app.add_subcommand("simulate", "value observations and simulate dividend designs");
  simulate->add_option("--config", config_path, "run configuration file")->required();
  simulate->add_option("--output", output, "override output.dir");

  auto* validate = app.add_subcommand("validate", "compare influence estimates with exact retraining");
  validate->add_option("--config", config_path, "run configuration file")->required();
  validate->add_option("--output", output, "override output.dir");

  auto* report = app.add_subcommand("report", "re-render summaries from stored allocations");
  report->add_option("--input", input_dir, "directory written by simulate")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigFailure;
  }

  try {
    if (simulate->parsed()) {
      const auto config = load(config_path, output);
      ddsim::run_simulate(config);
      std::cout << "wrote " << config.scenarios.size() << " scenarios to "
                << config.output_dir.string() << "\n";
    } else if (validate->parsed()) {
      const auto config = load(config_path, output);
      const auto result = ddsim::run_validate(config);
      std::cout << "pearson_r " << result.pearson_r << " spearman_r " << result.spearman_r
                << " sign_agreement " << result.sign_agreement << " over "
                << result.sampled_indices.size() << " observations\n";
      if (result.loss == ddsim::LossFamily::smooth_hinge) {
        std::cout << "note: smoothed-hinge influence estimates are usually less accurate than "
                     "logistic ones\n";
      }
    } else {
      ddsim::run_report(input_dir);
      std::cout << "re-rendered summaries in " << input_dir << "\n";
    }
  } catch (const ddsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const ddsim::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataFailure;
  } catch (const ddsim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: malformed report file: " << e.what() << "\n";
    return kDataFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOtherFailure;
  }
  return kOk;
}
