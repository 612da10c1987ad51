#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/dataset.hpp"
#include "ddsim/dividends.hpp"
#include "ddsim/influence.hpp"
#include "ddsim/model.hpp"

namespace ddsim {

/// One allocation design to simulate: a mode plus, for influence-based
/// modes, a transform.
struct Scenario {
  AllocationMode mode = AllocationMode::per_observation;
  std::optional<TransformKind> transform;

  /// File-safe identifier, e.g. "per_observation_shift".
  std::string name() const;
  /// Config syntax, e.g. "per_observation:shift".
  std::string spelling() const;

  bool operator==(const Scenario&) const = default;
};

Scenario parse_scenario(std::string_view text);

/// Flat key/value run description. See configs/*.cfg for the documented keys.
struct RunConfig {
  std::filesystem::path dataset_path;
  Schema schema;
  ModelSpec model;
  SolverConfig solver;
  double test_fraction = 0.2;
  std::vector<Scenario> scenarios;
  double binning_quantile = 0.5;
  double binning_weight = 2.0;
  /// nullopt: one currency unit per contributor, so the mean dividend is 1.
  std::optional<double> pool;
  std::vector<std::string> audit_attributes;
  std::size_t validation_sample_size = kDefaultValidationSample;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  SplitSpec split_spec() const { return {test_fraction, seed}; }
  /// Validation sampling draws from its own stream so it never shares
  /// random numbers with the split.
  std::uint64_t validation_seed() const { return seed + 1; }
  TransformSpec transform_spec(TransformKind kind) const {
    return {kind, binning_quantile, binning_weight};
  }

  bool operator==(const RunConfig&) const = default;
};

/// Relative paths resolve against `base_dir`. Throws ConfigError.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Every key with defaults resolved and absolute paths; parses back to an
/// equal RunConfig.
std::string write_run_config(const RunConfig& config);

}  // namespace ddsim
