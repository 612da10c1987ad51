#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ddsim/config.hpp"
#include "ddsim/influence.hpp"
#include "ddsim/metrics.hpp"

namespace ddsim {

/// Output file name -> contents. Built fully in memory before anything is
/// written, so a failing run leaves no partial outputs behind.
using ArtifactSet = std::map<std::string, std::string>;

inline constexpr int kHistogramBins = 50;

/// `bin_lower,bin_upper,count` over kHistogramBins equal-width bins spanning
/// [min, max] of the values. Counts are raw; log scaling is left to plotting.
std::string histogram_csv(std::span<const double> values, int bins = kHistogramBins);

struct ScenarioSummary {
  std::string name;
  std::string mode;
  std::string transform;
  double gini = 0.0;
  bool uniform_fallback = false;
  std::size_t contributors = 0;
};

/// `scenario,mode,transform,gini,uniform_fallback,contributors`
std::string summary_csv(std::span<const ScenarioSummary> rows);
/// `series,label,x,y`: one point per scenario (x = Gini) plus two-point
/// vertical reference lines at the US and Finland income Gini indices.
std::string gini_plot_csv(std::span<const ScenarioSummary> rows);

/// load -> split -> train -> estimate deltas once -> per scenario: allocate,
/// convert to currency, Gini and disparity reports.
ArtifactSet simulate_artifacts(const RunConfig& config);

/// Writes every artifact into `dir` (created if needed). If a write fails the
/// files already written are removed before the error propagates.
void write_artifacts(const std::filesystem::path& dir, const ArtifactSet& artifacts);

void run_simulate(const RunConfig& config);

/// Validation with the sample clamped to the training-set size; writes
/// validation.json and effective_config.txt.
ValidationReport run_validate(const RunConfig& config);

/// Rebuilds summary.csv, plot_gini.csv and per-scenario histograms from the
/// allocation CSVs and scenario reports stored in `dir`.
ArtifactSet report_artifacts(const std::filesystem::path& dir);
void run_report(const std::filesystem::path& dir);

}  // namespace ddsim
