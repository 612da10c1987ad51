#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddsim/dataset.hpp"
#include "ddsim/model.hpp"

namespace ddsim {

struct SolverConfig {
  double cg_tolerance = 1e-10;
  /// 0 selects 10 * (d + 1).
  int cg_max_iterations = 0;
  /// Added to every diagonal entry of the Hessian, intercept included.
  double damping = 0.0;

  bool operator==(const SolverConfig&) const = default;
};

struct SolverDiagnostics {
  int iterations = 0;
  double relative_residual = 0.0;
  /// Damping of the final attempt.
  double damping = 0.0;
  /// Damping values tried before the final attempt, in order.
  std::vector<double> escalations;
  bool converged = false;
};

nlohmann::json to_json(const SolverDiagnostics& diagnostics);

struct InverseHvpResult {
  std::vector<double> solution;
  SolverDiagnostics diagnostics;
};

/// Solves (H + damping I) s = v by conjugate gradient on Hessian-vector
/// products. Single attempt: a failed solve is reported through
/// diagnostics.converged, not thrown.
InverseHvpResult inverse_hvp(const FittedModel& model, const ObservationTable& train,
                             std::span<const double> v, const SolverConfig& cfg);

/// inverse_hvp, raising the damping tenfold after each failure (at most
/// three escalations). Throws NumericalError if every attempt fails.
InverseHvpResult inverse_hvp_with_escalation(const FittedModel& model,
                                             const ObservationTable& train,
                                             std::span<const double> v,
                                             const SolverConfig& cfg);

enum class ValuationMethod { influence_estimate, exact_retrain };

std::string to_string(ValuationMethod method);

/// deltas[i] = mean test loss after removing training row i, minus the mean
/// test loss of the full model. Positive means row i helped.
struct ValuationVector {
  std::vector<double> deltas;
  ValuationMethod method = ValuationMethod::influence_estimate;
  std::uint64_t model_fingerprint = 0;
  SolverDiagnostics solver;
};

/// FNV-1a over the model spec and the training features and labels.
std::uint64_t model_fingerprint(const ModelSpec& spec, const ObservationTable& train);

/// First-order leave-one-out estimate for every training row, from a single
/// inverse-Hessian solve against the mean test-loss gradient:
///   deltas[i] = (1/n) grad_loss_i . H^{-1} grad_test
ValuationVector estimate_loo_deltas(const FittedModel& model, const ObservationTable& train,
                                    const ObservationTable& test, const SolverConfig& cfg);

/// Exact leave-one-out delta by retraining without row i.
/// Throws DataError if removing i leaves one class, NumericalError if either
/// fit does not converge.
double exact_loo_delta(const ModelSpec& spec, const ObservationTable& train,
                       const ObservationTable& test, std::size_t i);

/// exact_loo_delta for each index, sharing one full-data fit. Retrains run
/// in parallel; output order follows `indices`.
std::vector<double> exact_loo_deltas(const ModelSpec& spec, const ObservationTable& train,
                                     const ObservationTable& test,
                                     std::span<const std::size_t> indices);

double pearson_correlation(std::span<const double> a, std::span<const double> b);
/// Pearson correlation of average ranks.
double spearman_correlation(std::span<const double> a, std::span<const double> b);
/// Fraction of positions where sign(a) == sign(b), with sign(0) = 0.
double sign_agreement(std::span<const double> a, std::span<const double> b);

inline constexpr std::size_t kDefaultValidationSample = 100;

struct ValidationReport {
  std::vector<std::size_t> sampled_indices;
  std::vector<double> estimated;
  std::vector<double> exact;
  double pearson_r = 0.0;
  double spearman_r = 0.0;
  double sign_agreement = 0.0;
  SolverDiagnostics solver;
  LossFamily loss = LossFamily::logistic;
};

/// Compares influence estimates with exact retraining on a seeded uniform
/// sample (without replacement) of training rows. sample_size must be <= n.
ValidationReport validate_influence(const ModelSpec& spec, const ObservationTable& train,
                                    const ObservationTable& test, std::size_t sample_size,
                                    std::uint64_t seed, const SolverConfig& cfg);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace ddsim
