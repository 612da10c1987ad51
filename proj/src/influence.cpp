#include "ddsim/influence.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "ddsim/cg.hpp"
#include "ddsim/errors.hpp"
#include "ddsim/kernels.hpp"
#include "ddsim/linalg.hpp"
#include "ddsim/random.hpp"

namespace ddsim {

namespace {

constexpr int kMaxEscalations = 3;

class Fnv1a {
 public:
  void add_bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      hash_ ^= p[i];
      hash_ *= 0x100000001b3ULL;
    }
  }
  void add(double v) { add_bytes(&v, sizeof v); }
  void add(std::int64_t v) { add_bytes(&v, sizeof v); }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xcbf29ce484222325ULL;
};

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

nlohmann::json to_json(const SolverDiagnostics& diagnostics) {
  return {{"iterations", diagnostics.iterations},
          {"relative_residual", diagnostics.relative_residual},
          {"damping", diagnostics.damping},
          {"escalations", diagnostics.escalations},
          {"converged", diagnostics.converged}};
}

std::string to_string(ValuationMethod method) {
  return method == ValuationMethod::influence_estimate ? "influence_estimate" : "exact_retrain";
}

InverseHvpResult inverse_hvp(const FittedModel& model, const ObservationTable& train,
                             std::span<const double> v, const SolverConfig& cfg) {
  if (v.size() != model.theta.size()) {
    throw DataError("dimension mismatch in inverse_hvp: expected " +
                    std::to_string(model.theta.size()) + ", got " + std::to_string(v.size()));
  }
  if (cfg.damping < 0.0) throw ConfigError("solver damping must be nonnegative");
  const int max_iterations =
      cfg.cg_max_iterations > 0 ? cfg.cg_max_iterations : static_cast<int>(10 * v.size());
  const HessianOperator hessian(model.spec, model.theta, train, cfg.damping);
  CgResult cg = conjugate_gradient(hessian, v, cfg.cg_tolerance, max_iterations);

  InverseHvpResult result;
  result.solution = std::move(cg.solution);
  result.diagnostics.iterations = cg.iterations;
  result.diagnostics.relative_residual = cg.relative_residual;
  result.diagnostics.damping = cfg.damping;
  result.diagnostics.converged = cg.converged;
  return result;
}

InverseHvpResult inverse_hvp_with_escalation(const FittedModel& model,
                                             const ObservationTable& train,
                                             std::span<const double> v,
                                             const SolverConfig& cfg) {
  SolverConfig attempt = cfg;
  std::vector<double> tried;
  for (int escalation = 0;; ++escalation) {
    InverseHvpResult result = inverse_hvp(model, train, v, attempt);
    result.diagnostics.escalations = tried;
    if (result.diagnostics.converged) return result;
    if (escalation == kMaxEscalations) {
      throw NumericalError("conjugate gradient did not reach relative residual " +
                           std::to_string(cfg.cg_tolerance) + " (best " +
                           std::to_string(result.diagnostics.relative_residual) +
                           ") after " + std::to_string(kMaxEscalations) +
                           " damping escalations");
    }
    tried.push_back(attempt.damping);
    // Zero damping has nothing to scale; start from a tenth of the l2 strength.
    attempt.damping = attempt.damping > 0.0 ? 10.0 * attempt.damping : 0.1 * model.spec.l2;
  }
}

std::uint64_t model_fingerprint(const ModelSpec& spec, const ObservationTable& train) {
  Fnv1a h;
  h.add(static_cast<std::int64_t>(spec.loss));
  h.add(spec.l2);
  h.add(spec.hinge_temperature);
  h.add(spec.tolerance);
  h.add(static_cast<std::int64_t>(spec.max_iterations));
  h.add(static_cast<std::int64_t>(train.size()));
  h.add(static_cast<std::int64_t>(train.dim()));
  const auto features = train.features.data();
  h.add_bytes(features.data(), features.size_bytes());
  h.add_bytes(train.labels.data(), train.labels.size() * sizeof(double));
  return h.value();
}

ValuationVector estimate_loo_deltas(const FittedModel& model, const ObservationTable& train,
                                    const ObservationTable& test, const SolverConfig& cfg) {
  if (!model.converged) {
    throw NumericalError("influence estimation needs a converged model (gradient norm " +
                         std::to_string(model.final_gradient_norm) + ")");
  }
  if (test.dim() != train.dim()) throw DataError("train and test feature dimensions differ");

  const std::vector<double> test_gradient = total_gradient(model, test, false);
  InverseHvpResult solve = inverse_hvp_with_escalation(model, train, test_gradient, cfg);

  const std::size_t n = train.size();
  std::vector<double> slope(n);
  kernels::affine_scores(train.features, model.theta, slope);
  std::vector<double> projection(n);
  kernels::affine_scores(train.features, solve.solution, projection);

  ValuationVector valuation;
  valuation.deltas.resize(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    valuation.deltas[i] =
        loss_slope(model.spec, slope[i], train.labels[i]) * projection[i] * inv_n;
  }
  valuation.method = ValuationMethod::influence_estimate;
  valuation.model_fingerprint = model_fingerprint(model.spec, train);
  valuation.solver = std::move(solve.diagnostics);
  return valuation;
}

namespace {

FittedModel fit_converged(const ModelSpec& spec, const ObservationTable& table,
                          const std::string& what) {
  FittedModel model = train(spec, table);
  if (!model.converged) {
    throw NumericalError(what + " did not converge within " +
                         std::to_string(spec.max_iterations) + " iterations (gradient norm " +
                         std::to_string(model.final_gradient_norm) + ")");
  }
  return model;
}

double retrained_delta(const ModelSpec& spec, const ObservationTable& train,
                       const ObservationTable& test, std::size_t i, double base_loss) {
  if (i >= train.size()) throw DataError("row index " + std::to_string(i) + " out of range");
  const ObservationTable reduced = drop_row(train, i);
  if (!has_both_classes(reduced.labels)) {
    throw DataError("removing training row " + std::to_string(i) +
                    " leaves a single label class");
  }
  const FittedModel refit =
      fit_converged(spec, reduced, "retraining without row " + std::to_string(i));
  return mean_loss(spec, refit.theta, test) - base_loss;
}

}  // namespace

double exact_loo_delta(const ModelSpec& spec, const ObservationTable& train,
                       const ObservationTable& test, std::size_t i) {
  const FittedModel base = fit_converged(spec, train, "full-data fit");
  return retrained_delta(spec, train, test, i, mean_loss(spec, base.theta, test));
}

std::vector<double> exact_loo_deltas(const ModelSpec& spec, const ObservationTable& train,
                                     const ObservationTable& test,
                                     std::span<const std::size_t> indices) {
  const FittedModel base = fit_converged(spec, train, "full-data fit");
  const double base_loss = mean_loss(spec, base.theta, test);

  std::vector<double> deltas(indices.size());
  std::vector<std::exception_ptr> failures(indices.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(indices.size()); ++k) {
    const auto u = static_cast<std::size_t>(k);
    try {
      deltas[u] = retrained_delta(spec, train, test, indices[u], base_loss);
    } catch (...) {
      failures[u] = std::current_exception();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return deltas;
}

double pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw DataError("correlation needs two equal-length samples of size >= 2");
  }
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nan("");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman_correlation(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson_correlation(ra, rb);
}

double sign_agreement(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) {
    throw DataError("sign agreement needs two equal-length nonempty samples");
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) agree += sign_of(a[i]) == sign_of(b[i]);
  return static_cast<double>(agree) / static_cast<double>(a.size());
}

ValidationReport validate_influence(const ModelSpec& spec, const ObservationTable& train,
                                    const ObservationTable& test, std::size_t sample_size,
                                    std::uint64_t seed, const SolverConfig& cfg) {
  const std::size_t n = train.size();
  if (sample_size == 0 || sample_size > n) {
    throw DataError("validation sample size " + std::to_string(sample_size) +
                    " must lie in [1, " + std::to_string(n) + "]");
  }
  const FittedModel model = fit_converged(spec, train, "full-data fit");
  ValuationVector valuation = estimate_loo_deltas(model, train, test, cfg);

  std::mt19937_64 rng(seed);
  auto order = shuffled_indices(n, rng);
  order.resize(sample_size);
  std::sort(order.begin(), order.end());

  ValidationReport report;
  report.loss = spec.loss;
  report.sampled_indices = order;
  report.estimated.reserve(sample_size);
  for (std::size_t i : order) report.estimated.push_back(valuation.deltas[i]);
  report.exact = exact_loo_deltas(spec, train, test, order);
  if (sample_size >= 2) {
    report.pearson_r = pearson_correlation(report.estimated, report.exact);
    report.spearman_r = spearman_correlation(report.estimated, report.exact);
  }
  report.sign_agreement = sign_agreement(report.estimated, report.exact);
  report.solver = std::move(valuation.solver);
  return report;
}

nlohmann::json to_json(const ValidationReport& report) {
  nlohmann::json doc = {{"indices", report.sampled_indices},
                        {"estimated", report.estimated},
                        {"exact", report.exact},
                        {"pearson_r", report.pearson_r},
                        {"spearman_r", report.spearman_r},
                        {"sign_agreement", report.sign_agreement},
                        {"solver_diagnostics", to_json(report.solver)},
                        {"loss", to_string(report.loss)}};
  if (report.loss == LossFamily::smooth_hinge) {
    doc["note"] =
        "influence estimates are typically less accurate for the smoothed-hinge SVM than for "
        "logistic regression; expect a lower correlation";
  }
  return doc;
}

}  // namespace ddsim
