#include "ddsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddsim/cg.hpp"
#include "ddsim/errors.hpp"
#include "ddsim/kernels.hpp"
#include "ddsim/linalg.hpp"

namespace ddsim {

namespace {

// log(1 + e^z) without overflow for any finite z.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_dims(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw DataError(std::string("dimension mismatch in ") + what + ": expected " +
                    std::to_string(expected) + ", got " + std::to_string(actual));
  }
}

void add_regularizer(double l2, std::span<const double> theta, std::span<double> out) {
  // Last entry is the unregularized intercept.
  for (std::size_t j = 0; j + 1 < theta.size(); ++j) out[j] += l2 * theta[j];
}

std::vector<double> scores(std::span<const double> theta, const ObservationTable& table) {
  check_dims(table.dim() + 1, theta.size(), "parameter vector");
  std::vector<double> s(table.size());
  kernels::affine_scores(table.features, theta, s);
  return s;
}

}  // namespace

std::string to_string(LossFamily family) {
  return family == LossFamily::logistic ? "logistic" : "smooth_hinge";
}

LossFamily parse_loss_family(std::string_view name) {
  if (name == "logistic") return LossFamily::logistic;
  if (name == "smooth_hinge") return LossFamily::smooth_hinge;
  throw ConfigError("unknown loss family '" + std::string(name) +
                    "' (expected logistic or smooth_hinge)");
}

void validate_spec(const ModelSpec& spec) {
  if (!(spec.l2 > 0.0)) throw ConfigError("model l2 strength must be positive");
  if (!(spec.hinge_temperature > 0.0)) throw ConfigError("hinge temperature must be positive");
  if (!(spec.tolerance > 0.0)) throw ConfigError("optimizer tolerance must be positive");
  if (spec.max_iterations <= 0) throw ConfigError("max_iterations must be positive");
}

double loss_value(const ModelSpec& spec, double score, double label) {
  const double margin = label * score;
  if (spec.loss == LossFamily::logistic) return softplus(-margin);
  const double t = spec.hinge_temperature;
  return t * softplus((1.0 - margin) / t);
}

double loss_slope(const ModelSpec& spec, double score, double label) {
  const double margin = label * score;
  if (spec.loss == LossFamily::logistic) return -label * sigmoid(-margin);
  return -label * sigmoid((1.0 - margin) / spec.hinge_temperature);
}

double loss_curvature(const ModelSpec& spec, double score, double label) {
  const double margin = label * score;
  if (spec.loss == LossFamily::logistic) return sigmoid(margin) * sigmoid(-margin);
  const double t = spec.hinge_temperature;
  const double z = (1.0 - margin) / t;
  return sigmoid(z) * sigmoid(-z) / t;
}

double per_example_loss(const FittedModel& model, std::span<const double> x, double label) {
  check_dims(model.dim(), x.size(), "feature vector");
  const std::span<const double> theta(model.theta);
  return loss_value(model.spec, linalg::dot(theta.first(x.size()), x) + theta.back(), label);
}

std::vector<double> per_example_gradient(const ModelSpec& spec, std::span<const double> theta,
                                         std::span<const double> x, double label) {
  check_dims(x.size() + 1, theta.size(), "parameter vector");
  const double s = linalg::dot(theta.first(x.size()), x) + theta.back();
  const double slope = loss_slope(spec, s, label);
  std::vector<double> g(theta.size());
  for (std::size_t j = 0; j < x.size(); ++j) g[j] = slope * x[j];
  g.back() = slope;
  return g;
}

double mean_loss(const ModelSpec& spec, std::span<const double> theta,
                 const ObservationTable& table) {
  std::vector<double> s = scores(theta, table);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = loss_value(spec, s[i], table.labels[i]);
  return kernels::blocked_sum(s) / static_cast<double>(table.size());
}

double objective(const ModelSpec& spec, std::span<const double> theta,
                 const ObservationTable& table) {
  double penalty = 0.0;
  for (std::size_t j = 0; j + 1 < theta.size(); ++j) penalty += theta[j] * theta[j];
  return mean_loss(spec, theta, table) + 0.5 * spec.l2 * penalty;
}

std::vector<double> total_gradient(const ModelSpec& spec, std::span<const double> theta,
                                   const ObservationTable& table, bool include_regularizer) {
  std::vector<double> coef = scores(theta, table);
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] = loss_slope(spec, coef[i], table.labels[i]);
  std::vector<double> g(theta.size());
  kernels::weighted_row_sum(table.features, coef, g);
  const double inv_n = 1.0 / static_cast<double>(table.size());
  for (double& v : g) v *= inv_n;
  if (include_regularizer) add_regularizer(spec.l2, theta, g);
  return g;
}

std::vector<double> total_gradient(const FittedModel& model, const ObservationTable& table,
                                   bool include_regularizer) {
  return total_gradient(model.spec, model.theta, table, include_regularizer);
}

HessianOperator::HessianOperator(const ModelSpec& spec, std::span<const double> theta,
                                 const ObservationTable& table, double damping)
    : table_(&table), l2_(spec.l2), damping_(damping), curvature_(scores(theta, table)) {
  for (std::size_t i = 0; i < curvature_.size(); ++i) {
    curvature_[i] = loss_curvature(spec, curvature_[i], table.labels[i]);
  }
}

std::vector<double> HessianOperator::apply(std::span<const double> v) const {
  check_dims(table_->dim() + 1, v.size(), "Hessian-vector product");
  std::vector<double> coef(table_->size());
  kernels::affine_scores(table_->features, v, coef);
  for (std::size_t i = 0; i < coef.size(); ++i) coef[i] *= curvature_[i];
  std::vector<double> hv(v.size());
  kernels::weighted_row_sum(table_->features, coef, hv);
  const double inv_n = 1.0 / static_cast<double>(table_->size());
  for (double& x : hv) x *= inv_n;
  add_regularizer(l2_, v, hv);
  if (damping_ != 0.0) linalg::axpy(damping_, v, hv);
  return hv;
}

std::vector<double> hessian_vector_product(const ModelSpec& spec,
                                           std::span<const double> theta,
                                           const ObservationTable& table,
                                           std::span<const double> v) {
  return HessianOperator(spec, theta, table).apply(v);
}

std::vector<double> hessian_vector_product(const FittedModel& model,
                                           const ObservationTable& table,
                                           std::span<const double> v) {
  return hessian_vector_product(model.spec, model.theta, table, v);
}

FittedModel train(const ModelSpec& spec, const ObservationTable& table) {
  validate_spec(spec);
  validate_table(table, true);

  const std::size_t width = table.dim() + 1;
  FittedModel model;
  model.spec = spec;
  model.theta.assign(width, 0.0);

  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;
  const double eps = std::numeric_limits<double>::epsilon();
  const int cg_limit = static_cast<int>(2 * width + 10);

  std::vector<double> grad = total_gradient(spec, model.theta, table, true);
  double grad_norm = linalg::norm(grad);
  double value = objective(spec, model.theta, table);

  while (grad_norm > spec.tolerance && model.iterations < spec.max_iterations) {
    ++model.iterations;
    // Inexact Newton direction: forcing term min(0.5, sqrt|g|) gives
    // superlinear convergence near the optimum.
    const HessianOperator hessian(spec, model.theta, table);
    const std::vector<double> neg_grad = linalg::scaled(grad, -1.0);
    std::vector<double> direction =
        conjugate_gradient(hessian, neg_grad, std::min(0.5, std::sqrt(grad_norm)), cg_limit)
            .solution;
    double slope = linalg::dot(grad, direction);
    if (!(slope < 0.0)) {
      direction = neg_grad;
      slope = -grad_norm * grad_norm;
    }

    bool accepted = false;
    std::vector<double> candidate(width);
    for (double step = 1.0; step >= kMinStep; step *= 0.5) {
      for (std::size_t j = 0; j < width; ++j) candidate[j] = model.theta[j] + step * direction[j];
      const double next_value = objective(spec, candidate, table);
      if (next_value <= value + kArmijo * step * slope) {
        value = next_value;
        accepted = true;
        break;
      }
      // Near the optimum the objective decrease falls below rounding; accept a
      // step that leaves the objective flat to rounding and shrinks the gradient.
      if (std::abs(next_value - value) <= 64.0 * eps * std::max(1.0, std::abs(value))) {
        const auto next_grad = total_gradient(spec, candidate, table, true);
        if (linalg::norm(next_grad) < grad_norm) {
          value = next_value;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) break;
    model.theta = candidate;
    grad = total_gradient(spec, model.theta, table, true);
    grad_norm = linalg::norm(grad);
  }

  model.final_gradient_norm = grad_norm;
  model.converged = grad_norm <= spec.tolerance;
  return model;
}

}  // namespace ddsim
