#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ddsim/dataset.hpp"

namespace ddsim {

enum class LossFamily { logistic, smooth_hinge };

std::string to_string(LossFamily family);
LossFamily parse_loss_family(std::string_view name);

/// L2-regularized convex binary classifier. The intercept is not regularized.
struct ModelSpec {
  LossFamily loss = LossFamily::logistic;
  double l2 = 1e-3;
  /// Softplus temperature of the smoothed hinge; ignored for logistic.
  double hinge_temperature = 0.1;
  /// Stop once the full objective gradient has Euclidean norm <= tolerance.
  double tolerance = 1e-8;
  int max_iterations = 10000;

  bool operator==(const ModelSpec&) const = default;
};

/// Throws ConfigError unless l2 > 0, t > 0, tolerance > 0, max_iterations > 0.
void validate_spec(const ModelSpec& spec);

struct FittedModel {
  /// Feature weights followed by the intercept.
  std::vector<double> theta;
  ModelSpec spec;
  double final_gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;

  std::size_t dim() const { return theta.size() - 1; }
};

// Scalar loss in terms of the score s = theta . [x; 1] and label y in {-1,+1}.
//   logistic:      log(1 + exp(-y s))
//   smooth hinge:  t log(1 + exp((1 - y s) / t))
double loss_value(const ModelSpec& spec, double score, double label);
/// d loss / d score
double loss_slope(const ModelSpec& spec, double score, double label);
/// d^2 loss / d score^2
double loss_curvature(const ModelSpec& spec, double score, double label);

double per_example_loss(const FittedModel& model, std::span<const double> x, double label);
std::vector<double> per_example_gradient(const ModelSpec& spec, std::span<const double> theta,
                                         std::span<const double> x, double label);

/// Mean per-example loss over the table, no regularizer.
double mean_loss(const ModelSpec& spec, std::span<const double> theta,
                 const ObservationTable& table);
/// Regularized empirical risk: mean loss + (l2 / 2) |w|^2.
double objective(const ModelSpec& spec, std::span<const double> theta,
                 const ObservationTable& table);

/// Mean per-example gradient, plus l2 * w when include_regularizer is set.
std::vector<double> total_gradient(const ModelSpec& spec, std::span<const double> theta,
                                   const ObservationTable& table, bool include_regularizer);
std::vector<double> total_gradient(const FittedModel& model, const ObservationTable& table,
                                   bool include_regularizer);

/// H v for the regularized objective's Hessian, without forming H.
std::vector<double> hessian_vector_product(const ModelSpec& spec,
                                           std::span<const double> theta,
                                           const ObservationTable& table,
                                           std::span<const double> v);
std::vector<double> hessian_vector_product(const FittedModel& model,
                                           const ObservationTable& table,
                                           std::span<const double> v);

/// The regularized objective's Hessian at a fixed theta, applied matrix-free.
/// Per-example curvatures are computed once at construction; each apply()
/// costs O(n d). Borrows `table`, which must outlive the operator.
class HessianOperator {
 public:
  HessianOperator(const ModelSpec& spec, std::span<const double> theta,
                  const ObservationTable& table, double damping = 0.0);

  std::vector<double> apply(std::span<const double> v) const;
  std::vector<double> operator()(std::span<const double> v) const { return apply(v); }

 private:
  const ObservationTable* table_;
  double l2_;
  double damping_;
  std::vector<double> curvature_;
};

/// Minimizes the regularized empirical risk from theta = 0 with a truncated
/// Newton method (conjugate-gradient directions, backtracking line search).
/// Never throws on non-convergence; check `converged`.
FittedModel train(const ModelSpec& spec, const ObservationTable& table);

}  // namespace ddsim
