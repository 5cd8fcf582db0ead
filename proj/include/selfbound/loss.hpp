#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>

#include "json.hpp"

namespace selfbound {

enum class LossFamily {
  Logistic,
  PolynomialTail,
  SubExponential,
  SuperExponential,
  Probit,
  Exponential,
  MulticlassCE,
};

std::string to_string(LossFamily family);
LossFamily loss_family_from_string(const std::string& name);

/// Certified constants of a family: Lipschitz bound G, smoothness bound L
/// (either may be +inf), and the self-bound pair (c, delta) with
/// |l'(y)| <= c * l(y)^(1-delta), 0 <= delta <= 1/2.
struct LossConstants {
  double lipschitz = 0;
  double smoothness = 0;
  double self_bound_c = 0;
  double self_bound_delta = 0;

  bool lipschitz_bounded() const { return std::isfinite(lipschitz); }
  bool smoothness_bounded() const { return std::isfinite(smoothness); }
};

/// Linear extension of a decreasing tail function below a splice point:
/// the completed function equals f(g) for g >= a and
/// f(a) * (1 + f'(a)/f(a) * (g - a)) for g < a. Continuous with continuous
/// first derivative at a; convexity, Lipschitz/smoothness bounds and the
/// self-bound constants of the tail carry over to the extension.
struct TailCompletion {
  double splice_point = 0.0;
  double value_at_splice = 0.0;  // f(a) > 0
  double slope_at_splice = 0.0;  // f'(a) <= 0

  double value(double g) const { return value_at_splice + slope_at_splice * (g - splice_point); }
};

struct LossEval {
  double value = 0;
  double first = 0;   // l'(y)
  double second = 0;  // l''(y)
};

/// A scalar margin loss with closed-form value/derivative evaluators, exact
/// inverse, and certified constants. Immutable after construction; all
/// evaluators are pure and safe for concurrent use.
///
/// Families with a restricted analytic tail (polynomial, sub- and
/// super-exponential) are completed linearly below y = 0; logistic, probit
/// and exponential are globally defined. The probit loss is oriented so it
/// decreases in the margin, l(y) = stable_log_half_erfc(-y); this is the
/// mirror of -log((1-erf(y))/2) and has identical constants.
class LossModel {
 public:
  static LossModel logistic();
  static LossModel polynomial_tail(double alpha);         // alpha > 0
  static LossModel sub_exponential(double alpha);         // 0 < alpha < 1
  static LossModel super_exponential(double alpha, double delta);  // alpha >= 1
  static LossModel probit(double delta);
  static LossModel exponential();
  static LossModel multiclass_cross_entropy(int num_classes);

  /// Serialized form {"family": ..., "alpha"?, "K"?, "delta"?}.
  static LossModel from_json(const nlohmann::json& spec);
  nlohmann::json to_json() const;

  LossFamily family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  int num_classes() const noexcept { return num_classes_; }
  double delta() const noexcept { return constants_.self_bound_delta; }
  const LossConstants& constants() const noexcept { return constants_; }

  bool has_completion() const noexcept;
  TailCompletion completion() const;

  /// l(y), l'(y), l''(y) of the completed loss. Throws on non-finite input;
  /// probit throws std::domain_error for |y| > 30.
  LossEval evaluate(double margin) const;
  double value(double margin) const { return evaluate(margin).value; }

  /// Exact inverse l^{-1}(epsilon) over the full completed range
  /// (closed form everywhere except probit, which is bisected to ~1e-13).
  double inverse(double epsilon) const;

  /// Realizability radius max(l^{-1}(epsilon)/gamma, 1): the smallest norm
  /// (clamped below by 1) at which a margin-gamma witness direction drives
  /// every per-example loss to <= epsilon.
  double rho(double epsilon, double gamma) const;

 private:
  LossModel(LossFamily family, double alpha, int num_classes, LossConstants constants)
      : family_(family), alpha_(alpha), num_classes_(num_classes), constants_(constants) {}

  LossFamily family_;
  double alpha_ = 0;
  int num_classes_ = 0;
  LossConstants constants_;
};

struct MulticlassEval {
  double value = 0;
  Eigen::VectorXd gradient;  // K*d, stacked per-class blocks
};

/// Cross-entropy-with-softmax loss of a stacked linear classifier,
///   f(w) = log sum_j exp(-(w_label - w_j) . x),
/// evaluated with max-subtracted log-sum-exp. `label` is 1-based.
MulticlassEval multiclass_loss_and_grad(const Eigen::VectorXd& stacked_weights,
                                        const Eigen::VectorXd& instance, int label,
                                        int num_classes);

}  // namespace selfbound
