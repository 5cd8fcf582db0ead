#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "json.hpp"
#include "selfbound/loss.hpp"

namespace selfbound {

/// The bound expressions in plug-in form, taking rho and the constants
/// directly. The model-level entry points below compute rho(eps)/gamma and
/// pull constants from the family, then delegate here.
double opt_bound_form(double rho, double epsilon, double eta, long steps, bool sgd);
double gen_bound_lipschitz_form(double rho, double epsilon, double lipschitz, double c,
                                double delta, double eta, long steps, long count, bool sgd);
double gen_bound_smooth_form(double rho, double epsilon, double smoothness, double c,
                             double delta, double eta, long steps, long count);

/// Training-error bound of full-batch GD (eta <= 1/(2L), w_1 = 0):
/// (1/T) sum_t F_hat(w_t) <= rho(eps)^2 / (eta T) + eps, for every eps > 0.
double opt_bound_gd(const LossModel& loss, double gamma, double eta, long steps, double epsilon);

/// SGD analogue with the halved first term: rho(eps)^2 / (2 eta T) + eps.
double opt_bound_sgd(const LossModel& loss, double gamma, double eta, long steps, double epsilon);

/// Explicit (pre-simplification) generalization bounds on E[F(output)].
/// Lipschitz form:
///   (rho^2/(eta T) + eps) + (2 eta T^delta G c / n) (rho^2/eta + eps T)^(1-delta)
/// Smooth form:
///   4 (rho^2/(eta T) + eps) + (3 L c^2 eta^2 T^(2 delta) / n^(1+2 delta))
///       (rho^2/eta + eps T)^(2(1-delta))
/// The theorem hypothesis 0 < eps <= rho(eps)^2 / (eta T) is enforced; the
/// Lipschitz form is absent when G is unbounded.
struct GenBound {
  std::optional<double> lipschitz_form;
  double smooth_form = 0;
};
GenBound gen_bound_gd(const LossModel& loss, double gamma, double eta, long steps, long count,
                      double epsilon);

/// SGD bound on E[F(w_bar_T)] (Lipschitz route only):
///   (rho^2/(2 eta T) + eps) + (2 eta G c T^delta / n) (rho^2/eta + eps T)^(1-delta).
/// Throws std::invalid_argument when G is unbounded.
double gen_bound_sgd(const LossModel& loss, double gamma, double eta, long steps, long count,
                     double epsilon);

enum class EpsilonMode { Corollary, GridMin };

/// An epsilon choice plus the paired self-bound delta (meaningful for the
/// super-exponential and probit families, where the published choices are
/// delta = 1/log T and 1/(2 log T); other families keep their fixed delta).
struct EpsilonChoice {
  double epsilon = 0;
  double delta = 0;
};

/// Corollary mode returns the published per-family choice (1/T for
/// logistic, probit, multiclass and exponential; alpha/T for sub- and
/// super-exponential; the hypothesis-saturating epsilon for polynomial
/// tails). GridMin scans a 100-point log grid over [1/T^2, l(0)] plus the
/// corollary point, keeps hypothesis-satisfying candidates, and returns the
/// bound minimizer.
EpsilonChoice select_epsilon(const LossModel& loss, double gamma, double eta, long steps,
                             long count, EpsilonMode mode);

/// Applies the published delta pairing to a model (rebuilds super-
/// exponential/probit models with the given delta, returns others as-is).
LossModel with_delta(const LossModel& loss, double delta);

/// Closed-form rate curve per family with all big-O constants set to 1;
/// shape/slope comparison only, not a bound. term_opt is the T-term,
/// term_gen the n-term.
struct RatePoint {
  double sweep_value = 0;
  double term_opt = 0;
  double term_gen = 0;
  double total = 0;
  bool at_t_equals_n = false;  // polynomial-tail optimum marker
};
std::vector<RatePoint> table_rate_curves(const LossModel& loss, double gamma,
                                         const std::vector<double>& sweep_values, bool sweep_is_t,
                                         double fixed_other);

/// One evaluated bound next to the measured quantities it predicts.
struct BoundEvaluation {
  double epsilon = 0;
  double rho_eps = 0;
  double opt_bound = 0;
  std::optional<double> gen_bound_lipschitz;
  double gen_bound_smooth = 0;
  double measured_train = 0;
  double measured_test = 0;
  double measured_test_stderr = 0;
  // constants snapshot
  double lipschitz = 0, smoothness = 0, self_bound_c = 0, self_bound_delta = 0;
  double eta = 0, gamma = 0;
  long steps = 0, count = 0;

  nlohmann::json to_json() const;
};

}  // namespace selfbound
