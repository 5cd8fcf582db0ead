#pragma once

#include <limits>
#include <optional>

#include "json.hpp"
#include "selfbound/data.hpp"
#include "selfbound/loss.hpp"
#include "selfbound/optimize.hpp"

namespace selfbound {

/// Empirical on-average leave-one-out model stability next to the matching
/// theoretical bound. empirical_l1 = (1/n) sum_i ||A(S) - A(S_i)||,
/// empirical_l2 uses squared norms; ratios are empirical / bound. Fields
/// that do not apply to a given algorithm (e.g. the l2 bound for SGD) are
/// NaN and serialize as null.
struct StabilityReport {
  double empirical_l1 = 0;
  double empirical_l2 = 0;
  double bound_l1 = std::numeric_limits<double>::quiet_NaN();
  double bound_l2 = std::numeric_limits<double>::quiet_NaN();
  double ratio_l1 = std::numeric_limits<double>::quiet_NaN();
  double ratio_l2 = std::numeric_limits<double>::quiet_NaN();
  double risk_sum = 0;  // sum_t F_hat(w_t) on the full sample (replicate-averaged for SGD)
  int replicates = 1;
  double stderr_l1 = std::numeric_limits<double>::quiet_NaN();

  nlohmann::json to_json() const;
};

/// The theorem-side stability bounds in plug-in form:
///   l1: (c eta T^delta / n) (sum_t F_hat(w_t))^(1-delta)
///   l2: (c^2 eta^2 T^(2 delta) / n^(1+2 delta)) (sum_t F_hat(w_t))^(2(1-delta))
double stability_bound_l1(double c, double delta, double eta, long steps, long count,
                          double risk_sum);
double stability_bound_l2(double c, double delta, double eta, long steps, long count,
                          double risk_sum);

/// GD is deterministic, so one run per leave-one-out member settles the
/// definition's expectation; bound_l1/bound_l2 as above.
StabilityReport empirical_stability_gd(const LossModel& loss, const LinearDataset& data,
                                       const OptimizerConfig& config, int workers = 1);

/// Per replicate, one shared index stream drives the full-sample run and
/// all n coupled leave-one-out runs; compared outputs are the averaged
/// iterates. empirical_l1 is the replicate mean with its standard error;
/// the l1 bound uses the replicate-averaged risk sum.
StabilityReport empirical_stability_sgd(const LossModel& loss, const LinearDataset& data,
                                        const OptimizerConfig& config, int replicates,
                                        int workers = 1);

/// Exponential loss under the adaptive step rule; bound_l1 =
/// (eta c / n) sum_t F_hat(w_t) with delta fixed to 0 in the report.
StabilityReport empirical_stability_exp_adaptive(const LinearDataset& data,
                                                 const OptimizerConfig& config, int workers = 1);

/// Stability-to-generalization conversions: the Lipschitz route bounds the
/// gap by 2 G eps1; the smooth route bounds E[F] by 4 E[F_hat] + 3 L eps2
/// (additive term only here, the multiplicative 4 sits on the training
/// risk and is flagged). Empirical and theorem-side versions of each.
struct GapBounds {
  std::optional<double> lipschitz_gap;          // 2 G empirical_l1
  std::optional<double> lipschitz_gap_theorem;  // 2 G bound_l1
  std::optional<double> smooth_term;            // 3 L empirical_l2
  std::optional<double> smooth_term_theorem;    // 3 L bound_l2
  bool train_risk_multiplier_four = true;
};
GapBounds generalization_gap_bounds(const StabilityReport& report, const LossConstants& constants);

}  // namespace selfbound
