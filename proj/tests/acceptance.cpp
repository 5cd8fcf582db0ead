// Acceptance suite: one numbered, self-contained check per criterion, each
// printing a single [PASS]/[FAIL] line with the measured margins. Run all
// criteria with no arguments or a single one with --criterion N.

#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "selfbound/bounds.hpp"
#include "selfbound/data.hpp"
#include "selfbound/experiment.hpp"
#include "selfbound/loss.hpp"
#include "selfbound/optimize.hpp"
#include "selfbound/stability.hpp"
#include "selfbound/verify.hpp"

using namespace selfbound;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Loss contract audit across every family/parameter combination.
Outcome criterion_loss_audit() {
  std::vector<LossModel> models;
  models.push_back(LossModel::logistic());
  for (double alpha : {0.5, 1.0, 2.0, 4.0}) models.push_back(LossModel::polynomial_tail(alpha));
  for (double alpha : {0.25, 0.5, 0.9}) models.push_back(LossModel::sub_exponential(alpha));
  for (double alpha : {1.0, 2.0, 4.0}) {
    for (double delta : {0.05, 0.25, 0.5}) {
      models.push_back(LossModel::super_exponential(alpha, delta));
    }
  }
  for (double delta : {0.1, 0.25, 0.5}) models.push_back(LossModel::probit(delta));
  for (int k : {2, 5, 10}) models.push_back(LossModel::multiclass_cross_entropy(k));
  models.push_back(LossModel::exponential());

  Outcome out;
  double worst = -1e300;
  std::string worst_where;
  long checks = 0;
  for (const LossModel& model : models) {
    for (const PropertyCheckResult& r : check_assumption_suite(model)) {
      ++checks;
      const double margin = r.worst_violation - r.tolerance;
      if (margin > worst) {
        worst = margin;
        worst_where = to_string(model.family()) + "/" + r.property;
      }
      if (!r.passed) {
        out.passed = false;
        out.detail += " FAILED " + to_string(model.family()) + "/" + r.property +
                      fmt(" (violation %.3g > tol %.3g)", r.worst_violation, r.tolerance);
      }
    }
  }
  out.detail = fmt("%.0f model configs, %.0f property checks", static_cast<double>(models.size()),
                   static_cast<double>(checks)) +
               ", tightest margin " + fmt("%.3g", worst) + " at " + worst_where + out.detail;
  return out;
}

// ---------------------------------------------------------------------------
// 2. Monotone descent plus the for-all-epsilon training-error bound.
Outcome criterion_descent_opt() {
  const LinearDataset data = sample_dataset(20, 32, 0.25, 1);
  OptimizerConfig config;
  config.step_size = 0.5;
  config.steps = 10000;
  const LossModel loss = LossModel::logistic();
  const Trajectory t = run_gd(loss, data, config);

  Outcome out;
  double worst_rise = -1e300;
  for (std::size_t i = 1; i < t.emp_risks.size(); ++i) {
    worst_rise = std::max(worst_rise, t.emp_risks[i] - t.emp_risks[i - 1]);
  }
  if (worst_rise > 1e-12) out.passed = false;

  const double mean_risk = t.risk_sum() / static_cast<double>(t.steps());
  const double excess = worst_opt_bound_excess(loss, 0.25, 0.5, 10000, mean_risk, 50, false);
  if (excess > 0.0) out.passed = false;
  out.detail = fmt("worst risk rise %.3g (tol 1e-12), worst bound excess %.4g over 50-point "
                   "epsilon grid, mean risk %.4g",
                   worst_rise, excess, mean_risk);
  return out;
}

// ---------------------------------------------------------------------------
// 3. GD stability theorems (l1 and l2), three families, three horizons,
//    five dataset seeds, strict inequality.
Outcome criterion_gd_stability() {
  Outcome out;
  double worst_r1 = 0, worst_r2 = 0;
  for (long steps : {100L, 1000L, 10000L}) {
    struct Regime {
      LossModel model;
      double eta;
    };
    const Regime regimes[] = {
        {LossModel::logistic(), 0.5},
        {LossModel::polynomial_tail(2.0), 1.0 / 12.0},
        {LossModel::super_exponential(2.0, 1.0 / std::log(static_cast<double>(steps))),
         1.0 / 8.0},
    };
    for (const Regime& regime : regimes) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const LinearDataset data = sample_dataset(20, 32, 0.25, seed);
        OptimizerConfig config;
        config.step_size = regime.eta;
        config.steps = steps;
        const StabilityReport report =
            empirical_stability_gd(regime.model, data, config, 4);
        worst_r1 = std::max(worst_r1, report.ratio_l1);
        worst_r2 = std::max(worst_r2, report.ratio_l2);
        if (!(report.ratio_l1 < 1.0) || !(report.ratio_l2 < 1.0)) {
          out.passed = false;
          out.detail += " VIOLATION " + to_string(regime.model.family()) +
                        fmt(" T=%g seed=%g r1=%.4g", static_cast<double>(steps),
                            static_cast<double>(seed), report.ratio_l1);
        }
      }
    }
  }
  out.detail = fmt("45 experiments; worst l1 ratio %.4g, worst l2 ratio %.4g (need < 1)",
                   worst_r1, worst_r2) +
               out.detail;
  return out;
}

// ---------------------------------------------------------------------------
// 4. SGD stability of the averaged iterate under coupled index streams.
Outcome criterion_sgd_stability() {
  const LinearDataset data = sample_dataset(20, 32, 0.25, 11);
  OptimizerConfig config;
  config.method = StepMethod::StochasticGradientDescent;
  config.step_size = 0.5;
  config.steps = 2000;
  config.rng_seed = 11;
  const StabilityReport report =
      empirical_stability_sgd(LossModel::logistic(), data, config, 20, 4);
  Outcome out;
  out.passed = report.empirical_l1 <= report.bound_l1 + 2.0 * report.stderr_l1;
  out.detail = fmt("mean l1 %.5g (stderr %.2g) vs bound %.5g", report.empirical_l1,
                   report.stderr_l1, report.bound_l1) +
               fmt(" (ratio %.4g)", report.ratio_l1);
  return out;
}

// ---------------------------------------------------------------------------
// 5. Generalization inequalities at the published epsilon choices.
Outcome criterion_generalization() {
  Outcome out;
  const int seeds = 10;
  const int test_draws = 100000;
  const double gamma = 0.25;
  const long steps = 1000;

  auto combined_stderr = [](const std::vector<double>& means,
                            const std::vector<double>& mc_se) {
    double mean = 0;
    for (double m : means) mean += m;
    mean /= means.size();
    double var = 0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= (means.size() - 1.0);
    double mc = 0;
    for (double s : mc_se) mc += s * s;
    return std::sqrt(var / means.size() + mc / (means.size() * means.size()));
  };

  // (a) GD, logistic, Lipschitz form at epsilon = 1/T.
  {
    const LossModel loss = LossModel::logistic();
    const double eta = 0.5, eps = 1.0 / steps;
    std::vector<double> means, ses;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const LinearDataset data = sample_dataset(20, 32, gamma, 100 + seed);
      OptimizerConfig config;
      config.step_size = eta;
      config.steps = steps;
      const Trajectory t = run_gd(loss, data, config);
      const MonteCarloEstimate mc = population_loss(
          loss, distribution_of(data), t.final_iterate, test_draws, 9000 + seed);
      means.push_back(mc.mean);
      ses.push_back(mc.std_error);
    }
    double mean = 0;
    for (double m : means) mean += m;
    mean /= seeds;
    const double bound = *gen_bound_gd(loss, gamma, eta, steps, 32, eps).lipschitz_form;
    const double se = combined_stderr(means, ses);
    const bool ok = mean <= bound + 2.0 * se;
    if (!ok) out.passed = false;
    out.detail += fmt("GD mean F %.4g <= %.4g", mean, bound) + (ok ? "" : " VIOLATION") + "; ";
  }

  // (b) SGD, logistic, averaged iterate.
  {
    const LossModel loss = LossModel::logistic();
    const double eta = 0.5, eps = 1.0 / steps;
    std::vector<double> means, ses;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const LinearDataset data = sample_dataset(20, 32, gamma, 200 + seed);
      OptimizerConfig config;
      config.method = StepMethod::StochasticGradientDescent;
      config.step_size = eta;
      config.steps = steps;
      config.rng_seed = 300 + seed;
      const Trajectory t = run_sgd(loss, data, config);
      const MonteCarloEstimate mc = population_loss(
          loss, distribution_of(data), t.averaged_iterate, test_draws, 9100 + seed);
      means.push_back(mc.mean);
      ses.push_back(mc.std_error);
    }
    double mean = 0;
    for (double m : means) mean += m;
    mean /= seeds;
    const double bound = gen_bound_sgd(loss, gamma, eta, steps, 32, eps);
    const double se = combined_stderr(means, ses);
    const bool ok = mean <= bound + 2.0 * se;
    if (!ok) out.passed = false;
    out.detail += fmt("SGD mean F %.4g <= %.4g", mean, bound) + (ok ? "" : " VIOLATION") + "; ";
  }

  // (c) Probit, smooth-only route: E F <= 4 E F_hat + 3 L eps2 with the l2
  //     stability bound, plus the full explicit smooth form.
  {
    const double delta = 1.0 / (2.0 * std::log(static_cast<double>(steps)));
    const LossModel loss = LossModel::probit(delta);
    const double eta = 1.0 / (2.0 * loss.constants().smoothness);
    const double eps = 1.0 / steps;
    std::vector<double> means, ses;
    double mean_train = 0, mean_l2_bound = 0;
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const LinearDataset data = sample_dataset(20, 32, gamma, 400 + seed);
      OptimizerConfig config;
      config.step_size = eta;
      config.steps = steps;
      const Trajectory t = run_gd(loss, data, config);
      mean_train += t.emp_risks.back();
      mean_l2_bound += stability_bound_l2(loss.constants().self_bound_c, delta, eta, steps, 32,
                                          t.risk_sum());
      const MonteCarloEstimate mc = population_loss(
          loss, distribution_of(data), t.final_iterate, test_draws, 9200 + seed);
      means.push_back(mc.mean);
      ses.push_back(mc.std_error);
    }
    mean_train /= seeds;
    mean_l2_bound /= seeds;
    double mean = 0;
    for (double m : means) mean += m;
    mean /= seeds;
    const double smooth_l = loss.constants().smoothness;
    const double lemma_bound = 4.0 * mean_train + 3.0 * smooth_l * mean_l2_bound;
    const double full_bound = gen_bound_gd(loss, gamma, eta, steps, 32, eps).smooth_form;
    const double se = combined_stderr(means, ses);
    const bool ok = mean <= lemma_bound + 2.0 * se && mean <= full_bound + 2.0 * se;
    if (!ok) out.passed = false;
    out.detail += fmt("probit mean F %.4g <= 4F^+3Le2 %.4g", mean, lemma_bound) +
                  fmt(" and <= smooth form %.4g", full_bound) + (ok ? "" : " VIOLATION");
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. One-dimensional lower-bound construction: floor and upper envelope.
Outcome criterion_lower_bound() {
  Outcome out;
  std::string per_alpha;
  for (double alpha : {1.0, 2.0, 3.0}) {
    const LowerBoundTrace trace = lower_bound_run(alpha, 100000);
    long floor_violations = 0, envelope_violations = 0;
    double tightest = 1e300;
    for (std::size_t t = 0; t < trace.risks.size(); ++t) {
      if (trace.risks[t] < trace.floors[t]) ++floor_violations;
      if (trace.risks[t] > trace.upper_envelopes[t]) ++envelope_violations;
      tightest = std::min(tightest, trace.risks[t] - trace.floors[t]);
    }
    if (floor_violations != 0 || envelope_violations != 0) out.passed = false;
    per_alpha += fmt("alpha=%g: %g floor / %g envelope violations; ", alpha,
                     static_cast<double>(floor_violations),
                     static_cast<double>(envelope_violations));
  }
  out.detail = per_alpha + "T = 1e5 each";
  return out;
}

// ---------------------------------------------------------------------------
// 7. Non-smooth exponential regime under the adaptive step rule.
Outcome criterion_adaptive_exponential() {
  Outcome out;
  const LinearDataset data = sample_dataset(20, 32, 0.25, 21);
  OptimizerConfig config;
  config.method = StepMethod::AdaptiveExponential;
  config.step_size = 1.0;  // admissible: F_hat(0) = 1, c = 1
  config.steps = 10000;
  const Trajectory t = run_gd_adaptive_exp(data, config);

  double worst_rise = -1e300, worst_budget_excess = -1e300;
  double budget = 0.0;
  const double cap = 2.0 * t.emp_risks.front() / t.step_size;
  for (std::size_t i = 0; i < t.emp_risks.size(); ++i) {
    if (i > 0) worst_rise = std::max(worst_rise, t.emp_risks[i] - t.emp_risks[i - 1]);
    budget += t.grad_norms[i] * t.grad_norms[i];
    worst_budget_excess = std::max(worst_budget_excess, budget - cap);
  }
  if (worst_rise > 1e-12 || worst_budget_excess > 1e-12) out.passed = false;

  double worst_ratio = 0.0;
  for (long steps : {1000L, 10000L}) {
    OptimizerConfig loo_config = config;
    loo_config.steps = steps;
    const StabilityReport report = empirical_stability_exp_adaptive(data, loo_config, 4);
    worst_ratio = std::max(worst_ratio, report.ratio_l1);
    if (!(report.ratio_l1 <= 1.0)) out.passed = false;
  }
  out.detail = fmt("worst risk rise %.3g, worst gradient-budget excess %.3g, ", worst_rise,
                   worst_budget_excess) +
               fmt("worst loo l1 ratio %.4g (need <= 1)", worst_ratio);
  return out;
}

// ---------------------------------------------------------------------------
// 8. Rate-shape trend checks (soft, statistical; pass on >= 8 of 10 seeds).
Outcome criterion_rate_shape() {
  Outcome out;
  const int seeds = 10;
  const double gamma = 0.25;
  const int test_draws = 20000;

  // (a) Polynomial alpha=1, n=256: test loss at T = n within a factor 2 of
  // the sweep minimum over T in {n/4 .. 16n}.
  int near_minimal = 0;
  double ratio_sum = 0;
  {
    const LossModel loss = LossModel::polynomial_tail(1.0);
    const double eta = 0.25;  // 1/(2L)
    const int n = 256;
    const long sweep[] = {n / 4, n / 2, n, 2 * n, 4 * n, 16 * n};
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const LinearDataset data = sample_dataset(20, n, gamma, 500 + seed);
      double at_n = 0, best = 1e300;
      for (long steps : sweep) {
        OptimizerConfig config;
        config.step_size = eta;
        config.steps = steps;
        const Trajectory t = run_gd(loss, data, config);
        const double test = population_loss(loss, distribution_of(data), t.final_iterate,
                                            test_draws, 9300 + seed)
                                .mean;
        if (steps == n) at_n = test;
        best = std::min(best, test);
      }
      ratio_sum += at_n / best;
      if (at_n <= 2.0 * best) ++near_minimal;
    }
  }
  const bool part_a = near_minimal >= 8;

  // (b) Logistic pre-plateau log-log slope of test loss vs T in [-1.4, -0.6].
  int slope_ok = 0;
  double slope_sum = 0;
  {
    const LossModel loss = LossModel::logistic();
    const long sweep[] = {16, 32, 64, 128, 256};
    for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
      const LinearDataset data = sample_dataset(20, 4096, gamma, 600 + seed);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      int m = 0;
      for (long steps : sweep) {
        OptimizerConfig config;
        config.step_size = 0.5;
        config.steps = steps;
        const Trajectory t = run_gd(loss, data, config);
        const double test = population_loss(loss, distribution_of(data), t.final_iterate,
                                            test_draws, 9400 + seed)
                                .mean;
        const double x = std::log(static_cast<double>(steps));
        const double y = std::log(test);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
      }
      const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
      slope_sum += slope;
      if (slope >= -1.4 && slope <= -0.6) ++slope_ok;
    }
  }
  const bool part_b = slope_ok >= 8;

  out.passed = part_a && part_b;
  out.detail = fmt("T=n near-minimal on %g/10 seeds (mean ratio to sweep min %.2f, need <= 2)",
                   static_cast<double>(near_minimal), ratio_sum / seeds) +
               fmt("; slope in [-1.4,-0.6] on %g/10 seeds (mean slope %.2f)",
                   static_cast<double>(slope_ok), slope_sum / seeds);
  if (!part_a) {
    out.detail +=
        " -- NOTE: under the margin-uniform data law the measured test loss of the "
        "polynomial tail decays ~t^(-1/3) with no turn-up, so loss(n)/loss(16n) ~ 16^(1/3) "
        "~ 2.5 > 2 on every seed; the T=n optimum is a property of the bound, not of the "
        "measured loss in this realizable regime";
  }
  return out;
}

// ---------------------------------------------------------------------------
// 9. erf tail sandwich on the audit grids.
Outcome criterion_erf_sandwich() {
  Outcome out;
  double worst = -1e300;
  for (const PropertyCheckResult& r : check_erf_sandwich()) {
    worst = std::max(worst, r.worst_violation - r.tolerance);
    if (!r.passed) {
      out.passed = false;
      out.detail += " FAILED " + r.property;
    }
  }
  out.detail = fmt("zero violations; tightest margin %.3g", worst) + out.detail;
  return out;
}

struct Criterion {
  int number;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "loss contract audit", criterion_loss_audit},
    {2, "descent + training-error bound", criterion_descent_opt},
    {3, "GD stability theorems", criterion_gd_stability},
    {4, "SGD stability theorem", criterion_sgd_stability},
    {5, "generalization inequalities", criterion_generalization},
    {6, "polynomial lower bound", criterion_lower_bound},
    {7, "adaptive exponential suite", criterion_adaptive_exponential},
    {8, "rate-shape checks", criterion_rate_shape},
    {9, "erf sandwich", criterion_erf_sandwich},
};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[i + 1]);
      ++i;
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
      return 1;
    }
  }
  bool all_ok = true;
  for (const Criterion& criterion : kCriteria) {
    if (only != 0 && criterion.number != only) continue;
    const Outcome outcome = criterion.run();
    std::printf("[%s] criterion %d: %s -- %s\n", outcome.passed ? "PASS" : "FAIL",
                criterion.number, criterion.name, outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.passed) all_ok = false;
  }
  return all_ok ? 0 : 1;
}
