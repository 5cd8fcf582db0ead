#include "selfbound/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace selfbound {

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("bound evaluation requires epsilon > 0");
}

void check_hypothesis(const LossModel& loss, double gamma, double eta, long steps,
                      double epsilon) {
  const double rho = loss.rho(epsilon, gamma);
  if (epsilon > rho * rho / (eta * static_cast<double>(steps)) * (1.0 + 1e-12)) {
    throw std::invalid_argument(
        "theorem hypothesis violated: epsilon > rho(epsilon)^2 / (eta T)");
  }
}

}  // namespace

double opt_bound_form(double rho, double epsilon, double eta, long steps, bool sgd) {
  const double scale = sgd ? 2.0 : 1.0;
  return rho * rho / (scale * eta * static_cast<double>(steps)) + epsilon;
}

double gen_bound_lipschitz_form(double rho, double epsilon, double lipschitz, double c,
                                double delta, double eta, long steps, long count, bool sgd) {
  const double big_t = static_cast<double>(steps);
  const double inner = rho * rho / eta + epsilon * big_t;  // eta * sum_t F_hat(w_t) budget
  return opt_bound_form(rho, epsilon, eta, steps, sgd) +
         2.0 * eta * std::pow(big_t, delta) * lipschitz * c / static_cast<double>(count) *
             std::pow(inner, 1.0 - delta);
}

double gen_bound_smooth_form(double rho, double epsilon, double smoothness, double c,
                             double delta, double eta, long steps, long count) {
  const double big_t = static_cast<double>(steps);
  const double inner = rho * rho / eta + epsilon * big_t;
  return 4.0 * opt_bound_form(rho, epsilon, eta, steps, false) +
         3.0 * smoothness * c * c * eta * eta * std::pow(big_t, 2.0 * delta) /
             std::pow(static_cast<double>(count), 1.0 + 2.0 * delta) *
             std::pow(inner, 2.0 * (1.0 - delta));
}

double opt_bound_gd(const LossModel& loss, double gamma, double eta, long steps, double epsilon) {
  check_epsilon(epsilon);
  return opt_bound_form(loss.rho(epsilon, gamma), epsilon, eta, steps, false);
}

double opt_bound_sgd(const LossModel& loss, double gamma, double eta, long steps, double epsilon) {
  check_epsilon(epsilon);
  return opt_bound_form(loss.rho(epsilon, gamma), epsilon, eta, steps, true);
}

GenBound gen_bound_gd(const LossModel& loss, double gamma, double eta, long steps, long count,
                      double epsilon) {
  check_epsilon(epsilon);
  check_hypothesis(loss, gamma, eta, steps, epsilon);
  const LossConstants& k = loss.constants();
  const double rho = loss.rho(epsilon, gamma);

  GenBound out;
  if (k.lipschitz_bounded()) {
    out.lipschitz_form = gen_bound_lipschitz_form(rho, epsilon, k.lipschitz, k.self_bound_c,
                                                  k.self_bound_delta, eta, steps, count, false);
  }
  out.smooth_form = gen_bound_smooth_form(rho, epsilon, k.smoothness, k.self_bound_c,
                                          k.self_bound_delta, eta, steps, count);
  return out;
}

double gen_bound_sgd(const LossModel& loss, double gamma, double eta, long steps, long count,
                     double epsilon) {
  check_epsilon(epsilon);
  if (!loss.constants().lipschitz_bounded()) {
    throw std::invalid_argument("SGD bound needs a finite Lipschitz constant; " +
                                to_string(loss.family()) + " is not Lipschitz");
  }
  check_hypothesis(loss, gamma, eta, steps, epsilon);
  const LossConstants& k = loss.constants();
  return gen_bound_lipschitz_form(loss.rho(epsilon, gamma), epsilon, k.lipschitz, k.self_bound_c,
                                  k.self_bound_delta, eta, steps, count, true);
}

LossModel with_delta(const LossModel& loss, double delta) {
  switch (loss.family()) {
    case LossFamily::SuperExponential: return LossModel::super_exponential(loss.alpha(), delta);
    case LossFamily::Probit: return LossModel::probit(delta);
    default: return loss;
  }
}

namespace {

// Largest epsilon with epsilon <= rho(epsilon)^2 / (eta T); both sides are
// monotone (left up, right down), so bisection on the sign of the gap.
double saturating_epsilon(const LossModel& loss, double gamma, double eta, long steps) {
  const double big_t = static_cast<double>(steps);
  auto gap = [&](double eps) {
    const double rho = loss.rho(eps, gamma);
    return rho * rho / (eta * big_t) - eps;
  };
  double lo = 1e-300;
  double hi = loss.value(0.0);
  if (gap(hi) >= 0.0) return hi;
  for (int it = 0; it < 300; ++it) {
    const double mid = std::sqrt(lo * hi);  // log-scale bisection
    if (gap(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace

EpsilonChoice select_epsilon(const LossModel& loss, double gamma, double eta, long steps,
                             long count, EpsilonMode mode) {
  if (steps < 2) throw std::invalid_argument("select_epsilon requires T >= 2");
  const double big_t = static_cast<double>(steps);

  EpsilonChoice corollary;
  corollary.delta = loss.delta();
  switch (loss.family()) {
    case LossFamily::Logistic:
    case LossFamily::MulticlassCE:
    case LossFamily::Exponential:
      corollary.epsilon = 1.0 / big_t;
      break;
    case LossFamily::Probit:
      corollary.epsilon = 1.0 / big_t;
      corollary.delta = 1.0 / (2.0 * std::log(big_t));
      break;
    case LossFamily::SubExponential:
      corollary.epsilon = loss.alpha() / big_t;
      break;
    case LossFamily::SuperExponential:
      corollary.epsilon = loss.alpha() / big_t;
      corollary.delta = 1.0 / std::log(big_t);
      break;
    case LossFamily::PolynomialTail:
      corollary.epsilon = saturating_epsilon(loss, gamma, eta, steps);
      break;
  }
  if (mode == EpsilonMode::Corollary) return corollary;

  // Grid minimization of the applicable bound over hypothesis-satisfying
  // candidates; the corollary point is always a candidate, so the result
  // never does worse than it.
  const LossModel scan_model = with_delta(loss, corollary.delta);
  const double lo = 1.0 / (big_t * big_t);
  const double hi = scan_model.value(0.0);
  std::vector<double> candidates;
  candidates.reserve(101);
  for (int i = 0; i < 100; ++i) {
    candidates.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / 99.0));
  }
  candidates.push_back(corollary.epsilon);

  auto bound_at = [&](double eps) {
    const GenBound b = gen_bound_gd(scan_model, gamma, eta, steps, count, eps);
    return b.lipschitz_form ? *b.lipschitz_form : b.smooth_form;
  };

  EpsilonChoice best;
  best.delta = corollary.delta;
  double best_value = std::numeric_limits<double>::infinity();
  for (double eps : candidates) {
    const double rho = scan_model.rho(eps, gamma);
    if (eps > rho * rho / (eta * big_t)) continue;
    const double value = bound_at(eps);
    if (value < best_value) {
      best_value = value;
      best.epsilon = eps;
    }
  }
  return best;
}

std::vector<RatePoint> table_rate_curves(const LossModel& loss, double gamma,
                                         const std::vector<double>& sweep_values, bool sweep_is_t,
                                         double fixed_other) {
  if (sweep_values.empty()) throw std::invalid_argument("rate curve sweep needs values");
  std::vector<RatePoint> out;
  out.reserve(sweep_values.size());
  const double alpha = loss.alpha();
  const double g2 = gamma * gamma;
  for (double v : sweep_values) {
    const double t = sweep_is_t ? v : fixed_other;
    const double n = sweep_is_t ? fixed_other : v;
    const double log_t2 = std::log(t) * std::log(t);
    RatePoint p;
    p.sweep_value = v;
    switch (loss.family()) {
      case LossFamily::Logistic:
      case LossFamily::Exponential:
        p.term_opt = log_t2 / (g2 * t);
        p.term_gen = log_t2 / (g2 * n);
        break;
      case LossFamily::MulticlassCE: {
        const double lkt2 = std::pow(std::log(static_cast<double>(loss.num_classes()) * t), 2.0);
        p.term_opt = lkt2 / (g2 * t);
        p.term_gen = lkt2 / (g2 * n);
        break;
      }
      case LossFamily::PolynomialTail: {
        const double lead = std::pow(alpha / gamma, 2.0 * alpha / (2.0 + alpha));
        p.term_opt = lead / std::pow(t, alpha / (2.0 + alpha));
        p.term_gen = lead * std::pow(t, 2.0 / (2.0 + alpha)) / n;
        p.at_t_equals_n = std::abs(t - n) < 0.5;
        break;
      }
      case LossFamily::SubExponential: {
        const double logs = std::pow(std::log(t), 2.0 / alpha);
        p.term_opt = alpha * logs / (g2 * t);
        p.term_gen = alpha * alpha * logs / (g2 * n);
        break;
      }
      case LossFamily::SuperExponential: {
        p.term_opt = alpha * alpha * std::pow(std::log(t), 2.0 / alpha) / (g2 * t);
        p.term_gen = alpha * alpha * std::pow(std::log(t), (2.0 + alpha) / alpha) / (g2 * n);
        break;
      }
      case LossFamily::Probit:
        p.term_opt = std::log(t) / (g2 * t);
        p.term_gen = std::pow(std::log(t), 4.0) / (g2 * g2 * n);
        break;
    }
    p.total = p.term_opt + p.term_gen;
    out.push_back(p);
  }
  return out;
}

nlohmann::json BoundEvaluation::to_json() const {
  nlohmann::json j;
  j["epsilon_choice"] = epsilon;
  j["rho_eps"] = rho_eps;
  j["opt_bound"] = opt_bound;
  j["gen_bound_lipschitz"] =
      gen_bound_lipschitz ? nlohmann::json(*gen_bound_lipschitz) : nlohmann::json(nullptr);
  j["gen_bound_smooth"] = gen_bound_smooth;
  j["measured_train"] = measured_train;
  j["measured_test"] = measured_test;
  j["measured_test_stderr"] = measured_test_stderr;
  j["constants"] = {{"G", std::isfinite(lipschitz) ? nlohmann::json(lipschitz)
                                                   : nlohmann::json("unbounded")},
                    {"L", std::isfinite(smoothness) ? nlohmann::json(smoothness)
                                                    : nlohmann::json("unbounded")},
                    {"c", self_bound_c},
                    {"delta", self_bound_delta},
                    {"eta", eta},
                    {"T", steps},
                    {"n", count},
                    {"gamma", gamma}};
  return j;
}

}  // namespace selfbound
