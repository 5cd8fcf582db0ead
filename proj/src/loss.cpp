#include "selfbound/loss.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfbound/special.hpp"

namespace selfbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kE = 2.7182818284590452353602874713527;
constexpr double kSqrtPi = 1.7724538509055160272981674833411;

void require_finite(double y) {
  if (!std::isfinite(y)) throw std::invalid_argument("loss evaluation: non-finite margin");
}

void check_delta(double delta) {
  if (!(delta > 0.0) || delta > 0.5) {
    throw std::out_of_range("self-bound delta must lie in (0, 1/2]");
  }
}

// log(1 + e^{-y}) without overflow on either side.
double log1pexp_neg(double y) {
  return y >= 0.0 ? std::log1p(std::exp(-y)) : -y + std::log1p(std::exp(y));
}

LossEval eval_logistic(double y) {
  const double s = 1.0 / (1.0 + std::exp(y));  // sigmoid(-y)
  return {log1pexp_neg(y), -s, s * (1.0 - s)};
}

LossEval eval_polynomial(double y, double a) {
  if (y < 0.0) return {1.0 - a * y, -a, 0.0};
  const double p = std::pow(1.0 + y, -a);
  return {p, -a * p / (1.0 + y), a * (a + 1.0) * p / ((1.0 + y) * (1.0 + y))};
}

// Shared tail exp(-(1+y)^alpha); sub- vs super-exponential differ only in
// the admissible alpha range and certified constants.
LossEval eval_power_exp(double y, double a) {
  if (y < 0.0) return {(1.0 - a * y) / kE, -a / kE, 0.0};
  const double base = 1.0 + y;
  const double u = std::pow(base, a);  // (1+y)^alpha
  const double v = std::exp(-u);
  const double q = u / base;  // (1+y)^(alpha-1)
  const double first = -a * q * v;
  const double second = v * (a * a * q * q - a * (a - 1.0) * q / base);
  return {v, first, second};
}

LossEval eval_exponential(double y) {
  const double v = std::exp(-y);
  return {v, -v, v};
}

// Decreasing probit loss l(y) = stable_log_half_erfc(-y). With
// m(u) = -log(erfc(u)/2): m'(u) = (2/sqrt(pi)) e^{-u^2}/erfc(u) and
// m''(u) = m'(u) (m'(u) - 2u), so l'(y) = -m'(-y), l''(y) = m''(-y).
double probit_m_prime(double u) {
  if (u >= 8.0) return 2.0 / (kSqrtPi * erfcx(u));
  // erfc(u) is well scaled on (-30, 8); direct ratio.
  return 2.0 / kSqrtPi * std::exp(-u * u) / std::erfc(u);
}

LossEval eval_probit(double y) {
  if (std::abs(y) > 30.0) throw std::domain_error("probit loss: |margin| > 30");
  const double u = -y;
  const double mp = probit_m_prime(u);
  return {stable_log_half_erfc(u), -mp, mp * (mp - 2.0 * u)};
}

LossEval eval_multiclass_scalar(double y, int k) {
  // Symmetric-margin slice: every wrong class at margin y,
  // l(y) = log(1 + (K-1) e^{-y}).
  const double km1 = static_cast<double>(k - 1);
  double value, s;
  if (y >= 0.0) {
    const double x = km1 * std::exp(-y);
    value = std::log1p(x);
    s = x / (1.0 + x);
  } else {
    value = -y + std::log(std::exp(y) + km1);
    s = km1 / (std::exp(y) + km1);
  }
  return {value, -s, s * (1.0 - s)};
}

}  // namespace

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::Logistic: return "logistic";
    case LossFamily::PolynomialTail: return "polynomial";
    case LossFamily::SubExponential: return "subexp";
    case LossFamily::SuperExponential: return "superexp";
    case LossFamily::Probit: return "probit";
    case LossFamily::Exponential: return "exponential";
    case LossFamily::MulticlassCE: return "multiclass";
  }
  throw std::logic_error("unknown loss family");
}

LossFamily loss_family_from_string(const std::string& name) {
  if (name == "logistic") return LossFamily::Logistic;
  if (name == "polynomial" || name == "poly") return LossFamily::PolynomialTail;
  if (name == "subexp") return LossFamily::SubExponential;
  if (name == "superexp" || name == "supexp") return LossFamily::SuperExponential;
  if (name == "probit") return LossFamily::Probit;
  if (name == "exponential" || name == "exp") return LossFamily::Exponential;
  if (name == "multiclass") return LossFamily::MulticlassCE;
  throw std::invalid_argument("unknown loss family: " + name);
}

LossModel LossModel::logistic() {
  return LossModel(LossFamily::Logistic, 0.0, 0, {1.0, 1.0, 1.0, 0.0});
}

LossModel LossModel::polynomial_tail(double alpha) {
  if (!(alpha > 0.0)) throw std::out_of_range("polynomial tail requires alpha > 0");
  return LossModel(LossFamily::PolynomialTail, alpha, 0, {alpha, alpha * (alpha + 1.0), alpha, 0.0});
}

LossModel LossModel::sub_exponential(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::out_of_range("sub-exponential tail requires 0 < alpha < 1");
  }
  return LossModel(LossFamily::SubExponential, alpha, 0, {alpha, alpha, alpha, 0.0});
}

LossModel LossModel::super_exponential(double alpha, double delta) {
  if (!(alpha >= 1.0)) throw std::out_of_range("super-exponential tail requires alpha >= 1");
  check_delta(delta);
  return LossModel(LossFamily::SuperExponential, alpha, 0,
                   {alpha, alpha * alpha, alpha / (kE * delta), delta});
}

LossModel LossModel::probit(double delta) {
  check_delta(delta);
  return LossModel(LossFamily::Probit, 0.0, 0, {kInf, 4.0, 8.0 / (kE * delta), delta});
}

LossModel LossModel::exponential() {
  return LossModel(LossFamily::Exponential, 0.0, 0, {kInf, kInf, 1.0, 0.0});
}

LossModel LossModel::multiclass_cross_entropy(int num_classes) {
  if (num_classes < 2) throw std::out_of_range("multiclass loss requires K >= 2");
  return LossModel(LossFamily::MulticlassCE, 0.0, num_classes, {2.0, 2.0, 2.0, 0.0});
}

LossModel LossModel::from_json(const nlohmann::json& spec) {
  const LossFamily family = loss_family_from_string(spec.at("family").get<std::string>());
  switch (family) {
    case LossFamily::Logistic: return logistic();
    case LossFamily::PolynomialTail: return polynomial_tail(spec.at("alpha").get<double>());
    case LossFamily::SubExponential: return sub_exponential(spec.at("alpha").get<double>());
    case LossFamily::SuperExponential:
      return super_exponential(spec.at("alpha").get<double>(), spec.at("delta").get<double>());
    case LossFamily::Probit: return probit(spec.at("delta").get<double>());
    case LossFamily::Exponential: return exponential();
    case LossFamily::MulticlassCE: return multiclass_cross_entropy(spec.at("K").get<int>());
  }
  throw std::logic_error("unknown loss family");
}

nlohmann::json LossModel::to_json() const {
  nlohmann::json j;
  j["family"] = to_string(family_);
  switch (family_) {
    case LossFamily::PolynomialTail:
    case LossFamily::SubExponential:
      j["alpha"] = alpha_;
      break;
    case LossFamily::SuperExponential:
      j["alpha"] = alpha_;
      j["delta"] = delta();
      break;
    case LossFamily::Probit:
      j["delta"] = delta();
      break;
    case LossFamily::MulticlassCE:
      j["K"] = num_classes_;
      break;
    default:
      break;
  }
  return j;
}

bool LossModel::has_completion() const noexcept {
  return family_ == LossFamily::PolynomialTail || family_ == LossFamily::SubExponential ||
         family_ == LossFamily::SuperExponential;
}

TailCompletion LossModel::completion() const {
  if (!has_completion()) throw std::logic_error("loss family has no tail completion");
  if (family_ == LossFamily::PolynomialTail) return {0.0, 1.0, -alpha_};
  return {0.0, 1.0 / kE, -alpha_ / kE};
}

LossEval LossModel::evaluate(double margin) const {
  require_finite(margin);
  switch (family_) {
    case LossFamily::Logistic: return eval_logistic(margin);
    case LossFamily::PolynomialTail: return eval_polynomial(margin, alpha_);
    case LossFamily::SubExponential:
    case LossFamily::SuperExponential: return eval_power_exp(margin, alpha_);
    case LossFamily::Probit: return eval_probit(margin);
    case LossFamily::Exponential: return eval_exponential(margin);
    case LossFamily::MulticlassCE: return eval_multiclass_scalar(margin, num_classes_);
  }
  throw std::logic_error("unknown loss family");
}

double LossModel::inverse(double epsilon) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("loss inverse requires epsilon > 0");
  switch (family_) {
    case LossFamily::Logistic:
      // log(1+e^{-y}) = eps  <=>  y = -log(e^eps - 1)
      return -std::log(std::expm1(epsilon));
    case LossFamily::PolynomialTail:
      if (epsilon <= 1.0) return std::pow(epsilon, -1.0 / alpha_) - 1.0;
      return (1.0 - epsilon) / alpha_;  // linear branch 1 - alpha*y
    case LossFamily::SubExponential:
    case LossFamily::SuperExponential:
      if (epsilon <= 1.0 / kE) return std::pow(std::log(1.0 / epsilon), 1.0 / alpha_) - 1.0;
      return (1.0 - kE * epsilon) / alpha_;  // linear branch (1 - alpha*y)/e
    case LossFamily::Exponential:
      return -std::log(epsilon);
    case LossFamily::MulticlassCE: {
      // log(1 + (K-1) e^{-y}) = eps
      const double x = std::expm1(epsilon) / static_cast<double>(num_classes_ - 1);
      return -std::log(x);
    }
    case LossFamily::Probit: {
      // No closed form; bisect the monotone decreasing value.
      double lo = -30.0, hi = 30.0;
      if (value(lo) < epsilon) return lo;
      if (value(hi) > epsilon) return hi;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value(mid) > epsilon) {
          lo = mid;
        } else {
          hi = mid;
        }
        if (hi - lo < 1e-14 * std::max(1.0, std::abs(lo))) break;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw std::logic_error("unknown loss family");
}

double LossModel::rho(double epsilon, double gamma) const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("rho requires epsilon > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("rho requires gamma in (0, 1]");
  return std::max(inverse(epsilon) / gamma, 1.0);
}

MulticlassEval multiclass_loss_and_grad(const Eigen::VectorXd& stacked_weights,
                                        const Eigen::VectorXd& instance, int label,
                                        int num_classes) {
  const Eigen::Index d = instance.size();
  if (stacked_weights.size() != static_cast<Eigen::Index>(num_classes) * d) {
    throw std::invalid_argument("multiclass loss: weight vector is not K*d");
  }
  if (label < 1 || label > num_classes) {
    throw std::invalid_argument("multiclass loss: label out of range");
  }

  // s_j = (w_label - w_j) . x; s_label = 0. Loss = log sum_j exp(-s_j),
  // softmax probabilities p_j = exp(-s_j) / sum.
  const auto block = [&](int j) { return stacked_weights.segment(static_cast<Eigen::Index>(j - 1) * d, d); };
  Eigen::VectorXd neg_s(num_classes);
  const double proj_label = block(label).dot(instance);
  for (int j = 1; j <= num_classes; ++j) {
    neg_s(j - 1) = (j == label) ? 0.0 : block(j).dot(instance) - proj_label;
  }
  const double m = neg_s.maxCoeff();
  const Eigen::VectorXd expv = (neg_s.array() - m).exp();
  const double total = expv.sum();
  const double value = m + std::log(total);

  MulticlassEval out;
  out.value = value;
  out.gradient = Eigen::VectorXd::Zero(stacked_weights.size());
  const Eigen::VectorXd p = expv / total;
  for (int j = 1; j <= num_classes; ++j) {
    if (j == label) continue;
    out.gradient.segment(static_cast<Eigen::Index>(j - 1) * d, d) = p(j - 1) * instance;
  }
  out.gradient.segment(static_cast<Eigen::Index>(label - 1) * d, d) = -(1.0 - p(label - 1)) * instance;
  return out;
}

}  // namespace selfbound
