#include "selfbound/special.hpp"

#include <cmath>
#include <stdexcept>

namespace selfbound {

namespace {
constexpr double kSqrtPi = 1.7724538509055160272981674833411;
constexpr double kLog2 = 0.69314718055994530941723212145818;
constexpr double kAsymptoticCutoff = 8.0;
}  // namespace

double erfcx(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("erfcx: requires x >= 0");
  if (x < kAsymptoticCutoff) {
    return std::exp(x * x) * std::erfc(x);
  }
  // Asymptotic series; terms shrink until 2k-1 ~ 2x^2, far past convergence
  // at this cutoff.
  const double inv2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 40; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv2x2;
    sum += term;
    if (std::abs(term) < 1e-20 * std::abs(sum)) break;
  }
  return sum / (x * kSqrtPi);
}

double stable_log_half_erfc(double y) {
  if (!std::isfinite(y)) throw std::invalid_argument("stable_log_half_erfc: non-finite input");
  if (std::abs(y) > 30.0) throw std::domain_error("stable_log_half_erfc: |y| > 30");
  if (y < 0.0) {
    // erfc(y)/2 = 1 - erfc(-y)/2; the result is tiny, keep it via log1p.
    return -std::log1p(-0.5 * std::erfc(-y));
  }
  if (y < kAsymptoticCutoff) {
    return -std::log(0.5 * std::erfc(y));
  }
  return y * y + kLog2 - std::log(erfcx(y));
}

double erfc_tail_lower(double y) {
  if (y > 0.0) {
    return 2.0 / kSqrtPi * std::exp(-y * y) * (2.0 * y * y - 1.0) / (4.0 * y * y * y);
  }
  if (y < 0.0) return 2.0 - erfc_tail_upper(-y);
  throw std::invalid_argument("erfc_tail_lower: y must be nonzero");
}

double erfc_tail_upper(double y) {
  if (y > 0.0) {
    return std::exp(-y * y) / (y * kSqrtPi);
  }
  if (y < 0.0) return 2.0 - erfc_tail_lower(-y);
  throw std::invalid_argument("erfc_tail_upper: y must be nonzero");
}

}  // namespace selfbound
