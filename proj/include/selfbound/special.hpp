#pragma once

namespace selfbound {

/// Scaled complementary error function exp(x^2) * erfc(x) for x >= 0.
///
/// Uses exp(x^2)*std::erfc(x) below the crossover and the divergent
/// asymptotic expansion
///   erfcx(x) ~ 1/(x sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2x^2)^k
/// beyond it, where erfc itself would lose all relative precision.
double erfcx(double x);

/// -log((1 - erf(y)) / 2), accurate to >= 10 significant digits on |y| <= 30.
///
/// Three regimes: a log1p form for y < 0 (the result is a tiny positive
/// number there), a direct erfc form on [0, 8), and y^2 + log 2 -
/// log(erfcx(y)) for y >= 8 where erfc underflows. Monotone increasing.
/// Throws std::domain_error for |y| > 30 and std::invalid_argument on
/// non-finite input.
double stable_log_half_erfc(double y);

/// Tail bounds on 1 - erf(y): for y > 0,
///   (2/sqrt(pi)) e^{-y^2} (2y^2-1)/(4y^3)  <=  1-erf(y)  <=  e^{-y^2}/(y sqrt(pi)),
/// mirrored to 2 - (...) for y < 0. The lower bound is informative only
/// for y > 1/sqrt(2) (it is <= 0 below that).
double erfc_tail_lower(double y);
double erfc_tail_upper(double y);

}  // namespace selfbound
