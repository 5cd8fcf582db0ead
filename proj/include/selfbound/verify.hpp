#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "selfbound/loss.hpp"

namespace selfbound {

/// One audited property on one grid. worst_violation is the largest excess
/// of the checked quantity over what the property allows (negative values
/// mean slack); passed <=> worst_violation <= tolerance.
struct PropertyCheckResult {
  std::string property;
  double grid_min = 0;
  double grid_max = 0;
  long grid_points = 0;
  double worst_violation = -std::numeric_limits<double>::infinity();
  double worst_location = 0;
  double tolerance = 0;
  bool passed = true;

  void record(double location, double excess) {
    if (excess > worst_violation) {
      worst_violation = excess;
      worst_location = location;
    }
  }
  void finalize() { passed = worst_violation <= tolerance; }
  nlohmann::json to_json() const;
};

/// Margin grid a family is audited on: ~1e4 points on [-10, upper] with
/// log-dense coverage near 0 plus uniform tail coverage. The upper end is
/// capped per family where the loss value underflows below ~1e-290 (deep
/// super-exponential and probit tails), since no double-precision property
/// is certifiable past that point.
std::vector<double> audit_grid(const LossModel& loss);

/// Full numeric certification of a family: positivity, monotone decrease,
/// convexity (second derivative and midpoint), Lipschitz/smoothness caps,
/// self-boundedness, the 2Lf gradient bound, the log/power Lipschitz
/// equivalents, derivative/finite-difference consistency, completion splice
/// continuity and realizability of rho. Failures come back as results, not
/// errors. Pass override constants to audit a deliberately wrong claim.
std::vector<PropertyCheckResult> check_assumption_suite(
    const LossModel& loss, const std::optional<LossConstants>& override_constants = std::nullopt);

/// Tail sandwich on 1 - erf: lower <= erfc(y) <= upper on [0.8, 10] and its
/// mirror on [-10, -0.8]; plus the sub-1/sqrt(2) regime where the stated
/// lower bound is nonpositive and the inequality is recorded as trivially
/// true rather than skipped.
std::vector<PropertyCheckResult> check_erf_sandwich();

/// Second self-boundedness of the exponential loss: on margins,
/// |l''| <= c |l'| and |l'| <= c l with c = 1 (all three coincide for
/// e^{-y}); lifted check on random (w, z) pairs via the rank-one Hessian,
/// ||z||^2 e^{-w.z} <= c ||z|| e^{-w.z} given ||z|| <= 1.
std::vector<PropertyCheckResult> check_second_self_bound(std::uint64_t seed = 20240901);

bool all_passed(const std::vector<PropertyCheckResult>& results);
nlohmann::json results_to_json(const std::vector<PropertyCheckResult>& results);

}  // namespace selfbound
