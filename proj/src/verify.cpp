#include "selfbound/verify.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "selfbound/rng.hpp"
#include "selfbound/special.hpp"

namespace selfbound {

namespace {

constexpr double kClosedFormTol = 1e-9;
constexpr double kFiniteDiffTol = 1e-6;
constexpr double kFiniteDiffStep = 1e-5;
constexpr double kValueFloor = 1e-290;  // smallest certifiable loss value in doubles

PropertyCheckResult make_result(std::string name, double lo, double hi, long points, double tol) {
  PropertyCheckResult r;
  r.property = std::move(name);
  r.grid_min = lo;
  r.grid_max = hi;
  r.grid_points = points;
  r.tolerance = tol;
  return r;
}

double grid_upper_cap(const LossModel& loss) {
  const double cap = loss.inverse(kValueFloor);
  return std::min(50.0, cap);
}

}  // namespace

nlohmann::json PropertyCheckResult::to_json() const {
  nlohmann::json j;
  j["property"] = property;
  j["grid"] = {{"min", grid_min}, {"max", grid_max}, {"points", grid_points}};
  j["worst_violation"] = std::isfinite(worst_violation) ? nlohmann::json(worst_violation)
                                                        : nlohmann::json(nullptr);
  j["worst_location"] = worst_location;
  j["tolerance"] = tolerance;
  j["passed"] = passed;
  return j;
}

std::vector<double> audit_grid(const LossModel& loss) {
  const double lo = -10.0;
  const double hi = grid_upper_cap(loss);
  std::vector<double> grid;
  grid.reserve(10001);
  grid.push_back(0.0);
  // Log-dense shells around the splice point, both sides.
  const int shells = 2500;
  for (int i = 0; i < shells; ++i) {
    const double mag = std::pow(10.0, -6.0 + 6.0 * static_cast<double>(i) / (shells - 1));
    if (mag <= -lo) grid.push_back(-mag);
    if (mag <= hi) grid.push_back(mag);
  }
  // Uniform coverage across the full range.
  const int uniform = 5000;
  for (int i = 0; i <= uniform; ++i) {
    grid.push_back(lo + (hi - lo) * static_cast<double>(i) / uniform);
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<PropertyCheckResult> check_assumption_suite(
    const LossModel& loss, const std::optional<LossConstants>& override_constants) {
  const LossConstants k = override_constants.value_or(loss.constants());
  const std::vector<double> grid = audit_grid(loss);
  const double lo = grid.front();
  const double hi = grid.back();
  const long points = static_cast<long>(grid.size());

  std::vector<LossEval> evals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) evals[i] = loss.evaluate(grid[i]);

  std::vector<PropertyCheckResult> results;

  // Positivity, monotone decrease, pointwise convexity. The grid cap keeps
  // values >= ~1e-290, so requiring 1e-300 leaves margin to the cap itself.
  auto positivity = make_result("positivity", lo, hi, points, -1e-300);
  auto monotone = make_result("monotone-decreasing", lo, hi, points, 0.0);
  auto convex_second = make_result("convexity-second-derivative", lo, hi, points, 1e-9);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    positivity.record(grid[i], -evals[i].value);
    monotone.record(grid[i], evals[i].first);
    convex_second.record(grid[i], -evals[i].second);
  }
  results.push_back(positivity);
  results.push_back(monotone);
  results.push_back(convex_second);

  // Midpoint convexity on random pairs from the grid range.
  {
    auto midpoint = make_result("convexity-midpoint", lo, hi, 10000, 1e-12);
    Rng rng = Rng(0x5eedc0de).derive("convexity-midpoint");
    for (int i = 0; i < 10000; ++i) {
      const double y1 = rng.uniform(lo, hi);
      const double y2 = rng.uniform(lo, hi);
      const double mid = 0.5 * (y1 + y2);
      const double vm = loss.value(mid);
      const double avg = 0.5 * (loss.value(y1) + loss.value(y2));
      midpoint.record(mid, (vm - avg) / std::max(1.0, vm));
    }
    results.push_back(midpoint);
  }

  // Lipschitz / smoothness caps where the constants are finite.
  if (std::isfinite(k.lipschitz)) {
    auto lipschitz = make_result("lipschitz", lo, hi, points, kClosedFormTol);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      lipschitz.record(grid[i], std::abs(evals[i].first) - k.lipschitz);
    }
    results.push_back(lipschitz);
  }
  if (std::isfinite(k.smoothness)) {
    auto smooth = make_result("smoothness", lo, hi, points, kFiniteDiffTol);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      smooth.record(grid[i], std::abs(evals[i].second) - k.smoothness);
    }
    results.push_back(smooth);
  }

  // Self-boundedness |l'| <= c l^{1-delta}, relative margin. The probit
  // certificate on |y| <= 1 is numeric, so that family also gets a dense
  // 1e-4-spaced grid there with the looser 1e-6 margin.
  {
    const bool probit = loss.family() == LossFamily::Probit;
    const double tol = probit ? 1e-6 : kClosedFormTol;
    auto self_bound = make_result("self-boundedness", lo, hi, points, tol);
    auto check_at = [&](double y, const LossEval& e) {
      const double allowed = k.self_bound_c * std::pow(e.value, 1.0 - k.self_bound_delta);
      self_bound.record(y, std::abs(e.first) / allowed - 1.0);
    };
    for (std::size_t i = 0; i < grid.size(); ++i) check_at(grid[i], evals[i]);
    if (probit) {
      for (int i = -10000; i <= 10000; ++i) {
        const double y = static_cast<double>(i) * 1e-4;
        check_at(y, loss.evaluate(y));
      }
      self_bound.grid_points += 20001;
    }
    results.push_back(self_bound);
  }

  // Smooth self-bound l'^2 <= 2 L l.
  if (std::isfinite(k.smoothness)) {
    auto two_lf = make_result("gradient-squared-2Lf", lo, hi, points, kClosedFormTol);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double allowed = 2.0 * k.smoothness * evals[i].value;
      two_lf.record(grid[i], evals[i].first * evals[i].first / allowed - 1.0);
    }
    results.push_back(two_lf);
  }

  // Gradient-power equivalence: delta = 0 ~ log l is c-Lipschitz;
  // delta > 0 ~ l^delta is (c delta)-Lipschitz. Finite-difference slopes.
  {
    const double h = kFiniteDiffStep;
    const bool power = k.self_bound_delta > 0.0;
    auto equiv = make_result(power ? "power-lipschitz-equivalence" : "log-lipschitz-equivalence",
                             lo, hi, points, kFiniteDiffTol);
    const double cap = power ? k.self_bound_c * k.self_bound_delta : k.self_bound_c;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double y = grid[i];
      if (y - h < lo || y + h > hi) continue;
      const double vp = loss.value(y + h);
      const double vm = loss.value(y - h);
      const double slope = power ? (std::pow(vp, k.self_bound_delta) -
                                    std::pow(vm, k.self_bound_delta)) /
                                       (2.0 * h)
                                 : (std::log(vp) - std::log(vm)) / (2.0 * h);
      equiv.record(y, std::abs(slope) / cap - 1.0);
    }
    results.push_back(equiv);
  }

  // Analytic derivatives vs central finite differences. The second
  // derivative of a completed family jumps at the splice, which bends the
  // central differences of both l and l' there, so a small band around the
  // splice is excluded for those families.
  {
    const double h = kFiniteDiffStep;
    const double fd_lo = -5.0;
    const double fd_hi = std::min(10.0, hi - 1.0);
    auto fd_first = make_result("finite-difference-first", fd_lo, fd_hi, 0, kFiniteDiffTol);
    auto fd_second = make_result("finite-difference-second", fd_lo, fd_hi, 0, kFiniteDiffTol);
    const bool kinked = loss.has_completion();
    long used = 0;
    for (int i = 0; i <= 3000; ++i) {
      const double y = fd_lo + (fd_hi - fd_lo) * static_cast<double>(i) / 3000.0;
      if (kinked && std::abs(y) < 1e-3) continue;
      const LossEval e = loss.evaluate(y);
      const double fd1 = (loss.value(y + h) - loss.value(y - h)) / (2.0 * h);
      fd_first.record(
          y, std::abs(e.first - fd1) / std::max({std::abs(e.first), std::abs(fd1), 1e-12}));
      const double fd2 = (loss.evaluate(y + h).first - loss.evaluate(y - h).first) / (2.0 * h);
      fd_second.record(
          y, std::abs(e.second - fd2) / std::max({std::abs(e.second), std::abs(fd2), 1e-9}));
      ++used;
    }
    fd_first.grid_points = used;
    fd_second.grid_points = used;
    results.push_back(fd_first);
    results.push_back(fd_second);
  }

  // Completion splice continuity (value and first derivative).
  if (loss.has_completion()) {
    auto splice = make_result("completion-splice-continuity", -1e-9, 1e-9, 2, 1e-10);
    const TailCompletion completion = loss.completion();
    const LossEval below = loss.evaluate(completion.splice_point - 1e-12);
    const LossEval above = loss.evaluate(completion.splice_point + 1e-12);
    splice.record(completion.splice_point, std::abs(below.value - above.value));
    splice.record(completion.splice_point, std::abs(below.first - above.first));
    // The linear branch must match the declared splice data.
    splice.record(completion.splice_point,
                  std::abs(below.value - completion.value(completion.splice_point - 1e-12)));
    results.push_back(splice);
  }

  // Realizability of rho: the loss at margin gamma * rho(eps, gamma) drops
  // to eps (within 1e-12 absolute) for a spread of eps and gamma.
  {
    auto realizable = make_result("realizability", 1e-9, 0.5, 0, 1e-12);
    long used = 0;
    for (double gamma : {1.0, 0.5, 0.25}) {
      for (int i = 0; i < 12; ++i) {
        const double eps = std::pow(10.0, -9.0 + 9.0 * static_cast<double>(i) / 11.0) * 0.5;
        const double radius = loss.rho(eps, gamma);
        realizable.record(eps, loss.value(gamma * radius) - eps);
        ++used;
      }
    }
    realizable.grid_points = used;
    results.push_back(realizable);
  }

  for (auto& r : results) r.finalize();
  return results;
}

std::vector<PropertyCheckResult> check_erf_sandwich() {
  std::vector<PropertyCheckResult> results;
  const int points = 3000;
  // erfc itself leaves the normal double range near y = 26.5; the audited
  // range stops where the compared quantities are still representable.
  const double hi = 26.0;

  {
    auto upper_tail = make_result("erf-sandwich-positive", 0.8, hi, points, 1e-12);
    for (int i = 0; i <= points; ++i) {
      const double y = 0.8 + (hi - 0.8) * static_cast<double>(i) / points;
      const double e = std::erfc(y);
      const double lower = erfc_tail_lower(y);
      const double upper = erfc_tail_upper(y);
      upper_tail.record(y, std::max(lower - e, e - upper) / upper);
    }
    upper_tail.finalize();
    results.push_back(upper_tail);
  }
  {
    auto mirrored = make_result("erf-sandwich-mirrored", -hi, -0.8, points, 1e-12);
    for (int i = 0; i <= points; ++i) {
      const double y = -hi + (hi - 0.8) * static_cast<double>(i) / points;
      const double e = std::erfc(y);  // = 1 - erf(y), near 2
      const double lower = erfc_tail_lower(y);
      const double upper = erfc_tail_upper(y);
      mirrored.record(y, std::max(lower - e, e - upper));
    }
    mirrored.finalize();
    results.push_back(mirrored);
  }
  {
    // Below 1/sqrt(2) the stated lower bound is <= 0 and the inequality is
    // trivially true; recorded as its own regime rather than skipped.
    auto vacuous = make_result("erf-sandwich-vacuous-regime", 1e-3, 0.7071, 500, 1e-12);
    for (int i = 0; i <= 500; ++i) {
      const double y = 1e-3 + (0.7071 - 1e-3) * static_cast<double>(i) / 500;
      const double e = std::erfc(y);
      const double upper = erfc_tail_upper(y);
      vacuous.record(y, std::max(erfc_tail_lower(y) - e, e - upper) / upper);
    }
    vacuous.finalize();
    results.push_back(vacuous);
  }
  return results;
}

std::vector<PropertyCheckResult> check_second_self_bound(std::uint64_t seed) {
  const LossModel loss = LossModel::exponential();
  const double c = loss.constants().self_bound_c;
  std::vector<PropertyCheckResult> results;

  {
    auto scalar = make_result("second-self-bound-margins", -10.0, 50.0, 2001, 1e-12);
    for (int i = 0; i <= 2000; ++i) {
      const double y = -10.0 + 60.0 * static_cast<double>(i) / 2000.0;
      const LossEval e = loss.evaluate(y);
      scalar.record(y, std::abs(e.second) / (c * std::abs(e.first)) - 1.0);
      scalar.record(y, std::abs(e.first) / (c * e.value) - 1.0);
    }
    scalar.finalize();
    results.push_back(scalar);
  }
  {
    // Lifted statement on random (w, z): the Hessian of e^{-w.z} is the
    // rank-one matrix z z^T e^{-w.z}; its top eigenvalue must not exceed
    // c times the gradient norm ||z|| e^{-w.z}.
    auto lifted = make_result("second-self-bound-lifted", 0, 0, 200, 1e-9);
    Rng rng = Rng(seed).derive("second-self-bound");
    const int dim = 20;
    for (int trial = 0; trial < 200; ++trial) {
      Eigen::VectorXd z(dim), w(dim);
      for (int i = 0; i < dim; ++i) z(i) = rng.normal();
      z *= rng.uniform() / z.norm();  // ||z|| in (0, 1)
      for (int i = 0; i < dim; ++i) w(i) = 5.0 * rng.normal();
      const double f = std::exp(-w.dot(z));
      const Eigen::MatrixXd hessian = f * (z * z.transpose());
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hessian);
      const double op_norm = eig.eigenvalues().cwiseAbs().maxCoeff();
      const double grad_norm = z.norm() * f;
      lifted.record(static_cast<double>(trial), op_norm / (c * grad_norm) - 1.0);
      lifted.record(static_cast<double>(trial), grad_norm / (c * f) - 1.0);
    }
    lifted.finalize();
    results.push_back(lifted);
  }
  return results;
}

bool all_passed(const std::vector<PropertyCheckResult>& results) {
  for (const auto& r : results) {
    if (!r.passed) return false;
  }
  return true;
}

nlohmann::json results_to_json(const std::vector<PropertyCheckResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) arr.push_back(r.to_json());
  return arr;
}

}  // namespace selfbound
