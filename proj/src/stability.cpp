#include "selfbound/stability.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

namespace selfbound {

namespace {

nlohmann::json json_number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
  if (workers <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  auto drain = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= count) return;
      body(i);
    }
  };
  std::vector<std::thread> pool;
  const int spawned = std::min(workers, count);
  pool.reserve(spawned);
  for (int t = 0; t < spawned; ++t) pool.emplace_back(drain);
  for (auto& th : pool) th.join();
}

struct LooDistances {
  double l1 = 0;
  double l2 = 0;
};

}  // namespace

nlohmann::json StabilityReport::to_json() const {
  nlohmann::json j;
  j["empirical_l1"] = empirical_l1;
  j["empirical_l2"] = empirical_l2;
  j["bound_l1"] = json_number(bound_l1);
  j["bound_l2"] = json_number(bound_l2);
  j["ratio_l1"] = json_number(ratio_l1);
  j["ratio_l2"] = json_number(ratio_l2);
  j["risk_sum"] = risk_sum;
  j["replicates"] = replicates;
  j["stderr_l1"] = json_number(stderr_l1);
  return j;
}

double stability_bound_l1(double c, double delta, double eta, long steps, long count,
                          double risk_sum) {
  return c * eta * std::pow(static_cast<double>(steps), delta) / static_cast<double>(count) *
         std::pow(risk_sum, 1.0 - delta);
}

double stability_bound_l2(double c, double delta, double eta, long steps, long count,
                          double risk_sum) {
  return c * c * eta * eta * std::pow(static_cast<double>(steps), 2.0 * delta) /
         std::pow(static_cast<double>(count), 1.0 + 2.0 * delta) *
         std::pow(risk_sum, 2.0 * (1.0 - delta));
}

StabilityReport empirical_stability_gd(const LossModel& loss, const LinearDataset& data,
                                       const OptimizerConfig& config, int workers) {
  const int n = static_cast<int>(data.count());
  LooFamily loo(data);  // validates n >= 2

  const Trajectory full = run_gd(loss, data, config);
  std::vector<double> distances(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const Trajectory member = run_gd(loss, data, config, i);
    distances[static_cast<std::size_t>(i)] = (full.final_iterate - member.final_iterate).norm();
  });

  LooDistances acc;
  for (double d : distances) {
    acc.l1 += d;
    acc.l2 += d * d;
  }

  const double delta = loss.constants().self_bound_delta;
  const double c = loss.constants().self_bound_c;
  const double eta = full.step_size;
  const long big_t = full.steps();
  const double risk_sum = full.risk_sum();

  StabilityReport report;
  report.empirical_l1 = acc.l1 / n;
  report.empirical_l2 = acc.l2 / n;
  report.risk_sum = risk_sum;
  report.bound_l1 = stability_bound_l1(c, delta, eta, big_t, n, risk_sum);
  report.bound_l2 = stability_bound_l2(c, delta, eta, big_t, n, risk_sum);
  report.ratio_l1 = report.empirical_l1 / report.bound_l1;
  report.ratio_l2 = report.empirical_l2 / report.bound_l2;
  return report;
}

StabilityReport empirical_stability_sgd(const LossModel& loss, const LinearDataset& data,
                                        const OptimizerConfig& config, int replicates,
                                        int workers) {
  if (replicates < 1) throw std::invalid_argument("sgd stability requires >= 1 replicate");
  const int n = static_cast<int>(data.count());
  LooFamily loo(data);

  const Rng master(config.rng_seed);
  std::vector<double> rep_l1(static_cast<std::size_t>(replicates));
  std::vector<double> rep_l2(static_cast<std::size_t>(replicates));
  std::vector<double> rep_risk_sum(static_cast<std::size_t>(replicates));
  double step_size = 0.0;

  for (int r = 0; r < replicates; ++r) {
    // One shared stream per replicate, derived up front so worker order
    // cannot change the draw.
    Rng stream_rng = master.derive("sgd-shared-stream", static_cast<std::uint64_t>(r));
    std::vector<int> stream(static_cast<std::size_t>(config.steps));
    for (auto& v : stream) v = static_cast<int>(stream_rng.below(static_cast<std::uint64_t>(n)));

    const Trajectory full = run_sgd(loss, data, config, kNoExclusion, &stream);
    step_size = full.step_size;
    rep_risk_sum[static_cast<std::size_t>(r)] = full.risk_sum();

    std::vector<double> distances(static_cast<std::size_t>(n));
    parallel_for(n, workers, [&](int i) {
      const Trajectory member = run_sgd(loss, data, config, i, &stream);
      distances[static_cast<std::size_t>(i)] =
          (full.averaged_iterate - member.averaged_iterate).norm();
    });
    double l1 = 0, l2 = 0;
    for (double d : distances) {
      l1 += d;
      l2 += d * d;
    }
    rep_l1[static_cast<std::size_t>(r)] = l1 / n;
    rep_l2[static_cast<std::size_t>(r)] = l2 / n;
  }

  double mean_l1 = 0, mean_l2 = 0, mean_risk_sum = 0;
  for (int r = 0; r < replicates; ++r) {
    mean_l1 += rep_l1[static_cast<std::size_t>(r)];
    mean_l2 += rep_l2[static_cast<std::size_t>(r)];
    mean_risk_sum += rep_risk_sum[static_cast<std::size_t>(r)];
  }
  mean_l1 /= replicates;
  mean_l2 /= replicates;
  mean_risk_sum /= replicates;

  double stderr_l1 = std::numeric_limits<double>::quiet_NaN();
  if (replicates >= 2) {
    double ss = 0;
    for (int r = 0; r < replicates; ++r) {
      const double d = rep_l1[static_cast<std::size_t>(r)] - mean_l1;
      ss += d * d;
    }
    stderr_l1 = std::sqrt(ss / (replicates - 1.0) / replicates);
  }

  const double delta = loss.constants().self_bound_delta;
  const double c = loss.constants().self_bound_c;

  StabilityReport report;
  report.empirical_l1 = mean_l1;
  report.empirical_l2 = mean_l2;
  report.risk_sum = mean_risk_sum;
  report.replicates = replicates;
  report.stderr_l1 = stderr_l1;
  report.bound_l1 = stability_bound_l1(c, delta, step_size, config.steps, n, mean_risk_sum);
  report.ratio_l1 = report.empirical_l1 / report.bound_l1;
  return report;
}

StabilityReport empirical_stability_exp_adaptive(const LinearDataset& data,
                                                 const OptimizerConfig& config, int workers) {
  const int n = static_cast<int>(data.count());
  LooFamily loo(data);

  const Trajectory full = run_gd_adaptive_exp(data, config);
  // The full-sample step satisfies the adaptive rule for every member too,
  // since F_hat_i(w_1) <= F_hat(w_1); reuse it verbatim.
  OptimizerConfig member_config = config;
  member_config.step_size = full.step_size;

  std::vector<double> distances(static_cast<std::size_t>(n));
  parallel_for(n, workers, [&](int i) {
    const Trajectory member = run_gd_adaptive_exp(data, member_config, i);
    distances[static_cast<std::size_t>(i)] = (full.final_iterate - member.final_iterate).norm();
  });

  double l1 = 0, l2 = 0;
  for (double d : distances) {
    l1 += d;
    l2 += d * d;
  }

  const double c = LossModel::exponential().constants().self_bound_c;
  StabilityReport report;
  report.empirical_l1 = l1 / n;
  report.empirical_l2 = l2 / n;
  report.risk_sum = full.risk_sum();
  report.bound_l1 = full.step_size * c / n * report.risk_sum;
  report.ratio_l1 = report.empirical_l1 / report.bound_l1;
  return report;
}

GapBounds generalization_gap_bounds(const StabilityReport& report,
                                    const LossConstants& constants) {
  GapBounds out;
  if (constants.lipschitz_bounded()) {
    out.lipschitz_gap = 2.0 * constants.lipschitz * report.empirical_l1;
    if (!std::isnan(report.bound_l1)) {
      out.lipschitz_gap_theorem = 2.0 * constants.lipschitz * report.bound_l1;
    }
  }
  if (constants.smoothness_bounded()) {
    out.smooth_term = 3.0 * constants.smoothness * report.empirical_l2;
    if (!std::isnan(report.bound_l2)) {
      out.smooth_term_theorem = 3.0 * constants.smoothness * report.bound_l2;
    }
  }
  return out;
}

}  // namespace selfbound
