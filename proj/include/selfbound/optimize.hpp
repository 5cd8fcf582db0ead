#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "selfbound/data.hpp"
#include "selfbound/loss.hpp"

namespace selfbound {

enum class StepMethod { GradientDescent, StochasticGradientDescent, AdaptiveExponential };

struct OptimizerConfig {
  StepMethod method = StepMethod::GradientDescent;
  /// Fixed step size; empty means "auto": 1/(2L) for GD/SGD on smooth
  /// losses, 1/(c^2 F(w_1)) for the adaptive exponential rule.
  std::optional<double> step_size;
  long steps = 1;  // T: the run produces iterates w_1 .. w_T (T-1 updates)
  Eigen::VectorXd initial_point;  // empty => origin
  std::uint64_t rng_seed = 0;     // SGD index stream
  long record_cadence = 0;        // store full iterates every k steps (0 = endpoints only)
  bool allow_unchecked_step = false;  // lift the eta <= 1/(2L) guard
};

/// Iterates and per-step risk summaries of one GD/SGD run. Scalar summaries
/// are kept for every t; full iterates only at the record cadence (plus w_T
/// and the streaming average), so long runs stay small in memory.
struct Trajectory {
  std::vector<double> emp_risks;      // F_hat(w_t), t = 1..T
  std::vector<double> grad_norms;     // ||grad F_hat(w_t)||
  std::vector<double> iterate_norms;  // ||w_t||
  std::vector<long> recorded_steps;
  std::vector<Eigen::VectorXd> recorded_iterates;
  Eigen::VectorXd final_iterate;     // w_T
  Eigen::VectorXd averaged_iterate;  // (1/T) sum_t w_t
  std::vector<int> index_sequence;   // SGD sample draws (0-based)
  double step_size = 0;

  long steps() const { return static_cast<long>(emp_risks.size()); }
  double risk_sum() const;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Resolves the "auto" step rule for a config against a family's constants.
double resolve_step_size(const LossModel& loss, const OptimizerConfig& config,
                         double risk_at_init);

/// Full-batch gradient descent w_{t+1} = w_t - eta * grad F_hat(w_t) on the
/// sample (or on leave-one-out member `excluded`). Guards: eta <= 1/(2L) on
/// smooth families unless overridden; aborts with DivergenceError if the
/// risk exceeds 1e6 times its initial value.
Trajectory run_gd(const LossModel& loss, const LinearDataset& data, const OptimizerConfig& config,
                  int excluded = kNoExclusion);

/// SGD with uniform index sampling (with replacement). When a shared index
/// stream is given it drives the run; on a leave-one-out member, steps that
/// draw the excluded index apply the zero sentinel gradient (a no-op), so
/// runs on S and S_i driven by one stream stay coupled.
Trajectory run_sgd(const LossModel& loss, const LinearDataset& data, const OptimizerConfig& config,
                   int excluded = kNoExclusion,
                   const std::vector<int>* shared_index_stream = nullptr);

/// Gradient descent under the adaptive exponential-loss step rule
/// eta <= 1/(c^2 F_hat(w_1)); descent is monotone and the squared gradient
/// norms obey the running budget sum_t ||grad||^2 <= 2 F_hat(w_1) / eta.
Trajectory run_gd_adaptive_exp(const LinearDataset& data, const OptimizerConfig& config,
                               int excluded = kNoExclusion);

/// One-dimensional GD trace on the completed polynomial tail with
/// eta = 1/(alpha(alpha+1)) and w_1 = 0, together with the risk floor
/// a * t^{-alpha/(alpha+2)} and the matching upper envelope
/// (alpha(alpha+1)/t)^{alpha/(alpha+2)}. Requires alpha >= 1.
struct LowerBoundTrace {
  double floor_constant = 0;  // a
  std::vector<double> risks;
  std::vector<double> floors;
  std::vector<double> upper_envelopes;
};
LowerBoundTrace lower_bound_run(double alpha, long steps);
double lower_bound_floor_constant(double alpha);

/// Optional per-iterate test metrics for trajectory CSV export; called only
/// at recorded iterates.
using IterateEvaluator = std::function<void(long step, const Eigen::VectorXd& w,
                                            double& test_loss, double& zero_one)>;

/// Columns: t, emp_risk, grad_norm, w_norm[, test_loss, zero_one_error].
/// The optional columns are filled at recorded iterates and left empty
/// elsewhere.
void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path,
                          const IterateEvaluator* evaluator = nullptr);

}  // namespace selfbound
