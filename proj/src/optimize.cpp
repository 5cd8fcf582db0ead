#include "selfbound/optimize.hpp"

#include <cmath>
#include <fstream>

#include "selfbound/io.hpp"

namespace selfbound {

namespace {

constexpr double kDivergenceFactor = 1e6;

Eigen::VectorXd initial_point(const OptimizerConfig& config, Eigen::Index dim) {
  if (config.initial_point.size() == 0) return Eigen::VectorXd::Zero(dim);
  if (config.initial_point.size() != dim) {
    throw std::invalid_argument("optimizer: initial point dimension mismatch");
  }
  return config.initial_point;
}

void check_steps(const OptimizerConfig& config) {
  if (config.steps < 1) throw std::invalid_argument("optimizer: steps >= 1 required");
}

bool should_record(const OptimizerConfig& config, long t, long total) {
  if (t == total) return true;
  return config.record_cadence > 0 && (t - 1) % config.record_cadence == 0;
}

struct Recorder {
  explicit Recorder(const OptimizerConfig& config, long total) : config(config), total(total) {}

  void step(long t, const Eigen::VectorXd& w, double risk, double grad_norm, Trajectory& out) {
    out.emp_risks.push_back(risk);
    out.grad_norms.push_back(grad_norm);
    out.iterate_norms.push_back(w.norm());
    if (should_record(config, t, total)) {
      out.recorded_steps.push_back(t);
      out.recorded_iterates.push_back(w);
    }
  }

  const OptimizerConfig& config;
  long total;
};

}  // namespace

double Trajectory::risk_sum() const {
  double s = 0.0;
  for (double r : emp_risks) s += r;
  return s;
}

double resolve_step_size(const LossModel& loss, const OptimizerConfig& config,
                         double risk_at_init) {
  if (config.step_size) {
    if (!(*config.step_size >= 0.0)) throw std::invalid_argument("step size must be >= 0");
    return *config.step_size;
  }
  if (config.method == StepMethod::AdaptiveExponential) {
    const double c = loss.constants().self_bound_c;
    if (risk_at_init <= 0.0) return 1.0;
    return 1.0 / (c * c * risk_at_init);
  }
  const double smoothness = loss.constants().smoothness;
  if (!std::isfinite(smoothness)) {
    throw std::invalid_argument(
        "auto step size needs a finite smoothness constant; pass one explicitly");
  }
  return 1.0 / (2.0 * smoothness);
}

namespace {

void guard_smooth_step(const LossModel& loss, const OptimizerConfig& config, double eta) {
  if (config.allow_unchecked_step) return;
  const double smoothness = loss.constants().smoothness;
  if (std::isfinite(smoothness) && eta > 1.0 / (2.0 * smoothness) + 1e-15) {
    throw std::invalid_argument("step size exceeds 1/(2L); set allow_unchecked_step to override");
  }
}

void guard_divergence(double risk, double initial_risk) {
  if (risk > kDivergenceFactor * initial_risk) {
    throw DivergenceError("optimizer diverged: risk exceeded 1e6 x initial risk");
  }
}

}  // namespace

Trajectory run_gd(const LossModel& loss, const LinearDataset& data, const OptimizerConfig& config,
                  int excluded) {
  check_steps(config);
  Eigen::VectorXd w = initial_point(config, data.dim());
  const long total = config.steps;

  Trajectory out;
  out.emp_risks.reserve(total);
  out.grad_norms.reserve(total);
  out.iterate_norms.reserve(total);
  Recorder recorder(config, total);

  RiskAndGradient state = empirical_risk_and_gradient(loss, data, w, excluded);
  const double eta = resolve_step_size(loss, config, state.risk);
  guard_smooth_step(loss, config, eta);
  out.step_size = eta;
  const double initial_risk = state.risk;

  Eigen::VectorXd average = Eigen::VectorXd::Zero(w.size());
  for (long t = 1; t <= total; ++t) {
    guard_divergence(state.risk, initial_risk);
    recorder.step(t, w, state.risk, state.gradient.norm(), out);
    average += w;
    if (t == total) break;
    w -= eta * state.gradient;
    state = empirical_risk_and_gradient(loss, data, w, excluded);
  }
  out.final_iterate = w;
  out.averaged_iterate = average / static_cast<double>(total);
  return out;
}

Trajectory run_sgd(const LossModel& loss, const LinearDataset& data, const OptimizerConfig& config,
                   int excluded, const std::vector<int>* shared_index_stream) {
  check_steps(config);
  const long total = config.steps;
  const Eigen::Index n = data.count();
  if (shared_index_stream &&
      static_cast<long>(shared_index_stream->size()) < total) {
    throw std::invalid_argument("shared index stream shorter than the step count");
  }

  Eigen::VectorXd w = initial_point(config, data.dim());
  Trajectory out;
  out.emp_risks.reserve(total);
  out.grad_norms.reserve(total);
  out.iterate_norms.reserve(total);
  out.index_sequence.reserve(total);
  Recorder recorder(config, total);

  RiskAndGradient state = empirical_risk_and_gradient(loss, data, w, excluded);
  const double eta = resolve_step_size(loss, config, state.risk);
  guard_smooth_step(loss, config, eta);
  out.step_size = eta;
  const double initial_risk = state.risk;

  Rng index_rng = Rng(config.rng_seed).derive("sgd-index-stream");
  Eigen::VectorXd average = Eigen::VectorXd::Zero(w.size());
  for (long t = 1; t <= total; ++t) {
    guard_divergence(state.risk, initial_risk);
    recorder.step(t, w, state.risk, state.gradient.norm(), out);
    average += w;
    if (t == total) break;
    const int index = shared_index_stream
                          ? (*shared_index_stream)[static_cast<std::size_t>(t - 1)]
                          : static_cast<int>(index_rng.below(static_cast<std::uint64_t>(n)));
    out.index_sequence.push_back(index);
    if (index != excluded) {  // sentinel no-op when the excluded index is drawn
      w -= eta * example_gradient(loss, data, w, index);
    }
    state = empirical_risk_and_gradient(loss, data, w, excluded);
  }
  out.final_iterate = w;
  out.averaged_iterate = average / static_cast<double>(total);
  return out;
}

Trajectory run_gd_adaptive_exp(const LinearDataset& data, const OptimizerConfig& config,
                               int excluded) {
  check_steps(config);
  const LossModel loss = LossModel::exponential();
  Eigen::VectorXd w = initial_point(config, data.dim());
  const long total = config.steps;

  Trajectory out;
  Recorder recorder(config, total);

  RiskAndGradient state = empirical_risk_and_gradient(loss, data, w, excluded);
  const double c = loss.constants().self_bound_c;
  double eta;
  if (config.step_size) {
    eta = *config.step_size;
    if (!config.allow_unchecked_step && eta > 1.0 / (c * c * state.risk) + 1e-12) {
      throw std::invalid_argument("adaptive rule violated: eta > 1/(c^2 F(w_1))");
    }
  } else {
    eta = 1.0 / (c * c * state.risk);
  }
  out.step_size = eta;
  const double initial_risk = state.risk;

  Eigen::VectorXd average = Eigen::VectorXd::Zero(w.size());
  for (long t = 1; t <= total; ++t) {
    guard_divergence(state.risk, initial_risk);
    recorder.step(t, w, state.risk, state.gradient.norm(), out);
    average += w;
    if (t == total) break;
    w -= eta * state.gradient;
    state = empirical_risk_and_gradient(loss, data, w, excluded);
  }
  out.final_iterate = w;
  out.averaged_iterate = average / static_cast<double>(total);
  return out;
}

double lower_bound_floor_constant(double alpha) {
  return std::pow(alpha * (alpha + 1.0), -(alpha + 1.0) * alpha / (alpha + 2.0)) *
         std::pow(2.0 * (alpha + 2.0) / (alpha + 1.0), -alpha);
}

LowerBoundTrace lower_bound_run(double alpha, long steps) {
  if (!(alpha >= 1.0)) throw std::out_of_range("lower bound run requires alpha >= 1");
  if (steps < 1) throw std::invalid_argument("lower bound run requires steps >= 1");
  const LossModel loss = LossModel::polynomial_tail(alpha);
  const double eta = 1.0 / (alpha * (alpha + 1.0));
  const double exponent = alpha / (alpha + 2.0);

  LowerBoundTrace trace;
  trace.floor_constant = lower_bound_floor_constant(alpha);
  trace.risks.reserve(steps);
  trace.floors.reserve(steps);
  trace.upper_envelopes.reserve(steps);

  double w = 0.0;
  for (long t = 1; t <= steps; ++t) {
    const LossEval e = loss.evaluate(w);
    trace.risks.push_back(e.value);
    trace.floors.push_back(trace.floor_constant * std::pow(static_cast<double>(t), -exponent));
    trace.upper_envelopes.push_back(
        std::pow(alpha * (alpha + 1.0) / static_cast<double>(t), exponent));
    w -= eta * e.first;
  }
  return trace;
}

void write_trajectory_csv(const Trajectory& trajectory, const std::filesystem::path& path,
                          const IterateEvaluator* evaluator) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trajectory CSV for writing: " + path.string());
  CsvWriter csv(out);
  std::vector<std::string> names = {"t", "emp_risk", "grad_norm", "w_norm"};
  if (evaluator) {
    names.push_back("test_loss");
    names.push_back("zero_one_error");
  }
  csv.header(names);

  std::size_t next_recorded = 0;
  for (long t = 1; t <= trajectory.steps(); ++t) {
    const std::size_t i = static_cast<std::size_t>(t - 1);
    csv.field(t).field(trajectory.emp_risks[i]).field(trajectory.grad_norms[i]).field(
        trajectory.iterate_norms[i]);
    if (evaluator) {
      if (next_recorded < trajectory.recorded_steps.size() &&
          trajectory.recorded_steps[next_recorded] == t) {
        double test_loss = 0.0, zero_one = 0.0;
        (*evaluator)(t, trajectory.recorded_iterates[next_recorded], test_loss, zero_one);
        csv.field(test_loss).field(zero_one);
        ++next_recorded;
      } else {
        csv.empty_field().empty_field();
      }
    }
    csv.end_row();
  }
}

}  // namespace selfbound
