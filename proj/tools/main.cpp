// Command-line harness: configure experiments, run bound checks, emit
// machine-readable reports and plot-ready CSV data.
//
// Exit codes: 0 = all asserted inequalities hold; 1 = usage/config error;
// 2 = a theorem-backed inequality was violated (the most important signal
// this harness can emit).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selfbound/bounds.hpp"
#include "selfbound/data.hpp"
#include "selfbound/experiment.hpp"
#include "selfbound/io.hpp"
#include "selfbound/loss.hpp"
#include "selfbound/optimize.hpp"
#include "selfbound/stability.hpp"
#include "selfbound/verify.hpp"

namespace fs = std::filesystem;
using namespace selfbound;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;

struct CliOptions {
  std::string config_path;
  std::string loss_name;
  double alpha = 0;
  int classes = 0;
  double delta = 0;
  double gamma = 0;
  int dim = 0;
  long count = 0;
  long steps = 0;
  std::string eta;
  std::string epsilon_mode;
  int replicates = 0;
  int test_size = 0;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 0;
  std::string method;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file; flags override its fields");
  cmd->add_option("--loss", opt.loss_name,
                  "loss family: logistic|polynomial|subexp|superexp|probit|exponential|multiclass");
  cmd->add_option("--alpha", opt.alpha, "tail exponent (polynomial/subexp/superexp)");
  cmd->add_option("--classes", opt.classes, "number of classes K (multiclass)");
  cmd->add_option("--delta", opt.delta, "self-bound delta in (0, 1/2] (superexp/probit)");
  cmd->add_option("--gamma", opt.gamma, "separation margin");
  cmd->add_option("--dim", opt.dim, "instance dimension");
  cmd->add_option("--n", opt.count, "training sample size");
  cmd->add_option("--T", opt.steps, "number of iterates");
  cmd->add_option("--eta", opt.eta, "step size (number or \"auto\")");
  cmd->add_option("--epsilon-mode", opt.epsilon_mode, "corollary|grid")
      ->check(CLI::IsMember({"corollary", "grid"}));
  cmd->add_option("--replicates", opt.replicates, "SGD stability replicates");
  cmd->add_option("--test-size", opt.test_size, "Monte-Carlo test draws");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--workers", opt.workers, "worker threads for independent runs");
}

ExperimentConfig resolve_config(const CLI::App* cmd, const CliOptions& opt) {
  ExperimentConfig config;
  if (cmd->count("--config") > 0) {
    config = ExperimentConfig::from_json(read_json_file(opt.config_path));
  }
  if (cmd->count("--loss") > 0) {
    config.loss_spec = nlohmann::json{{"family", to_string(loss_family_from_string(opt.loss_name))}};
  }
  if (cmd->count("--alpha") > 0) config.loss_spec["alpha"] = opt.alpha;
  if (cmd->count("--classes") > 0) config.loss_spec["K"] = opt.classes;
  if (cmd->count("--delta") > 0) config.loss_spec["delta"] = opt.delta;
  if (cmd->count("--gamma") > 0) config.gamma = opt.gamma;
  if (cmd->count("--dim") > 0) config.dim = opt.dim;
  if (cmd->count("--n") > 0) config.count = static_cast<int>(opt.count);
  if (cmd->count("--T") > 0) config.steps = opt.steps;
  if (cmd->count("--eta") > 0) {
    if (opt.eta == "auto") {
      config.step_size.reset();
    } else {
      std::size_t used = 0;
      const double value = std::stod(opt.eta, &used);
      if (used != opt.eta.size()) throw std::invalid_argument("--eta must be a number or auto");
      config.step_size = value;
    }
  }
  if (cmd->count("--epsilon-mode") > 0) {
    config.epsilon_mode =
        opt.epsilon_mode == "grid" ? EpsilonMode::GridMin : EpsilonMode::Corollary;
  }
  if (cmd->count("--replicates") > 0) config.replicates = opt.replicates;
  if (cmd->count("--test-size") > 0) config.test_draws = opt.test_size;
  if (cmd->count("--seed") > 0) config.seed = opt.seed;
  if (cmd->count("--out") > 0) config.out_dir = opt.out;
  if (cmd->count("--workers") > 0) config.workers = opt.workers;
  return config;
}

fs::path prepare_out_dir(ExperimentConfig& config, const std::string& command) {
  if (config.out_dir.empty()) config.out_dir = "runs/" + command;
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  nlohmann::json echo;
  echo["command"] = command;
  echo["config"] = config.to_json();
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(content_hash(echo["config"].dump())));
  echo["config_hash"] = hash;
  write_json_file(dir / "config.json", echo);
  return dir;
}

// -- verify-loss -------------------------------------------------------------

int run_verify_loss(const CLI::App* cmd, const CliOptions& opt) {
  ExperimentConfig config = resolve_config(cmd, opt);
  const LossModel model = config.make_loss();
  auto results = check_assumption_suite(model);
  if (model.family() == LossFamily::Probit || model.family() == LossFamily::Exponential) {
    for (auto& extra : check_erf_sandwich()) results.push_back(extra);
  }
  if (model.family() == LossFamily::Exponential) {
    for (auto& extra : check_second_self_bound()) results.push_back(extra);
  }
  const fs::path dir = prepare_out_dir(config, "verify-loss");
  write_json_file(dir / "audit.json", results_to_json(results));
  int failures = 0;
  for (const auto& r : results) {
    if (!r.passed) {
      ++failures;
      std::printf("FAIL %-32s worst %.6g at %.6g (tol %.3g)\n", r.property.c_str(),
                  r.worst_violation, r.worst_location, r.tolerance);
    }
  }
  std::printf("verify-loss %s: %zu checks, %d failures -> %s\n",
              to_string(model.family()).c_str(), results.size(), failures,
              (dir / "audit.json").c_str());
  return failures == 0 ? kExitOk : kExitViolation;
}

// -- run-gd / run-sgd ---------------------------------------------------------

int run_training(const CLI::App* cmd, const CliOptions& opt, StepMethod method) {
  ExperimentConfig config = resolve_config(cmd, opt);
  config.method = method;
  if (config.record_cadence == 0) config.record_cadence = std::max(1L, config.steps / 50);
  const fs::path dir =
      prepare_out_dir(config, method == StepMethod::GradientDescent ? "run-gd" : "run-sgd");

  TrainingArtifacts art = run_training_experiment(config);

  // Per-iterate test metrics at the record cadence (capped draw count).
  const MarginDistribution dist = distribution_of(art.data);
  const LossModel base = config.make_loss();
  const int column_draws = std::min(config.test_draws, 20000);
  const std::uint64_t column_seed = Rng(config.seed).derive("csv-test").seed();
  const IterateEvaluator evaluator = [&](long, const Eigen::VectorXd& w, double& test_loss,
                                         double& zero_one) {
    test_loss = population_loss(base, dist, w, column_draws, column_seed).mean;
    zero_one = population_zero_one(dist, w, column_draws, column_seed).mean;
  };
  write_trajectory_csv(art.trajectory, dir / "trajectory.csv", &evaluator);
  write_json_file(dir / "bound_evaluation.json", art.bounds.to_json());

  int exit_code = kExitOk;
  // Descent is guaranteed for GD at eta <= 1/L on smooth families.
  if (method == StepMethod::GradientDescent && art.model.constants().smoothness_bounded() &&
      art.trajectory.step_size <= 1.0 / art.model.constants().smoothness) {
    for (std::size_t i = 1; i < art.trajectory.emp_risks.size(); ++i) {
      if (art.trajectory.emp_risks[i] > art.trajectory.emp_risks[i - 1] + 1e-12) {
        std::printf("VIOLATION: empirical risk rose at step %zu\n", i + 1);
        exit_code = kExitViolation;
        break;
      }
    }
  }
  // The training-error bound holds for every epsilon (GD form; halved for SGD).
  const double mean_risk =
      art.trajectory.risk_sum() / static_cast<double>(art.trajectory.steps());
  const double excess =
      worst_opt_bound_excess(art.model, config.gamma, art.trajectory.step_size, config.steps,
                             mean_risk, 50, method == StepMethod::StochasticGradientDescent);
  if (excess > 0.0) {
    std::printf("VIOLATION: mean risk exceeds the training-error bound by %.3g\n", excess);
    exit_code = kExitViolation;
  }

  std::printf("train %.6g | test %.6g (se %.2g) | zero-one %.4g | opt bound %.6g | eta %.6g\n",
              art.bounds.measured_train, art.test_loss.mean, art.test_loss.std_error,
              art.zero_one_error.mean, art.bounds.opt_bound, art.trajectory.step_size);
  std::printf("outputs in %s\n", dir.c_str());
  return exit_code;
}

// -- stability ----------------------------------------------------------------

int run_stability(const CLI::App* cmd, const CliOptions& opt) {
  ExperimentConfig config = resolve_config(cmd, opt);
  const std::string method = cmd->count("--method") > 0 ? opt.method : "gd";

  const LinearDataset data = sample_dataset(config.dim, config.count, config.gamma, config.seed);
  OptimizerConfig optimizer;
  optimizer.step_size = config.step_size;
  optimizer.steps = config.steps;
  optimizer.rng_seed = Rng(config.seed).derive("sgd-stability").seed();

  StabilityReport report;
  LossModel model = config.make_loss();
  if (method == "gd") {
    optimizer.method = StepMethod::GradientDescent;
    report = empirical_stability_gd(model, data, optimizer, config.workers);
  } else if (method == "sgd") {
    optimizer.method = StepMethod::StochasticGradientDescent;
    report = empirical_stability_sgd(model, data, optimizer, config.replicates, config.workers);
  } else if (method == "exp") {
    optimizer.method = StepMethod::AdaptiveExponential;
    model = LossModel::exponential();
    report = empirical_stability_exp_adaptive(data, optimizer, config.workers);
  } else {
    throw std::invalid_argument("--method must be gd|sgd|exp");
  }

  ExperimentConfig echo = config;
  const fs::path dir = prepare_out_dir(echo, "stability");
  write_json_file(dir / "stability_report.json", report.to_json());

  const GapBounds gaps = generalization_gap_bounds(report, model.constants());
  nlohmann::json gap_json;
  gap_json["lipschitz_gap"] =
      gaps.lipschitz_gap ? nlohmann::json(*gaps.lipschitz_gap) : nlohmann::json(nullptr);
  gap_json["lipschitz_gap_theorem"] = gaps.lipschitz_gap_theorem
                                          ? nlohmann::json(*gaps.lipschitz_gap_theorem)
                                          : nlohmann::json(nullptr);
  gap_json["smooth_term"] =
      gaps.smooth_term ? nlohmann::json(*gaps.smooth_term) : nlohmann::json(nullptr);
  gap_json["smooth_term_theorem"] = gaps.smooth_term_theorem
                                        ? nlohmann::json(*gaps.smooth_term_theorem)
                                        : nlohmann::json(nullptr);
  gap_json["train_risk_multiplier_four"] = gaps.train_risk_multiplier_four;
  write_json_file(dir / "gap_bounds.json", gap_json);

  const double slack = std::isnan(report.stderr_l1) ? 0.0 : 2.0 * report.stderr_l1;
  const bool ok = report.empirical_l1 <= report.bound_l1 + slack;
  std::printf("empirical l1 %.6g vs bound %.6g (ratio %.4g) -> %s\n", report.empirical_l1,
              report.bound_l1, report.ratio_l1, ok ? "ok" : "VIOLATION");
  std::printf("outputs in %s\n", dir.c_str());
  return ok ? kExitOk : kExitViolation;
}

// -- genbound -----------------------------------------------------------------

int run_genbound(const CLI::App* cmd, const CliOptions& opt) {
  ExperimentConfig config = resolve_config(cmd, opt);
  const std::string method = cmd->count("--method") > 0 ? opt.method : "gd";
  if (method == "sgd") {
    config.method = StepMethod::StochasticGradientDescent;
  } else if (method != "gd") {
    throw std::invalid_argument("--method must be gd|sgd");
  }
  TrainingArtifacts art = run_training_experiment(config);
  ExperimentConfig echo = config;
  const fs::path dir = prepare_out_dir(echo, "genbound");
  write_json_file(dir / "bound_evaluation.json", art.bounds.to_json());

  const double gen_bound = art.bounds.gen_bound_lipschitz ? *art.bounds.gen_bound_lipschitz
                                                          : art.bounds.gen_bound_smooth;
  const double mean_risk =
      art.trajectory.risk_sum() / static_cast<double>(art.trajectory.steps());
  const bool train_ok = mean_risk <= art.bounds.opt_bound + 1e-12;
  std::printf("epsilon %.3g rho %.6g | opt bound %.6g (mean risk %.6g) | gen bound %.6g | "
              "test %.6g (se %.2g)\n",
              art.bounds.epsilon, art.bounds.rho_eps, art.bounds.opt_bound, mean_risk, gen_bound,
              art.bounds.measured_test, art.bounds.measured_test_stderr);
  std::printf("outputs in %s\n", dir.c_str());
  return train_ok ? kExitOk : kExitViolation;
}

// -- lowerbound ----------------------------------------------------------------

int run_lowerbound(const CLI::App* cmd, const CliOptions& opt) {
  ExperimentConfig config = resolve_config(cmd, opt);
  const double alpha = cmd->count("--alpha") > 0 ? opt.alpha : 1.0;
  const long steps = cmd->count("--T") > 0 ? opt.steps : 100000;
  const LowerBoundTrace trace = lower_bound_run(alpha, steps);

  config.loss_spec = {{"family", "polynomial"}, {"alpha", alpha}};
  config.steps = steps;
  const fs::path dir = prepare_out_dir(config, "lowerbound");
  std::ofstream file(dir / "lowerbound.csv", std::ios::binary);
  CsvWriter csv(file);
  csv.header({"t", "risk", "floor", "upper_envelope"});
  long violations = 0;
  for (std::size_t t = 0; t < trace.risks.size(); ++t) {
    csv.field(static_cast<long>(t + 1))
        .field(trace.risks[t])
        .field(trace.floors[t])
        .field(trace.upper_envelopes[t]);
    csv.end_row();
    if (trace.risks[t] < trace.floors[t] || trace.risks[t] > trace.upper_envelopes[t]) {
      ++violations;
    }
  }
  std::printf("lower bound: alpha %.3g, T %ld, floor constant %.6g, %ld violations\n", alpha,
              steps, trace.floor_constant, violations);
  std::printf("outputs in %s\n", dir.c_str());
  return violations == 0 ? kExitOk : kExitViolation;
}

// -- sweep ----------------------------------------------------------------------

int run_sweep(const CLI::App* cmd, const CliOptions& opt, const std::string& axis,
              std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs a non-empty --values list");
  if (axis != "T" && axis != "n" && axis != "alpha") {
    throw std::invalid_argument("--axis must be T|n|alpha");
  }
  ExperimentConfig config = resolve_config(cmd, opt);
  const fs::path dir = prepare_out_dir(config, "sweep");

  std::ofstream file(dir / "sweep.csv", std::ios::binary);
  CsvWriter csv(file);
  csv.header({"sweep_var", "value", "bound_term1", "bound_term2", "measured", "stderr"});
  for (std::size_t i = 0; i < values.size(); ++i) {
    ExperimentConfig point = config;
    if (axis == "T") {
      point.steps = static_cast<long>(values[i]);
    } else if (axis == "n") {
      point.count = static_cast<int>(values[i]);
    } else {
      point.loss_spec["alpha"] = values[i];
    }
    const TrainingArtifacts art = run_training_experiment(point);
    const std::vector<double> sweep_value = {axis == "alpha"
                                                 ? static_cast<double>(point.steps)
                                                 : values[i]};
    const RatePoint rate =
        table_rate_curves(art.model, point.gamma, sweep_value, axis != "n",
                          axis == "n" ? static_cast<double>(point.steps)
                                      : static_cast<double>(point.count))
            .front();
    csv.field(axis).field(values[i]).field(rate.term_opt).field(rate.term_gen)
        .field(art.test_loss.mean).field(art.test_loss.std_error);
    csv.end_row();
  }
  std::printf("sweep over %s with %zu points -> %s\n", axis.c_str(), values.size(),
              (dir / "sweep.csv").c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-bounded loss optimization and stability harness"};
  app.require_subcommand(1);

  CliOptions opt;
  std::string sweep_axis = "T";
  std::vector<double> sweep_values;

  CLI::App* verify = app.add_subcommand("verify-loss", "audit a loss family's certified properties");
  add_common_flags(verify, opt);

  CLI::App* run_gd_cmd = app.add_subcommand("run-gd", "train with full-batch gradient descent");
  add_common_flags(run_gd_cmd, opt);

  CLI::App* run_sgd_cmd = app.add_subcommand("run-sgd", "train with stochastic gradient descent");
  add_common_flags(run_sgd_cmd, opt);

  CLI::App* stability = app.add_subcommand("stability", "leave-one-out stability measurement");
  add_common_flags(stability, opt);
  stability->add_option("--method", opt.method, "gd|sgd|exp");

  CLI::App* genbound = app.add_subcommand("genbound", "evaluate generalization bounds");
  add_common_flags(genbound, opt);
  genbound->add_option("--method", opt.method, "gd|sgd");

  CLI::App* lowerbound = app.add_subcommand("lowerbound", "1-D polynomial lower-bound trace");
  add_common_flags(lowerbound, opt);

  CLI::App* sweep = app.add_subcommand("sweep", "sweep T, n or alpha and measure test loss");
  add_common_flags(sweep, opt);
  sweep->add_option("--axis", sweep_axis, "T|n|alpha");
  sweep->add_option("--values", sweep_values, "sweep values")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (verify->parsed()) return run_verify_loss(verify, opt);
    if (run_gd_cmd->parsed()) return run_training(run_gd_cmd, opt, StepMethod::GradientDescent);
    if (run_sgd_cmd->parsed()) {
      return run_training(run_sgd_cmd, opt, StepMethod::StochasticGradientDescent);
    }
    if (stability->parsed()) return run_stability(stability, opt);
    if (genbound->parsed()) return run_genbound(genbound, opt);
    if (lowerbound->parsed()) return run_lowerbound(lowerbound, opt);
    if (sweep->parsed()) return run_sweep(sweep, opt, sweep_axis, sweep_values);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitViolation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitConfig;
}
