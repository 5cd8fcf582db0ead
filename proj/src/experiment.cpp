#include "selfbound/experiment.hpp"

#include <cmath>
#include <stdexcept>

namespace selfbound {

namespace {

StepMethod method_from_string(const std::string& name) {
  if (name == "gd") return StepMethod::GradientDescent;
  if (name == "sgd") return StepMethod::StochasticGradientDescent;
  if (name == "gd-adaptive-exp") return StepMethod::AdaptiveExponential;
  throw std::invalid_argument("unknown optimizer method: " + name);
}

std::string method_to_string(StepMethod method) {
  switch (method) {
    case StepMethod::GradientDescent: return "gd";
    case StepMethod::StochasticGradientDescent: return "sgd";
    case StepMethod::AdaptiveExponential: return "gd-adaptive-exp";
  }
  throw std::logic_error("unknown optimizer method");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  ExperimentConfig config;
  if (doc.contains("loss")) config.loss_spec = doc.at("loss");
  if (doc.contains("data")) {
    const auto& d = doc.at("data");
    if (d.contains("dim")) config.dim = d.at("dim").get<int>();
    if (d.contains("n")) config.count = d.at("n").get<int>();
    if (d.contains("gamma")) config.gamma = d.at("gamma").get<double>();
    if (d.contains("seed")) config.seed = d.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("optimizer")) {
    const auto& o = doc.at("optimizer");
    if (o.contains("method")) config.method = method_from_string(o.at("method").get<std::string>());
    if (o.contains("eta")) {
      if (o.at("eta").is_string()) {
        if (o.at("eta").get<std::string>() != "auto") {
          throw std::invalid_argument("optimizer.eta must be a number or \"auto\"");
        }
      } else {
        config.step_size = o.at("eta").get<double>();
      }
    }
    if (o.contains("T")) config.steps = o.at("T").get<long>();
    if (o.contains("record_cadence")) config.record_cadence = o.at("record_cadence").get<long>();
  }
  if (doc.contains("stability") && doc.at("stability").contains("replicates")) {
    config.replicates = doc.at("stability").at("replicates").get<int>();
  }
  if (doc.contains("evaluation")) {
    const auto& e = doc.at("evaluation");
    if (e.contains("test_size")) config.test_draws = e.at("test_size").get<int>();
    if (e.contains("epsilon_mode")) {
      const std::string mode = e.at("epsilon_mode").get<std::string>();
      if (mode == "corollary") {
        config.epsilon_mode = EpsilonMode::Corollary;
      } else if (mode == "grid") {
        config.epsilon_mode = EpsilonMode::GridMin;
      } else {
        throw std::invalid_argument("evaluation.epsilon_mode must be corollary|grid");
      }
    }
  }
  if (doc.contains("output") && doc.at("output").contains("dir")) {
    config.out_dir = doc.at("output").at("dir").get<std::string>();
  }
  if (doc.contains("workers")) config.workers = doc.at("workers").get<int>();
  return config;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json doc;
  doc["loss"] = loss_spec;
  doc["data"] = {{"dim", dim}, {"n", count}, {"gamma", gamma}, {"seed", seed}};
  doc["optimizer"] = {{"method", method_to_string(method)},
                      {"eta", step_size ? nlohmann::json(*step_size) : nlohmann::json("auto")},
                      {"T", steps},
                      {"record_cadence", record_cadence}};
  doc["stability"] = {{"replicates", replicates}};
  doc["evaluation"] = {{"test_size", test_draws},
                       {"epsilon_mode",
                        epsilon_mode == EpsilonMode::Corollary ? "corollary" : "grid"}};
  doc["output"] = {{"dir", out_dir}};
  doc["workers"] = workers;
  return doc;
}

TrainingArtifacts run_training_experiment(const ExperimentConfig& config) {
  const LossModel base = config.make_loss();
  LinearDataset data = sample_dataset(config.dim, config.count, config.gamma, config.seed);

  OptimizerConfig opt;
  opt.method = config.method;
  opt.step_size = config.step_size;
  opt.steps = config.steps;
  opt.record_cadence = config.record_cadence;
  opt.rng_seed = Rng(config.seed).derive("sgd-run").seed();

  const bool sgd = config.method == StepMethod::StochasticGradientDescent;
  Trajectory trajectory = sgd ? run_sgd(base, data, opt) : run_gd(base, data, opt);

  // Published epsilon/delta pairing; the model used for bound evaluation
  // carries the paired delta. A single-iterate run (T = 1, no updates) has
  // no published choice; epsilon = 1/T with the constructed delta.
  const EpsilonChoice choice =
      config.steps >= 2 ? select_epsilon(base, config.gamma, trajectory.step_size, config.steps,
                                         config.count, config.epsilon_mode)
                        : EpsilonChoice{1.0, base.delta()};
  const LossModel model = with_delta(base, choice.delta);

  BoundEvaluation bounds;
  bounds.epsilon = choice.epsilon;
  bounds.rho_eps = model.rho(choice.epsilon, config.gamma);
  bounds.eta = trajectory.step_size;
  bounds.gamma = config.gamma;
  bounds.steps = config.steps;
  bounds.count = config.count;
  const LossConstants& k = model.constants();
  bounds.lipschitz = k.lipschitz;
  bounds.smoothness = k.smoothness;
  bounds.self_bound_c = k.self_bound_c;
  bounds.self_bound_delta = k.self_bound_delta;
  bounds.opt_bound = sgd ? opt_bound_sgd(model, config.gamma, trajectory.step_size, config.steps,
                                         choice.epsilon)
                         : opt_bound_gd(model, config.gamma, trajectory.step_size, config.steps,
                                        choice.epsilon);
  if (sgd) {
    bounds.gen_bound_lipschitz = gen_bound_sgd(model, config.gamma, trajectory.step_size,
                                               config.steps, config.count, choice.epsilon);
    bounds.gen_bound_smooth = std::numeric_limits<double>::quiet_NaN();
  } else {
    const GenBound gen = gen_bound_gd(model, config.gamma, trajectory.step_size, config.steps,
                                      config.count, choice.epsilon);
    bounds.gen_bound_lipschitz = gen.lipschitz_form;
    bounds.gen_bound_smooth = gen.smooth_form;
  }

  const Eigen::VectorXd& output =
      sgd ? trajectory.averaged_iterate : trajectory.final_iterate;
  const MarginDistribution dist = distribution_of(data);
  const std::uint64_t test_seed = Rng(config.seed).derive("test-draws").seed();
  const MonteCarloEstimate test_loss =
      population_loss(base, dist, output, config.test_draws, test_seed);
  const MonteCarloEstimate zero_one =
      population_zero_one(dist, output, config.test_draws, test_seed);
  bounds.measured_test = test_loss.mean;
  bounds.measured_test_stderr = test_loss.std_error;

  const double mean_train = trajectory.risk_sum() / static_cast<double>(trajectory.steps());
  const double final_train = trajectory.emp_risks.back();
  bounds.measured_train = sgd ? empirical_risk(base, data, output) : final_train;

  return TrainingArtifacts{model,     std::move(data), std::move(trajectory), bounds,
                           test_loss, zero_one,        mean_train,            final_train};
}

double worst_opt_bound_excess(const LossModel& loss, double gamma, double eta, long steps,
                              double mean_risk, int grid_points, bool sgd_form) {
  const double lo = 1.0 / (static_cast<double>(steps) * static_cast<double>(steps));
  const double hi = loss.value(0.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double eps = lo * std::pow(hi / lo, static_cast<double>(i) / (grid_points - 1));
    const double bound = sgd_form ? opt_bound_sgd(loss, gamma, eta, steps, eps)
                                  : opt_bound_gd(loss, gamma, eta, steps, eps);
    worst = std::max(worst, mean_risk - bound);
  }
  return worst;
}

}  // namespace selfbound
