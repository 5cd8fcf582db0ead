#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"
#include "selfbound/bounds.hpp"
#include "selfbound/data.hpp"
#include "selfbound/loss.hpp"
#include "selfbound/optimize.hpp"

namespace selfbound {

/// One experiment: a loss, a data regime, an optimizer and the evaluation
/// settings. Serializable as a single JSON document (nested sections
/// "loss" / "data" / "optimizer" / "stability" / "evaluation" / "output");
/// CLI flags override file fields.
struct ExperimentConfig {
  nlohmann::json loss_spec = {{"family", "logistic"}};
  int dim = 20;
  int count = 32;  // n
  double gamma = 0.25;
  std::uint64_t seed = 1;

  StepMethod method = StepMethod::GradientDescent;
  std::optional<double> step_size;  // empty = "auto"
  long steps = 1000;
  long record_cadence = 0;

  int replicates = 20;
  int test_draws = 100000;
  EpsilonMode epsilon_mode = EpsilonMode::Corollary;

  std::string out_dir;
  int workers = 1;

  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  LossModel make_loss() const { return LossModel::from_json(loss_spec); }
};

struct TrainingArtifacts {
  LossModel model;  // with the published delta pairing applied
  LinearDataset data;
  Trajectory trajectory;
  BoundEvaluation bounds;
  MonteCarloEstimate test_loss;
  MonteCarloEstimate zero_one_error;
  double mean_train_risk = 0;   // (1/T) sum_t F_hat(w_t)
  double final_train_risk = 0;  // F_hat(w_T)
};

/// Samples the dataset, trains with the configured method, estimates test
/// loss and zero-one error of the returned model (w_T for GD, the averaged
/// iterate for SGD) on fresh draws, and evaluates the applicable bounds at
/// the selected epsilon.
TrainingArtifacts run_training_experiment(const ExperimentConfig& config);

/// Largest excess of measured (1/T) sum_t F_hat(w_t) over the training
/// bound across a log grid of epsilon in [1/T^2, l(0)] (<= 0 everywhere
/// means the for-all-epsilon training-error lemma held).
double worst_opt_bound_excess(const LossModel& loss, double gamma, double eta, long steps,
                              double mean_risk, int grid_points, bool sgd_form);

}  // namespace selfbound
