#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <vector>

#include "selfbound/loss.hpp"
#include "selfbound/rng.hpp"

namespace selfbound {

/// Margin-separable sample of signed instances z_i = y_i * x_i with a unit
/// witness: w* . z_i >= gamma and ||z_i|| <= 1 hold exactly by construction.
struct LinearDataset {
  Eigen::MatrixXd signed_instances;  // n x d, row i = z_i
  Eigen::VectorXd witness;           // unit vector
  double margin_gamma = 0.0;
  std::uint64_t seed = 0;

  Eigen::Index count() const { return signed_instances.rows(); }
  Eigen::Index dim() const { return signed_instances.cols(); }
};

/// Draws each z i.i.d.: margin component m ~ Uniform[gamma, 1] along a
/// randomly rotated unit witness, plus an orthogonal component uniform in
/// the (d-1)-ball of radius sqrt(1 - m^2). Deterministic given the seed.
LinearDataset sample_dataset(int dim, int count, double gamma, std::uint64_t seed);

/// Exact (not sampled) margin and norm audit; throws std::logic_error on
/// any violation.
void audit_margins(const LinearDataset& data);

/// Leave-one-out views over a base sample. Member i behaves as the base
/// sample with instance i replaced by the zero-loss sentinel: its risk and
/// gradient at any w equal the full-sample versions minus the i-th term,
/// still normalized by n.
class LooFamily {
 public:
  explicit LooFamily(const LinearDataset& base);
  const LinearDataset& base() const { return *base_; }
  int size() const { return static_cast<int>(base_->count()); }

 private:
  const LinearDataset* base_;
};

constexpr int kNoExclusion = -1;

/// Empirical risk (1/n) sum_{j != excluded} l(w . z_j). The excluded index
/// models the leave-one-out sentinel; pass kNoExclusion for the full sample.
double empirical_risk(const LossModel& loss, const LinearDataset& data, const Eigen::VectorXd& w,
                      int excluded = kNoExclusion);

struct RiskAndGradient {
  double risk = 0;
  Eigen::VectorXd gradient;
};
RiskAndGradient empirical_risk_and_gradient(const LossModel& loss, const LinearDataset& data,
                                            const Eigen::VectorXd& w, int excluded = kNoExclusion);

/// Gradient of the single-example objective f(w, z_i) = l(w . z_i).
Eigen::VectorXd example_gradient(const LossModel& loss, const LinearDataset& data,
                                 const Eigen::VectorXd& w, int index);

/// The sampling distribution behind a dataset (witness direction + margin
/// law); used for fresh population draws.
struct MarginDistribution {
  Eigen::VectorXd witness;
  double gamma = 0.0;
};
MarginDistribution distribution_of(const LinearDataset& data);
Eigen::VectorXd draw_instance(const MarginDistribution& dist, Rng& rng);

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
};

/// Monte-Carlo estimate of the population loss F(w) = E l(w . z) over fresh
/// draws; deterministic given the seed. Requires draws >= 100.
MonteCarloEstimate population_loss(const LossModel& loss, const MarginDistribution& dist,
                                   const Eigen::VectorXd& w, int draws, std::uint64_t seed);

/// Fraction of fresh draws with w . z <= 0 (misclassified margin).
MonteCarloEstimate population_zero_one(const MarginDistribution& dist, const Eigen::VectorXd& w,
                                       int draws, std::uint64_t seed);

/// Multi-class sample with the Kronecker margin structure: a unit witness
/// w* in R^{Kd} with w* . (e_{y_i} (x) I - e_j (x) I) x_i >= gamma for all
/// i and j != y_i. Labels are 1-based.
struct MulticlassDataset {
  Eigen::MatrixXd instances;  // n x d, ||x_i|| <= 1
  std::vector<int> labels;    // in 1..K
  Eigen::VectorXd witness;    // unit vector in R^{K*d}
  double margin_gamma = 0.0;
  int num_classes = 0;
  std::uint64_t seed = 0;

  Eigen::Index count() const { return instances.rows(); }
  Eigen::Index dim() const { return instances.cols(); }
};

/// Constructive generator on simplex class codes; requires dim >= K - 1 and
/// a feasible gamma (throws std::invalid_argument otherwise).
MulticlassDataset sample_multiclass(int dim, int count, double gamma, int num_classes,
                                    std::uint64_t seed);
void audit_margins(const MulticlassDataset& data);

/// Largest feasible Kronecker margin for the constructive generator at K
/// classes (also capped by the generator-wide bound 0.9/sqrt(2)).
double multiclass_max_margin(int num_classes);

/// CSV export (one row per instance: label, x components) plus a JSON
/// sidecar carrying gamma, witness and seed. Round-trips bit-exactly.
void write_dataset(const LinearDataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path);
LinearDataset read_dataset(const std::filesystem::path& csv_path,
                           const std::filesystem::path& sidecar_path);

}  // namespace selfbound
