#include "selfbound/data.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "selfbound/io.hpp"

namespace selfbound {

namespace {

Eigen::VectorXd random_unit_vector(int dim, Rng& rng) {
  Eigen::VectorXd v(dim);
  double norm2 = 0.0;
  do {
    for (int i = 0; i < dim; ++i) v(i) = rng.normal();
    norm2 = v.squaredNorm();
  } while (norm2 == 0.0);
  return v / std::sqrt(norm2);
}

// z = m * witness + u with m ~ Uniform[gamma, 1] and u uniform in the
// (d-1)-ball of radius sqrt(1 - m^2) orthogonal to the witness. Both
// dataset invariants (margin and unit norm cap) hold exactly.
Eigen::VectorXd draw_signed_instance(const Eigen::VectorXd& witness, double gamma, Rng& rng) {
  const int dim = static_cast<int>(witness.size());
  const double m = rng.uniform(gamma, 1.0);
  Eigen::VectorXd g(dim);
  for (int i = 0; i < dim; ++i) g(i) = rng.normal();
  g -= g.dot(witness) * witness;
  const double gn = g.norm();
  const double radius =
      std::sqrt(std::max(0.0, 1.0 - m * m)) * std::pow(rng.uniform(), 1.0 / (dim - 1));
  Eigen::VectorXd z = m * witness;
  if (gn > 0.0) z += (radius / gn) * g;
  return z;
}

}  // namespace

LinearDataset sample_dataset(int dim, int count, double gamma, std::uint64_t seed) {
  if (dim < 2) throw std::invalid_argument("sample_dataset: dim >= 2 required");
  if (count < 1) throw std::invalid_argument("sample_dataset: count >= 1 required");
  if (!(gamma > 0.0 && gamma <= 0.9)) {
    throw std::invalid_argument("sample_dataset: infeasible margin, need 0 < gamma <= 0.9");
  }

  Rng master(seed);
  Rng witness_rng = master.derive("witness");
  Rng instance_rng = master.derive("instances");

  LinearDataset data;
  data.witness = random_unit_vector(dim, witness_rng);
  data.margin_gamma = gamma;
  data.seed = seed;
  data.signed_instances.resize(count, dim);
  for (int i = 0; i < count; ++i) {
    data.signed_instances.row(i) = draw_signed_instance(data.witness, gamma, instance_rng);
  }
  return data;
}

void audit_margins(const LinearDataset& data) {
  if (std::abs(data.witness.norm() - 1.0) > 1e-12) {
    throw std::logic_error("dataset audit: witness is not unit norm");
  }
  for (Eigen::Index i = 0; i < data.count(); ++i) {
    const auto z = data.signed_instances.row(i);
    if (z.norm() > 1.0 + 1e-12) throw std::logic_error("dataset audit: ||z|| > 1");
    if (z.dot(data.witness) < data.margin_gamma - 1e-12) {
      throw std::logic_error("dataset audit: margin violation");
    }
  }
}

LooFamily::LooFamily(const LinearDataset& base) : base_(&base) {
  if (base.count() < 2) throw std::invalid_argument("leave-one-out family requires n >= 2");
}

double empirical_risk(const LossModel& loss, const LinearDataset& data, const Eigen::VectorXd& w,
                      int excluded) {
  const Eigen::VectorXd margins = data.signed_instances * w;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    if (i == excluded) continue;
    sum += loss.value(margins(i));
  }
  return sum / static_cast<double>(data.count());
}

RiskAndGradient empirical_risk_and_gradient(const LossModel& loss, const LinearDataset& data,
                                            const Eigen::VectorXd& w, int excluded) {
  const Eigen::Index n = data.count();
  const Eigen::VectorXd margins = data.signed_instances * w;
  Eigen::VectorXd slopes(n);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == excluded) {
      slopes(i) = 0.0;
      continue;
    }
    const LossEval e = loss.evaluate(margins(i));
    sum += e.value;
    slopes(i) = e.first;
  }
  RiskAndGradient out;
  out.risk = sum / static_cast<double>(n);
  out.gradient = (data.signed_instances.transpose() * slopes) / static_cast<double>(n);
  return out;
}

Eigen::VectorXd example_gradient(const LossModel& loss, const LinearDataset& data,
                                 const Eigen::VectorXd& w, int index) {
  const auto z = data.signed_instances.row(index);
  const LossEval e = loss.evaluate(z.dot(w));
  return e.first * z.transpose();
}

MarginDistribution distribution_of(const LinearDataset& data) {
  return {data.witness, data.margin_gamma};
}

Eigen::VectorXd draw_instance(const MarginDistribution& dist, Rng& rng) {
  return draw_signed_instance(dist.witness, dist.gamma, rng);
}

namespace {

MonteCarloEstimate accumulate_mc(const MarginDistribution& dist, const Eigen::VectorXd& w,
                                 int draws, std::uint64_t seed, bool zero_one,
                                 const LossModel* loss) {
  if (draws < 100) throw std::invalid_argument("population estimate requires >= 100 draws");
  Rng rng = Rng(seed).derive("population");
  // Welford: exactly zero variance when every draw gives the same value.
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const Eigen::VectorXd z = draw_instance(dist, rng);
    const double v = zero_one ? (w.dot(z) <= 0.0 ? 1.0 : 0.0) : loss->value(w.dot(z));
    const double delta = v - mean;
    mean += delta / (i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(draws);
  return {mean, std::sqrt(std::max(0.0, m2 / (n - 1.0)) / n)};
}

}  // namespace

MonteCarloEstimate population_loss(const LossModel& loss, const MarginDistribution& dist,
                                   const Eigen::VectorXd& w, int draws, std::uint64_t seed) {
  return accumulate_mc(dist, w, draws, seed, false, &loss);
}

MonteCarloEstimate population_zero_one(const MarginDistribution& dist, const Eigen::VectorXd& w,
                                       int draws, std::uint64_t seed) {
  return accumulate_mc(dist, w, draws, seed, true, nullptr);
}

double multiclass_max_margin(int num_classes) {
  // Class codes are simplex vertices; an instance at radial weight r has
  // pairwise margin r * sqrt(K) / (K - 1), so r <= 1 caps the margin.
  const double k = static_cast<double>(num_classes);
  return std::min(std::sqrt(k) / (k - 1.0), 0.9 / std::sqrt(2.0));
}

namespace {

// K unit vectors in R^{K-1} with pairwise inner product -1/(K-1)
// (centered one-hot frame, orthonormalized by construction below).
Eigen::MatrixXd simplex_codes(int k) {
  Eigen::MatrixXd centered = Eigen::MatrixXd::Identity(k, k);
  centered.array() -= 1.0 / static_cast<double>(k);
  // Gram-Schmidt on the first k-1 coordinates of the centered frame.
  Eigen::MatrixXd basis(k, k - 1);
  int col = 0;
  for (int j = 0; j < k && col < k - 1; ++j) {
    Eigen::VectorXd v = centered.col(j);
    for (int c = 0; c < col; ++c) v -= basis.col(c).dot(v) * basis.col(c);
    const double nv = v.norm();
    if (nv > 1e-12) {
      basis.col(col++) = v / nv;
    }
  }
  Eigen::MatrixXd codes = centered * basis;  // k x (k-1)
  for (int i = 0; i < k; ++i) codes.row(i) /= codes.row(i).norm();
  return codes;
}

}  // namespace

MulticlassDataset sample_multiclass(int dim, int count, double gamma, int num_classes,
                                    std::uint64_t seed) {
  if (num_classes < 2) throw std::invalid_argument("sample_multiclass: K >= 2 required");
  if (dim < num_classes - 1) {
    throw std::invalid_argument("sample_multiclass: dim >= K - 1 required");
  }
  if (count < 1) throw std::invalid_argument("sample_multiclass: count >= 1 required");
  const double max_gamma = multiclass_max_margin(num_classes);
  if (!(gamma > 0.0 && gamma <= max_gamma)) {
    throw std::invalid_argument("sample_multiclass: infeasible margin for given K");
  }

  const double k = static_cast<double>(num_classes);
  const Eigen::MatrixXd codes_small = simplex_codes(num_classes);  // K x (K-1)
  Eigen::MatrixXd codes = Eigen::MatrixXd::Zero(num_classes, dim);
  codes.leftCols(num_classes - 1) = codes_small;

  Rng master(seed);
  Rng rot_rng = master.derive("rotation");
  Rng instance_rng = master.derive("instances");

  // Random rotation: orthonormalize a Gaussian frame, apply to codes.
  Eigen::MatrixXd frame(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) frame(i, j) = rot_rng.normal();
  // Gram-Schmidt columns.
  for (int j = 0; j < dim; ++j) {
    for (int c = 0; c < j; ++c) frame.col(j) -= frame.col(c).dot(frame.col(j)) * frame.col(c);
    frame.col(j).normalize();
  }
  codes = codes * frame.transpose();  // rows stay unit, pairwise dots preserved

  MulticlassDataset data;
  data.num_classes = num_classes;
  data.margin_gamma = gamma;
  data.seed = seed;
  data.instances.resize(count, dim);
  data.labels.resize(count);

  // Witness: concatenation of codes / sqrt(K) (unit in R^{Kd}). An instance
  // x = r * code_y + u with u orthogonal to every code has Kronecker margin
  // r * sqrt(K) / (K - 1) against every wrong class.
  data.witness.resize(static_cast<Eigen::Index>(num_classes) * dim);
  for (int j = 0; j < num_classes; ++j) {
    data.witness.segment(static_cast<Eigen::Index>(j) * dim, dim) =
        codes.row(j).transpose() / std::sqrt(k);
  }

  const double r_for = (k - 1.0) / std::sqrt(k);
  for (int i = 0; i < count; ++i) {
    const int label = 1 + static_cast<int>(instance_rng.below(num_classes));
    const double margin = instance_rng.uniform(gamma, max_gamma);
    const double r = margin * r_for;
    Eigen::VectorXd x = r * codes.row(label - 1).transpose();
    // Orthogonal noise in the complement of the code span; the rotated
    // codes span exactly the first K-1 (orthonormal) frame columns.
    Eigen::VectorXd g(dim);
    for (int t = 0; t < dim; ++t) g(t) = instance_rng.normal();
    for (int c = 0; c < num_classes - 1; ++c) {
      g -= frame.col(c).dot(g) * frame.col(c);
    }
    const double gn = g.norm();
    if (gn > 1e-12 && dim > num_classes - 1) {
      const double radius = std::sqrt(std::max(0.0, 1.0 - r * r)) *
                            std::pow(instance_rng.uniform(), 1.0 / (dim - num_classes + 1));
      x += (radius / gn) * g;
    }
    data.instances.row(i) = x;
    data.labels[i] = label;
  }
  return data;
}

void audit_margins(const MulticlassDataset& data) {
  if (std::abs(data.witness.norm() - 1.0) > 1e-10) {
    throw std::logic_error("multiclass audit: witness is not unit norm");
  }
  const Eigen::Index d = data.dim();
  for (Eigen::Index i = 0; i < data.count(); ++i) {
    const auto x = data.instances.row(i).transpose();
    if (x.norm() > 1.0 + 1e-12) throw std::logic_error("multiclass audit: ||x|| > 1");
    const int yi = data.labels[static_cast<std::size_t>(i)];
    const Eigen::VectorXd wy = data.witness.segment(static_cast<Eigen::Index>(yi - 1) * d, d);
    for (int j = 1; j <= data.num_classes; ++j) {
      if (j == yi) continue;
      const Eigen::VectorXd wj = data.witness.segment(static_cast<Eigen::Index>(j - 1) * d, d);
      if ((wy - wj).dot(x) < data.margin_gamma - 1e-10) {
        throw std::logic_error("multiclass audit: Kronecker margin violation");
      }
    }
  }
}

void write_dataset(const LinearDataset& data, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open dataset CSV for writing: " + csv_path.string());
  CsvWriter csv(out);
  std::vector<std::string> names = {"label"};
  for (Eigen::Index j = 0; j < data.dim(); ++j) names.push_back("x" + std::to_string(j));
  csv.header(names);
  for (Eigen::Index i = 0; i < data.count(); ++i) {
    csv.field(1L);  // instances are stored pre-signed (z = y * x with y = +1)
    for (Eigen::Index j = 0; j < data.dim(); ++j) csv.field(data.signed_instances(i, j));
    csv.end_row();
  }
  out.close();

  nlohmann::json sidecar;
  sidecar["gamma"] = data.margin_gamma;
  sidecar["seed"] = data.seed;
  sidecar["witness"] = nlohmann::json::array();
  for (Eigen::Index j = 0; j < data.witness.size(); ++j) sidecar["witness"].push_back(data.witness(j));
  write_json_file(sidecar_path, sidecar);
}

LinearDataset read_dataset(const std::filesystem::path& csv_path,
                           const std::filesystem::path& sidecar_path) {
  const CsvTable table = read_csv(csv_path);
  if (table.header.empty() || table.header.front() != "label") {
    throw std::runtime_error("dataset CSV: missing or malformed header");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(table.header.size()) - 1;
  LinearDataset data;
  data.signed_instances.resize(static_cast<Eigen::Index>(table.rows.size()), dim);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    if (static_cast<Eigen::Index>(row.size()) != dim + 1) {
      throw std::runtime_error("dataset CSV: ragged row");
    }
    const double label = std::stod(row[0]);
    for (Eigen::Index j = 0; j < dim; ++j) {
      data.signed_instances(static_cast<Eigen::Index>(i), j) =
          label * std::stod(row[static_cast<std::size_t>(j) + 1]);
    }
  }
  const nlohmann::json sidecar = read_json_file(sidecar_path);
  data.margin_gamma = sidecar.at("gamma").get<double>();
  data.seed = sidecar.at("seed").get<std::uint64_t>();
  const auto& wit = sidecar.at("witness");
  data.witness.resize(static_cast<Eigen::Index>(wit.size()));
  for (Eigen::Index j = 0; j < data.witness.size(); ++j) {
    data.witness(j) = wit[static_cast<std::size_t>(j)].get<double>();
  }
  return data;
}

}  // namespace selfbound
