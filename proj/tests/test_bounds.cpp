#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "selfbound/bounds.hpp"
#include "selfbound/experiment.hpp"

using namespace selfbound;

TEST_CASE("training-error bounds, plug-in and derived values") {
  // Clamp regime rho = 1 in plug-in form: 1/(0.5*100) + 0.1 = 0.12.
  CHECK(opt_bound_form(1.0, 0.1, 0.5, 100, false) == doctest::Approx(0.12).epsilon(1e-15));
  CHECK(opt_bound_form(1.0, 0.1, 0.5, 100, true) == doctest::Approx(0.11).epsilon(1e-15));
  // Same clamp reached through a model: the super-exponential tail has
  // inverse(0.1) = sqrt(log 10) - 1 < 1, so rho clamps to 1 at gamma = 1.
  const LossModel super = LossModel::super_exponential(2.0, 0.25);
  CHECK(opt_bound_gd(super, 1.0, 0.5, 100, 0.1) == doctest::Approx(0.12).epsilon(1e-14));

  const LossModel logistic = LossModel::logistic();
  // rho(0.01, 0.5) = 9.2003320386 -> rho^2/5000 + 0.01.
  CHECK(opt_bound_gd(logistic, 0.5, 0.5, 10000, 0.01) ==
        doctest::Approx(0.026929221924281174).epsilon(1e-13));
  CHECK(opt_bound_sgd(logistic, 0.5, 0.5, 10000, 0.01) ==
        doctest::Approx(0.018464610962140587).epsilon(1e-13));
  // The SGD first term is exactly half the GD first term.
  const double eps = 0.003;
  const double gd = opt_bound_gd(logistic, 0.5, 0.5, 10000, eps) - eps;
  const double sgd = opt_bound_sgd(logistic, 0.5, 0.5, 10000, eps) - eps;
  CHECK(sgd == doctest::Approx(gd / 2.0).epsilon(1e-15));
  // Clamp case epsilon -> l(0): bound -> 1/(eta T) + l(0).
  const double l0 = logistic.value(0.0);
  CHECK(opt_bound_gd(logistic, 1.0, 0.5, 100, l0) ==
        doctest::Approx(1.0 / 50.0 + l0).epsilon(1e-14));
  CHECK_THROWS_AS((void)opt_bound_gd(logistic, 1.0, 0.5, 100, 0.0), std::invalid_argument);
}

TEST_CASE("generalization bounds: explicit proof forms") {
  // Plug-in at rho=2, eps=0.05, delta=0, c=G=1, eta=0.5, T=100, n=50:
  // Lipschitz form (4/50 + 0.05) + (2*0.5/50)(8 + 5) = 0.13 + 0.26 = 0.39.
  CHECK(gen_bound_lipschitz_form(2.0, 0.05, 1.0, 1.0, 0.0, 0.5, 100, 50, false) ==
        doctest::Approx(0.39).epsilon(1e-15));
  // SGD variant halves the first term: 0.09 + 0.26 = 0.35.
  CHECK(gen_bound_lipschitz_form(2.0, 0.05, 1.0, 1.0, 0.0, 0.5, 100, 50, true) ==
        doctest::Approx(0.35).epsilon(1e-15));
  // Smooth form: 4*0.13 + (3*1*0.25/50) * 13^2 = 0.52 + 2.535.
  CHECK(gen_bound_smooth_form(2.0, 0.05, 1.0, 1.0, 0.0, 0.5, 100, 50) ==
        doctest::Approx(0.52 + 3.0 * 0.25 / 50.0 * 169.0).epsilon(1e-14));

  // Model-level wiring agrees with the plug-in forms using the family's
  // own rho and constants.
  const LossModel logistic = LossModel::logistic();
  const double eps = 1e-3, gamma = 0.25, eta = 0.5;
  const double rho = logistic.rho(eps, gamma);
  const GenBound gd = gen_bound_gd(logistic, gamma, eta, 1000, 32, eps);
  REQUIRE(gd.lipschitz_form.has_value());
  CHECK(*gd.lipschitz_form ==
        doctest::Approx(gen_bound_lipschitz_form(rho, eps, 1.0, 1.0, 0.0, eta, 1000, 32, false))
            .epsilon(1e-15));
  CHECK(gd.smooth_form ==
        doctest::Approx(gen_bound_smooth_form(rho, eps, 1.0, 1.0, 0.0, eta, 1000, 32))
            .epsilon(1e-15));
  CHECK(gen_bound_sgd(logistic, gamma, eta, 1000, 32, eps) ==
        doctest::Approx(gen_bound_lipschitz_form(rho, eps, 1.0, 1.0, 0.0, eta, 1000, 32, true))
            .epsilon(1e-15));

  // Super-exponential exercises the delta > 0 exponents end to end.
  const LossModel super = LossModel::super_exponential(2.0, 0.2);
  const double rho_s = super.rho(1e-4, gamma);
  const GenBound gds = gen_bound_gd(super, gamma, 1.0 / 8.0, 1000, 32, 1e-4);
  CHECK(*gds.lipschitz_form ==
        doctest::Approx(gen_bound_lipschitz_form(rho_s, 1e-4, 2.0, 2.0 / (std::exp(1.0) * 0.2),
                                                 0.2, 1.0 / 8.0, 1000, 32, false))
            .epsilon(1e-15));
}

TEST_CASE("hypothesis and availability errors") {
  const LossModel logistic = LossModel::logistic();
  // At gamma = 1, eps = 0.2: rho = max(1.5, 1), rho^2/(eta T) with eta=0.5,
  // T=1000 gives 0.0045 << 0.2: hypothesis violated.
  CHECK_THROWS_AS((void)gen_bound_gd(logistic, 1.0, 0.5, 1000, 50, 0.2), std::invalid_argument);
  CHECK_THROWS_AS((void)gen_bound_sgd(logistic, 1.0, 0.5, 1000, 50, 0.2), std::invalid_argument);
  CHECK_THROWS_AS((void)gen_bound_sgd(logistic, 1.0, 0.5, 1000, 50, 0.0), std::invalid_argument);
  // Probit is not Lipschitz: no SGD bound, no GD Lipschitz form.
  const LossModel probit = LossModel::probit(0.25);
  CHECK_THROWS_AS((void)gen_bound_sgd(probit, 0.25, 0.125, 100, 50, 1e-3),
                  std::invalid_argument);
  const GenBound smooth_only = gen_bound_gd(probit, 0.25, 0.125, 100, 50, 1e-3);
  CHECK(!smooth_only.lipschitz_form.has_value());
  CHECK(smooth_only.smooth_form > 0.0);
}

TEST_CASE("epsilon selection: published choices") {
  const LossModel logistic = LossModel::logistic();
  const EpsilonChoice log_choice =
      select_epsilon(logistic, 0.25, 0.5, 1000, 32, EpsilonMode::Corollary);
  CHECK(log_choice.epsilon == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(log_choice.delta == 0.0);

  // T = floor(e^10): the paired delta is 1/log T = 1/10 up to truncation.
  const long t_e10 = static_cast<long>(std::exp(10.0));
  const LossModel super = LossModel::super_exponential(2.0, 0.25);
  const EpsilonChoice super_choice =
      select_epsilon(super, 0.25, 1.0 / 8.0, t_e10, 32, EpsilonMode::Corollary);
  CHECK(super_choice.epsilon == doctest::Approx(2.0 / static_cast<double>(t_e10)).epsilon(1e-15));
  CHECK(super_choice.delta == doctest::Approx(0.1).epsilon(1e-5));

  const EpsilonChoice probit_choice = select_epsilon(LossModel::probit(0.25), 0.25, 0.125, 1000,
                                                     32, EpsilonMode::Corollary);
  CHECK(probit_choice.epsilon == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(probit_choice.delta == doctest::Approx(1.0 / (2.0 * std::log(1000.0))).epsilon(1e-12));

  const EpsilonChoice sub_choice = select_epsilon(LossModel::sub_exponential(0.5), 0.25, 1.0,
                                                  2000, 32, EpsilonMode::Corollary);
  CHECK(sub_choice.epsilon == doctest::Approx(0.5 / 2000.0).epsilon(1e-15));

  // Polynomial: the saturating choice satisfies the hypothesis with equality.
  const LossModel poly = LossModel::polynomial_tail(2.0);
  const double eta_poly = 1.0 / 12.0;
  const EpsilonChoice poly_choice =
      select_epsilon(poly, 0.25, eta_poly, 5000, 32, EpsilonMode::Corollary);
  const double rho = poly.rho(poly_choice.epsilon, 0.25);
  CHECK(poly_choice.epsilon ==
        doctest::Approx(rho * rho / (eta_poly * 5000.0)).epsilon(1e-9));

  CHECK_THROWS_AS((void)select_epsilon(logistic, 0.25, 0.5, 1, 32, EpsilonMode::Corollary),
                  std::invalid_argument);
}

TEST_CASE("epsilon grid search never does worse than the corollary choice") {
  for (const LossModel& loss :
       {LossModel::logistic(), LossModel::polynomial_tail(2.0), LossModel::probit(0.25)}) {
    const double eta = 1.0 / (2.0 * (loss.constants().smoothness_bounded()
                                         ? loss.constants().smoothness
                                         : 1.0));
    const EpsilonChoice corollary = select_epsilon(loss, 0.25, eta, 2000, 64, EpsilonMode::Corollary);
    const EpsilonChoice grid = select_epsilon(loss, 0.25, eta, 2000, 64, EpsilonMode::GridMin);
    const LossModel paired = with_delta(loss, corollary.delta);
    auto value_of = [&](double eps) {
      const GenBound b = gen_bound_gd(paired, 0.25, eta, 2000, 64, eps);
      return b.lipschitz_form ? *b.lipschitz_form : b.smooth_form;
    };
    CHECK(value_of(grid.epsilon) <= value_of(corollary.epsilon) * (1.0 + 1e-12));
    // The grid choice also satisfies the theorem hypothesis.
    const double rho = paired.rho(grid.epsilon, 0.25);
    CHECK(grid.epsilon <= rho * rho / (eta * 2000.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("bounds are monotone in n and the first term decreases in T") {
  const LossModel logistic = LossModel::logistic();
  const double eps = 1e-3;
  double prev = 1e300;
  for (long n : {16L, 32L, 64L, 128L}) {
    const double b = *gen_bound_gd(logistic, 0.25, 0.5, 1000, n, eps).lipschitz_form;
    CHECK(b < prev);
    prev = b;
  }
  // Doubling n at delta = 0 halves the stability term exactly.
  const double opt = opt_bound_gd(logistic, 0.25, 0.5, 1000, eps);
  const double t1 = *gen_bound_gd(logistic, 0.25, 0.5, 1000, 32, eps).lipschitz_form - opt;
  const double t2 = *gen_bound_gd(logistic, 0.25, 0.5, 1000, 64, eps).lipschitz_form - opt;
  CHECK(t2 == doctest::Approx(t1 / 2.0).epsilon(1e-12));
  for (long t : {100L, 1000L, 10000L}) {
    CHECK(opt_bound_gd(logistic, 0.25, 0.5, 10 * t, eps) <
          opt_bound_gd(logistic, 0.25, 0.5, t, eps));
  }
}

TEST_CASE("rate curves carry the published exponents") {
  // Polynomial at T = n: total ~ n^{-alpha/(alpha+2)}.
  for (double alpha : {1.0, 2.0}) {
    const LossModel poly = LossModel::polynomial_tail(alpha);
    const double exponent = alpha / (alpha + 2.0);
    const auto curve = table_rate_curves(poly, 1.0, {256.0, 1024.0}, true, 0.0);
    REQUIRE(curve.size() == 2);
    // With T = n the two points use n = fixed_other = 0 -> rebuild with n = T.
    const auto at_n1 = table_rate_curves(poly, 1.0, {256.0}, true, 256.0).front();
    const auto at_n2 = table_rate_curves(poly, 1.0, {1024.0}, true, 1024.0).front();
    CHECK(at_n1.at_t_equals_n);
    CHECK(at_n2.total / at_n1.total ==
          doctest::Approx(std::pow(1024.0 / 256.0, -exponent)).epsilon(1e-12));
  }
  // Logistic: doubling n at fixed T halves the generalization term.
  const LossModel logistic = LossModel::logistic();
  const auto curve = table_rate_curves(logistic, 0.5, {128.0, 256.0}, false, 1000.0);
  CHECK(curve[1].term_gen == doctest::Approx(curve[0].term_gen / 2.0).epsilon(1e-12));
  CHECK(curve[0].term_opt == doctest::Approx(curve[1].term_opt).epsilon(1e-12));
  CHECK_THROWS_AS((void)table_rate_curves(logistic, 0.5, {}, true, 1.0), std::invalid_argument);
}

TEST_CASE("experiment config JSON round trip and eta auto") {
  ExperimentConfig config;
  config.loss_spec = {{"family", "superexp"}, {"alpha", 2.0}, {"delta", 0.25}};
  config.dim = 10;
  config.count = 64;
  config.gamma = 0.3;
  config.seed = 9;
  config.method = StepMethod::StochasticGradientDescent;
  config.steps = 500;
  config.replicates = 7;
  config.test_draws = 1234;
  config.epsilon_mode = EpsilonMode::GridMin;
  config.workers = 3;
  const nlohmann::json j = config.to_json();
  CHECK(j.at("optimizer").at("eta") == "auto");
  const ExperimentConfig back = ExperimentConfig::from_json(j);
  CHECK(back.dim == 10);
  CHECK(back.count == 64);
  CHECK(back.method == StepMethod::StochasticGradientDescent);
  CHECK(!back.step_size.has_value());
  CHECK(back.replicates == 7);
  CHECK(back.epsilon_mode == EpsilonMode::GridMin);
  CHECK_THROWS(ExperimentConfig::from_json({{"optimizer", {{"eta", "fast"}}}}));
}

TEST_CASE("worst_opt_bound_excess flags risks above the bound") {
  const LossModel logistic = LossModel::logistic();
  // A mean risk of l(0) can never beat the for-all-eps bound at eps -> l(0).
  CHECK(worst_opt_bound_excess(logistic, 0.25, 0.5, 1000, 1e-9, 50, false) < 0.0);
  CHECK(worst_opt_bound_excess(logistic, 0.25, 0.5, 1000, 100.0, 50, false) > 0.0);
}
