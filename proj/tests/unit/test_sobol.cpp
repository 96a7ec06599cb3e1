#include <doctest.h>

#include <cmath>

#include "uqsa/benchmarks.hpp"
#include "uqsa/error.hpp"
#include "uqsa/sobol.hpp"

using namespace uqsa;

namespace {

Evaluator additive() {
  return pointwise([](const Eigen::Ref<const Eigen::VectorXd>& x) { return x[0] + 2 * x[1]; });
}

}  // namespace

TEST_CASE("additive model") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto s2 = pick_freeze_first_order(additive(), input, {1}, 1000000, 1);
  CHECK(std::abs(s2.estimate - 0.8) < 0.01);
  CHECK(s2.mc_stderr > 0.0);
  CHECK(s2.mc_stderr < 0.003);
  const auto t2 = pick_freeze_total(additive(), input, 1, 1000000, 2);
  CHECK(std::abs(t2.estimate - 0.8) < 0.01);
  const auto r = pick_freeze_indices(additive(), input, 100000, 3, {0, 1}, {0, 1});
  const double sum = r.at({0}, IndexType::first).estimate + r.at({1}, IndexType::first).estimate;
  const double se = std::hypot(r.at({0}, IndexType::first).mc_stderr, r.at({1}, IndexType::first).mc_stderr);
  CHECK(std::abs(sum - 1.0) < 3 * se + 1e-3);
}

TEST_CASE("variable absent from the model") {
  const auto input = InputModel::iid(3, Marginal::uniform(0, 1));
  const auto e = pointwise([](const Eigen::Ref<const Eigen::VectorXd>& x) { return std::exp(x[0]) * x[1]; });
  const auto t = pick_freeze_total(e, input, 2, 20000, 4);
  CHECK(t.estimate == 0.0);
  const auto s = pick_freeze_first_order(e, input, {2}, 20000, 4);
  CHECK(std::abs(s.estimate) < 3 * s.mc_stderr + 1e-3);
}

TEST_CASE("ishigami pick-freeze") {
  const auto c = benchmark("ishigami");
  const auto s3 = pick_freeze_first_order(c.evaluator, c.input, {2}, 1000000, 5);
  CHECK(std::abs(s3.estimate) < 0.01);
  const auto t3 = pick_freeze_total(c.evaluator, c.input, 2, 1000000, 6);
  CHECK(std::abs(t3.estimate - ishigami_indices().total[2]) < 0.01);
  CHECK(std::abs(ishigami_indices().total[2] - 0.244) < 0.001);
}

TEST_CASE("estimators match their direct formulas") {
  Rng rng(7);
  Eigen::VectorXd y(1000), ya(1000);
  for (int i = 0; i < 1000; ++i) {
    y[i] = rng.normal();
    ya[i] = 0.6 * y[i] + 0.8 * rng.normal();
  }
  const auto a = first_order_from_pairs(y, ya);
  // Direct evaluation of the formula, with and without an offset of the outputs.
  for (double offset : {0.0, 2.5, -4.0}) {
    const Eigen::VectorXd ys = (y.array() + offset).matrix(), yas = (ya.array() + offset).matrix();
    const double m = 0.5 * (ys.mean() + yas.mean());
    const double direct = (ys.dot(yas) / 1000 - m * m) / (ys.squaredNorm() / 1000 - m * m);
    CHECK(first_order_from_pairs(ys, yas).estimate == doctest::Approx(direct).epsilon(1e-11));
  }
  const double mu = 0.5 * (y.mean() + ya.mean());
  const double jansen = 0.5 * (y - ya).squaredNorm() / 1000;
  const double pooled = 0.5 * (y.squaredNorm() + ya.squaredNorm()) / 1000 - mu * mu;
  CHECK(total_from_pairs(y, ya).estimate == doctest::Approx(jansen / pooled).epsilon(1e-12));
}

TEST_CASE("errors") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto constant = pointwise([](const Eigen::Ref<const Eigen::VectorXd>&) { return 3.0; });
  try {
    pick_freeze_first_order(constant, input, {0}, 100, 1);
    FAIL("expected degenerate");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate);
  }
  CHECK_THROWS_AS(pick_freeze_first_order(additive(), input, {0, 1}, 100, 1), Error);
  CHECK_THROWS_AS(pick_freeze_first_order(additive(), input, {}, 100, 1), Error);
  CHECK_THROWS_AS(pick_freeze_first_order(additive(), input, {0}, 1, 1), Error);
}

TEST_CASE("bit-identical under fixed seed") {
  const auto c = benchmark("ishigami");
  const auto a = pick_freeze_indices(c.evaluator, c.input, 50000, 11, {0, 1, 2}, {0, 1, 2});
  const auto b = pick_freeze_indices(c.evaluator, c.input, 50000, 11, {0, 1, 2}, {0, 1, 2});
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(a.entries[i].estimate == b.entries[i].estimate);
}

TEST_CASE("gp_sobol") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 200, SamplingMethod::lhs, 8).points;
  const Eigen::VectorXd y = x.col(0) + 2 * x.col(1);
  Kernel k;
  k.family = KernelFamily::matern52;
  GpFitOptions opt;
  opt.seed = 1;
  const auto gp = fit_gp(x, y, TrendSpec::constant(2), k, opt);
  const auto r = gp_sobol(gp, input, {1}, 2000, 20, 3);
  const auto& e = r.at({1}, IndexType::first);
  CHECK(e.std < 0.01);
  CHECK(e.realizations == 20);
  CHECK(e.estimator == "gp_realizations");
  const auto all = gp_sobol_first_orders(gp, input, 2000, 20, 3);
  CHECK(std::abs(all.at({1}, IndexType::first).estimate - 0.8) < 0.05);

  // Zero kernel variance: every realization is the mean, so the spread vanishes.
  Kernel k0 = gp.kernel();
  k0.variance = 0.0;
  const auto x0 = sample(input, 20, SamplingMethod::lhs, 9).points;
  const auto g0 = GpModel::condition(x0, (x0.col(0) + 2 * x0.col(1)).eval(), TrendSpec::linear(2), k0, false);
  CHECK(gp_sobol(g0, input, {0}, 500, 5, 4).at({0}, IndexType::first).std == 0.0);
  CHECK_THROWS_AS(gp_sobol(gp, input, {1}, 100, 1, 3), Error);
}

TEST_CASE("main effects") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 60, SamplingMethod::lhs, 10).points;
  const Eigen::VectorXd y = x.col(0).array().square().matrix() + 2 * x.col(1);
  Kernel k;
  k.family = KernelFamily::matern52;
  const auto gp = fit_gp(x, y, TrendSpec::constant(2), k);
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto me = main_effects(gp, input, 0, grid, 30, 2000, 5);
  REQUIRE(me.size() == 5);
  // Parallel to x1^2 up to the constant E[2 x2] = 1.
  for (const auto& p : me) {
    CHECK(std::abs(p.mean - (p.value * p.value + 1.0)) < 0.05);
    CHECK(p.lower <= p.mean);
    CHECK(p.upper >= p.mean);
  }
  CHECK_THROWS_AS(main_effects(gp, input, 0, {1.5}, 30, 100, 5), Error);
}
