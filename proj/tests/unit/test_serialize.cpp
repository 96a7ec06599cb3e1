#include <doctest.h>

#include "uqsa/benchmarks.hpp"
#include "uqsa/error.hpp"
#include "uqsa/serialize.hpp"

using namespace uqsa;

TEST_CASE("input model round trip keeps every law and its parameters") {
  const InputModel in({Marginal::uniform(-2, 3), Marginal::gaussian(1, 0.5), Marginal::lognormal(2, 0.3),
                       Marginal::gumbel(5, 1.5), Marginal::gamma(2.5), Marginal::beta(0.5, -0.3)},
                      {"a", "b", "c", "d", "e", "f"});
  const InputModel back = input_model_from_json(Json::parse(input_model_to_json(in).dump()));
  REQUIRE(back.dim() == 6);
  CHECK(back.names() == in.names());
  for (int i = 0; i < 6; ++i) {
    CHECK(back.marginal(i).tag() == in.marginal(i).tag());
    for (double q : {0.01, 0.3, 0.77})
      CHECK(back.marginal(i).quantile(q) == in.marginal(i).quantile(q));
  }
  CHECK_THROWS_AS(marginal_from_json(Json{{"law", "cauchy"}}), Error);
}

TEST_CASE("trend specs") {
  CHECK(trend_from_json("constant", 3).size() == 1);
  CHECK(trend_from_json("linear", 3).size() == 4);
  CHECK(trend_from_json(Json::parse("[[0,0],[1,2]]"), 2).size() == 2);
  CHECK_THROWS_AS(trend_from_json(Json::parse("[[0,0,0]]"), 2), Error);
  CHECK_THROWS_AS(trend_from_json("cubic", 2), Error);
}

TEST_CASE("pce model round trip predicts bit-identically") {
  const auto c = benchmark("ishigami");
  const auto x = sample(c.input, 200, SamplingMethod::lhs, 5).points;
  const Eigen::VectorXd y = c.evaluator(x);
  PceModel m = adaptive_fit_pce(c.input, x, y, default_families(c.input), 2, 6);
  m.set_design_seed(5);
  const PceModel back = PceSerializer::from_json(Json::parse(PceSerializer::to_json(m).dump()));
  const auto probe = sample(c.input, 50, SamplingMethod::mc, 9).points;
  CHECK((back.predict_rows(probe) - m.predict_rows(probe)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.selected_degree() == m.selected_degree());
  CHECK(back.loo_error() == m.loo_error());
  CHECK(back.design_seed() == 5);
  CHECK(back.degree_trials().size() == m.degree_trials().size());
}

TEST_CASE("gp model round trip reconditions to the same predictor") {
  const auto c = benchmark("ishigami");
  const auto x = sample(c.input, 40, SamplingMethod::lhs, 6).points;
  const Eigen::VectorXd y = c.evaluator(x);
  GpFitOptions opt;
  opt.starts = 3;
  const GpModel gp = fit_gp(x, y, TrendSpec::linear(3), Kernel{}, opt);
  const GpModel back = GpSerializer::from_json(Json::parse(GpSerializer::to_json(gp).dump()));
  CHECK(back.sigma2() == gp.sigma2());
  CHECK(back.kernel().lengthscales == gp.kernel().lengthscales);
  CHECK(back.trace().starts.size() == 3);
  const auto probe = sample(c.input, 30, SamplingMethod::mc, 10).points;
  const auto [m0, v0] = gp.predict_rows(probe);
  const auto [m1, v1] = back.predict_rows(probe);
  CHECK((m0 - m1).cwiseAbs().maxCoeff() < 1e-9 * (1.0 + m0.cwiseAbs().maxCoeff()));
  CHECK((v0 - v1).cwiseAbs().maxCoeff() < 1e-9 * gp.sigma2());
}
