#include <doctest.h>

#include <cmath>
#include <numbers>

#include "uqsa/benchmarks.hpp"
#include "uqsa/error.hpp"
#include "uqsa/pce.hpp"

using namespace uqsa;

namespace {

MultivariateBasis legendre_basis(int d, int p) {
  return MultivariateBasis(std::vector<PolynomialFamily>(static_cast<std::size_t>(d), PolynomialFamily::legendre()),
                           enumerate_total_degree(d, p));
}

}  // namespace

TEST_CASE("polynomial target inside the span is reproduced") {
  const auto input = InputModel::iid(1, Marginal::uniform(-1, 1));
  const auto x = sample(input, 50, SamplingMethod::lhs, 1).points;
  const Eigen::VectorXd y = x.col(0).array().square();
  const auto model = fit_pce(input, x, y, legendre_basis(1, 2));
  CHECK(model.coefficients()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
  CHECK(model.empirical_error() < 1e-20);
  CHECK(model.predict(Eigen::VectorXd::Constant(1, 0.3)) == doctest::Approx(0.09).epsilon(1e-12));
}

TEST_CASE("constant responses") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 30, SamplingMethod::lhs, 2).points;
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(30, 4.5);
  const auto basis = legendre_basis(2, 3);
  const auto model = fit_pce(input, x, y, basis);
  CHECK(model.coefficients()[0] == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(model.coefficients().tail(basis.size() - 1).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(loo_error_explicit(input, x, y, basis) < 1e-20);
}

TEST_CASE("fit errors") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto basis = legendre_basis(2, 3);  // 10 terms
  const auto x = sample(input, 9, SamplingMethod::lhs, 3).points;
  CHECK_THROWS_AS(fit_pce(input, x, Eigen::VectorXd::Zero(9), basis), Error);
  try {
    fit_pce(input, x, Eigen::VectorXd::Zero(9), basis);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::underdetermined);
  }
  // Rank deficient: all design points share x2.
  Eigen::MatrixXd xr = sample(input, 40, SamplingMethod::lhs, 4).points;
  xr.col(1).setConstant(0.3);
  try {
    fit_pce(input, xr, xr.col(0), basis);
    FAIL("expected ill_posed");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ill_posed);
  }
}

TEST_CASE("interpolation regime makes the LOO error degenerate") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto basis = legendre_basis(2, 2);  // 6 terms
  const auto x = sample(input, 6, SamplingMethod::lhs, 5).points;
  const Eigen::VectorXd y = x.col(0).array().exp();
  const auto model = fit_pce(input, x, y, basis);
  CHECK(model.loo_degenerate());
  CHECK_THROWS_AS(model.loo_error(), Error);
  CHECK_THROWS_AS(loo_error_explicit(input, x, y, basis), Error);
}

TEST_CASE("closed-form LOO equals explicit refits") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + static_cast<int>(rng.below(3));
    const int p = 1 + static_cast<int>(rng.below(3));
    const auto basis = legendre_basis(d, p);
    const int n = std::min<int>(60, static_cast<int>(basis.size()) + 5 + static_cast<int>(rng.below(40)));
    const auto input = InputModel::iid(d, Marginal::uniform(-1, 2));
    const auto x = sample(input, n, SamplingMethod::mc, rng.below(1u << 30)).points;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = std::sin(3 * x(i, 0)) + x.row(i).squaredNorm() + 0.1 * rng.normal();
    const auto model = fit_pce(input, x, y, basis);
    CHECK(model.loo_error() == doctest::Approx(loo_error_explicit(input, x, y, basis)).epsilon(1e-8));
    CHECK(model.hat_diagonal().sum() == doctest::Approx(static_cast<double>(basis.size())).epsilon(1e-10));
  }
}

TEST_CASE("adaptive degree selection") {
  const auto input = InputModel::iid(2, Marginal::uniform(-1, 1));
  const auto x = sample(input, 200, SamplingMethod::lhs, 8).points;
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) y[i] = std::pow(x(i, 0), 3) - 2 * x(i, 0) * x(i, 1) + 0.5;
  const auto model = adaptive_fit_pce(input, x, y, default_families(input), 1, 6);
  CHECK(*model.selected_degree() >= 3);
  CHECK(model.degree_trials().size() == 6);
  const Eigen::Vector2d probe(0.3, -0.7);
  CHECK(model.predict(probe) == doctest::Approx(0.027 + 0.42 + 0.5).epsilon(1e-8));

  const auto g = InputModel::iid(15, Marginal::uniform(0, 1));
  const auto xs = sample(g, 60, SamplingMethod::lhs, 9).points;
  try {
    adaptive_fit_pce(g, xs, Eigen::VectorXd::Zero(60), default_families(g), 3, 8);
    FAIL("expected underdetermined");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::underdetermined);
  }
}

TEST_CASE("moments and sobol indices from coefficients") {
  const auto input = InputModel::iid(2, Marginal::uniform(-1, 1));
  const auto basis = legendre_basis(2, 2);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  c[0] = 5;
  {
    const PceModel m(input, basis, c);
    CHECK(moments(m).mean == 5.0);
    CHECK(moments(m).variance == 0.0);
    CHECK_THROWS_AS(sobol_indices(m, SobolRequest::first_order), Error);
  }
  c.setZero();
  c[basis.indices().find({1, 0})] = 1.0;
  c[basis.indices().find({0, 2})] = 1.0;
  {
    const PceModel m(input, basis, c);
    CHECK(moments(m).mean == 0.0);
    CHECK(moments(m).variance == doctest::Approx(2.0));
  }
  c[basis.indices().find({1, 1})] = std::sqrt(2.0);
  const PceModel m(input, basis, c);
  const auto first = sobol_indices(m, SobolRequest::first_order);
  const auto total = sobol_indices(m, SobolRequest::total);
  CHECK(first.at({0}, IndexType::first).estimate == doctest::Approx(0.25));
  CHECK(first.at({1}, IndexType::first).estimate == doctest::Approx(0.25));
  CHECK(total.at({0}, IndexType::total).estimate == doctest::Approx(0.75));
  CHECK(sobol_indices(m, SobolRequest::subset, {0, 1}).at({0, 1}, IndexType::partial).estimate == doctest::Approx(0.5));
  const auto all = sobol_indices(m, SobolRequest::all_subsets);
  double sum = 0;
  for (const auto& e : all.entries) sum += e.estimate;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(all.at({0, 1}, IndexType::partial).estimate == doctest::Approx(0.5));
}

TEST_CASE("ishigami fit at n = 500") {
  const auto c = benchmark("ishigami");
  const auto x = sample(c.input, 500, SamplingMethod::lhs, 2024).points;
  const Eigen::VectorXd y = c.evaluator(x);
  const auto model = adaptive_fit_pce(c.input, x, y, default_families(c.input), 3, 8);
  CHECK(*model.selected_degree() >= 6);
  CHECK(model.normalized_loo_error() < 0.01);
  const auto exact = ishigami_indices();
  CHECK(moments(model).variance == doctest::Approx(exact.variance).epsilon(0.02));
  const auto s = sobol_indices(model, SobolRequest::first_order).first_order(3);
  CHECK(std::abs(s[0] - 0.3138) < 0.01);
  CHECK(std::abs(s[1] - 0.4424) < 0.01);
  CHECK(std::abs(s[2]) < 0.01);
  const auto t = sobol_indices(model, SobolRequest::total).total(3);
  for (int i = 0; i < 3; ++i) CHECK(s[static_cast<std::size_t>(i)] <= t[static_cast<std::size_t>(i)] + 1e-15);
}

TEST_CASE("refit on own predictions and row permutation") {
  const auto input = InputModel({Marginal::gaussian(1, 2), Marginal::uniform(0, 3)});
  const auto x = sample(input, 80, SamplingMethod::lhs, 10).points;
  Eigen::VectorXd y(80);
  for (int i = 0; i < 80; ++i) y[i] = std::exp(0.2 * x(i, 0)) * std::cos(x(i, 1));
  const MultivariateBasis basis(default_families(input), enumerate_total_degree(2, 4));
  const auto m1 = fit_pce(input, x, y, basis);
  const auto m2 = fit_pce(input, x, m1.predict_rows(x), basis);
  CHECK((m1.coefficients() - m2.coefficients()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(80);
  perm.setIdentity();
  std::reverse(perm.indices().data(), perm.indices().data() + 80);
  const auto m3 = fit_pce(input, perm * x, perm * y, basis);
  CHECK((m1.coefficients() - m3.coefficients()).cwiseAbs().maxCoeff() < 1e-12);
}
