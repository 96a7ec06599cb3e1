#include <doctest.h>

#include <cmath>
#include <numbers>

#include "uqsa/distributions.hpp"
#include "uqsa/error.hpp"
#include "uqsa/gp.hpp"

using namespace uqsa;

namespace {

Kernel make_kernel(KernelFamily f, KernelMode mode, Eigen::VectorXd theta, double var = 1.0, double gamma = 1.0) {
  Kernel k;
  k.family = f;
  k.mode = mode;
  k.lengthscales = std::move(theta);
  k.variance = var;
  k.gamma = gamma;
  return k;
}

const std::vector<KernelFamily> kStationary = {KernelFamily::squared_exponential, KernelFamily::matern12,
                                               KernelFamily::matern32, KernelFamily::matern52};

Eigen::VectorXd toy(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = std::sin(3 * x(i, 0)) + x(i, 1) * x(i, 1) - 0.5 * x(i, 0) * x(i, 1);
  return y;
}

// Universal kriging through the bordered system [[R, F], [F^T, 0]].
struct DenseOracle {
  Eigen::MatrixXd x, f;
  Eigen::VectorXd y;
  Kernel k;
  TrendSpec trend;
  Eigen::FullPivLU<Eigen::MatrixXd> lu;
  double sigma2;

  DenseOracle(Eigen::MatrixXd x_, Eigen::VectorXd y_, Kernel k_, TrendSpec t)
      : x(std::move(x_)), y(std::move(y_)), k(std::move(k_)), trend(std::move(t)) {
    f = trend.matrix(x);
    const auto n = x.rows(), p = f.cols();
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) r(i, j) = k.correlation(x.row(i).transpose(), x.row(j).transpose());
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(n + p, n + p);
    big.topLeftCorner(n, n) = r;
    big.topRightCorner(n, p) = f;
    big.bottomLeftCorner(p, n) = f.transpose();
    lu.compute(big);
    const Eigen::MatrixXd rinv = r.inverse();
    const Eigen::VectorXd beta = (f.transpose() * rinv * f).inverse() * (f.transpose() * rinv * y);
    sigma2 = (y - f * beta).dot(rinv * (y - f * beta)) / static_cast<double>(n - p);
  }
  Eigen::VectorXd rhs(const Eigen::VectorXd& p) const {
    Eigen::VectorXd v(x.rows() + f.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) v[i] = k.correlation(x.row(i).transpose(), p);
    v.tail(f.cols()) = trend.eval(p);
    return v;
  }
  double mean(const Eigen::VectorXd& p) const { return lu.solve(rhs(p)).head(x.rows()).dot(y); }
  double cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return sigma2 * (k.correlation(a, b) - rhs(a).dot(lu.solve(rhs(b))));
  }
};

}  // namespace

TEST_CASE("kernel closed forms") {
  const Eigen::Vector2d x(0.3, -1.0);
  for (auto fam : {KernelFamily::squared_exponential, KernelFamily::matern12, KernelFamily::matern32,
                   KernelFamily::matern52, KernelFamily::gamma_exponential}) {
    const auto k = make_kernel(fam, KernelMode::isotropic, Eigen::VectorXd::Constant(1, 0.7), 2.5, 1.5);
    CHECK(kernel_eval(k, x, x) == doctest::Approx(2.5));
    const Eigen::Vector2d y(0.9, 0.2);
    CHECK(kernel_eval(k, x, y) == doctest::Approx(kernel_eval(k, y, x)));
  }
  const Eigen::Vector2d h(0.6, 0.8);  // |h| = 1
  const Eigen::Vector2d zero(0, 0);
  auto se = make_kernel(KernelFamily::squared_exponential, KernelMode::isotropic, Eigen::VectorXd::Constant(1, 1.0), 3.0);
  CHECK(kernel_eval(se, zero, h) == doctest::Approx(3.0 * std::exp(-0.5)));
  auto m12 = make_kernel(KernelFamily::matern12, KernelMode::isotropic, Eigen::VectorXd::Constant(1, 1.0), 3.0);
  CHECK(kernel_eval(m12, zero, h) == doctest::Approx(3.0 * std::exp(-1.0)));
  auto bad = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(1.0, 0.0));
  CHECK_THROWS_AS(kernel_eval(bad, zero, h), Error);
}

TEST_CASE("tensorized kernels") {
  const Eigen::Vector2d a(0.1, 0.2), b(0.7, -0.4), theta(0.5, 2.0);
  const double h1 = 0.6 / 0.5, h2 = 0.6 / 2.0;
  auto se = make_kernel(KernelFamily::squared_exponential, KernelMode::tensorized, theta);
  CHECK(se.correlation(a, b) == doctest::Approx(std::exp(-0.5 * h1 * h1) * std::exp(-0.5 * h2 * h2)));
  auto ge = make_kernel(KernelFamily::gamma_exponential, KernelMode::tensorized, theta, 1.0, 1.3);
  CHECK(ge.correlation(a, b) == doctest::Approx(std::exp(-std::pow(h1, 1.3) - std::pow(h2, 1.3))));
  auto m52 = make_kernel(KernelFamily::matern52, KernelMode::tensorized, theta);
  auto m52_1d = [](double h) {
    const double t = std::sqrt(5.0) * h;
    return (1 + t + t * t / 3) * std::exp(-t);
  };
  CHECK(m52.correlation(a, b) == doctest::Approx(m52_1d(h1) * m52_1d(h2)));
  auto m12 = make_kernel(KernelFamily::matern12, KernelMode::tensorized, theta);
  CHECK(m12.correlation(a, b) == doctest::Approx(std::exp(-h1 - h2)));
  auto m52_iso = make_kernel(KernelFamily::matern52, KernelMode::isotropic, Eigen::VectorXd::Constant(1, 0.5));
  CHECK(m52_iso.correlation(a, b) == doctest::Approx(m52_1d(std::hypot(0.6, 0.6) / 0.5)));
  // Matrix form agrees with the pointwise form.
  Eigen::MatrixXd pa(2, 2), pb(3, 2);
  pa << 0.1, 0.2, 0.5, 0.5;
  pb << 0.7, -0.4, 0, 0, 1, 1;
  for (auto* k : {&se, &ge, &m52, &m12, &m52_iso}) {
    const auto m = k->correlation_matrix(pa, pb);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) CHECK(m(i, j) == doctest::Approx(k->correlation(pa.row(i).transpose(), pb.row(j).transpose())));
  }
}

TEST_CASE("gram matrices are positive semi-definite") {
  Rng rng(3);
  Eigen::MatrixXd x(40, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
  for (auto fam : {KernelFamily::squared_exponential, KernelFamily::matern12, KernelFamily::matern32,
                   KernelFamily::matern52, KernelFamily::gamma_exponential})
    for (auto mode : {KernelMode::isotropic, KernelMode::tensorized}) {
      const auto k = make_kernel(fam, mode, mode == KernelMode::isotropic ? Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.4))
                                                                          : Eigen::VectorXd(Eigen::Vector3d(0.3, 0.6, 1.0)), 1.0, 1.7);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k.correlation_matrix(x, x));
      CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("mean and variance against the dense bordered-system oracle") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 25, SamplingMethod::lhs, 12).points;
  const Eigen::VectorXd y = toy(x);
  const auto probes = sample(input, 100, SamplingMethod::mc, 13).points;
  for (auto fam : kStationary)
    for (const auto& trend : {TrendSpec::constant(2), TrendSpec::linear(2)}) {
      const auto k = make_kernel(fam, KernelMode::tensorized, Eigen::Vector2d(0.35, 0.5));
      const auto gp = GpModel::condition(x, y, trend, k);
      const DenseOracle oracle(x, y, k, trend);
      CHECK(gp.sigma2() == doctest::Approx(oracle.sigma2).epsilon(1e-10));
      const auto [m, v] = gp.predict_rows(probes);
      for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd p = probes.row(i).transpose();
        CHECK(m[i] == doctest::Approx(oracle.mean(p)).epsilon(1e-8));
        CHECK(v[i] == doctest::Approx(oracle.cov(p, p)).epsilon(1e-8).scale(gp.sigma2() * 1e-4));
      }
      const Eigen::VectorXd a = probes.row(0).transpose(), b = probes.row(1).transpose();
      CHECK(gp.predict_cov(a, b) == doctest::Approx(oracle.cov(a, b)).epsilon(1e-8).scale(gp.sigma2() * 1e-4));
      CHECK(gp.predict_mean_rows(probes).isApprox(m, 1e-10));
    }
}

TEST_CASE("interpolation, zero variance and PSD posterior covariance") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 30, SamplingMethod::lhs, 14).points;
  const Eigen::VectorXd y = toy(x);
  const auto probes = sample(input, 20, SamplingMethod::mc, 15).points;
  for (auto fam : kStationary) {
    CAPTURE(to_string(fam));
    const auto gp = GpModel::condition(x, y, TrendSpec::constant(2),
                                       make_kernel(fam, KernelMode::tensorized, Eigen::Vector2d(0.3, 0.4)));
    const auto [m, v] = gp.predict_rows(x);
    for (int i = 0; i < 30; ++i) {
      CHECK(m[i] == doctest::Approx(y[i]).epsilon(1e-6));
      CHECK(v[i] <= 1e-6 * gp.sigma2());
      CHECK(std::abs(gp.predict_cov(x.row(i).transpose(), probes.row(0).transpose())) <= 1e-6 * gp.sigma2());
    }
    const Eigen::MatrixXd c = gp.posterior_cov(probes, probes);
    CHECK((c - c.transpose()).cwiseAbs().maxCoeff() < 1e-12 * gp.sigma2());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (c + c.transpose()));
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * gp.sigma2());
    const Eigen::VectorXd pv = gp.predict_rows(probes).second;
    CHECK(c.diagonal().isApprox(pv, 1e-10));

    // Far field reverts to the prior, inflated by the trend uncertainty.
    const Eigen::Vector2d far(0.5 + 10 * 0.4 * 10, 0.5);
    CHECK(gp.predict(far).variance >= 0.99 * gp.sigma2());
  }
}

TEST_CASE("exact linear data") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 15, SamplingMethod::lhs, 16).points;
  const Eigen::VectorXd y = (1.5 - 2.0 * x.col(0).array() + 0.5 * x.col(1).array()).matrix();
  const auto gp = fit_gp(x, y, TrendSpec::linear(2), make_kernel(KernelFamily::matern52, KernelMode::tensorized, {}));
  CHECK(gp.beta()[0] == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(gp.beta()[1] == doctest::Approx(-2.0).epsilon(1e-8));
  CHECK(gp.beta()[2] == doctest::Approx(0.5).epsilon(1e-8));
  const double vy = (y.array() - y.mean()).square().sum() / 14.0;
  CHECK(gp.sigma2() < 1e-12 * vy);
}

TEST_CASE("1D sine, n = 20 LHS") {
  const auto input = InputModel::iid(1, Marginal::uniform(0, 1));
  const auto x = sample(input, 20, SamplingMethod::lhs, 17).points;
  const Eigen::VectorXd y = (2 * std::numbers::pi * x.col(0).array()).sin().matrix();
  for (auto est : {HyperEstimator::max_likelihood, HyperEstimator::loo_cv}) {
    GpFitOptions opt;
    opt.estimator = est;
    opt.seed = 4;
    const auto gp = fit_gp(x, y, TrendSpec::constant(1), make_kernel(KernelFamily::matern52, KernelMode::tensorized, {}), opt);
    const auto xt = sample(input, 1000, SamplingMethod::mc, 18).points;
    const Eigen::VectorXd yt = (2 * std::numbers::pi * xt.col(0).array()).sin().matrix();
    const Eigen::VectorXd pt = gp.predict_mean_rows(xt);
    const double q2 = 1.0 - (yt - pt).squaredNorm() / (yt.array() - yt.mean()).square().sum();
    CHECK(q2 > 0.99);
    CHECK(gp.trace().starts.size() == 10);
    // Deterministic given the seed.
    const auto again = fit_gp(x, y, TrendSpec::constant(1), make_kernel(KernelFamily::matern52, KernelMode::tensorized, {}), opt);
    CHECK(again.kernel().lengthscales == gp.kernel().lengthscales);
  }
}

TEST_CASE("fit errors") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 0.5, 0.5, 1.0;
  const Eigen::Vector4d y(1, 2, 2, 3);
  const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::VectorXd::Constant(1, 0.3));
  try {
    fit_gp(x, y, TrendSpec::constant(1), k);
    FAIL("expected ill_conditioned");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ill_conditioned);
  }
  Eigen::MatrixXd x2(4, 2);
  x2 << 0, 1, 0.3, 1, 0.6, 1, 0.9, 1;
  try {
    fit_gp(x2, y, TrendSpec::linear(2), make_kernel(KernelFamily::matern52, KernelMode::tensorized, {}));
    FAIL("expected trend error");
  } catch (const Error& e) {
    CHECK((e.kind() == ErrorKind::trend || e.kind() == ErrorKind::degenerate));
  }
  Eigen::MatrixXd x3(4, 2);
  x3 << 0, 1, 0.3, 0.2, 0.6, 0.9, 0.9, 0.1;
  try {
    GpModel::condition(x3, y, TrendSpec({{0, 0}, {0, 0}}), make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(1, 1)));
    FAIL("expected trend error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::trend);
  }
}

TEST_CASE("translation and scaling of the responses") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 20, SamplingMethod::lhs, 19).points;
  const Eigen::VectorXd y = toy(x);
  const auto k = make_kernel(KernelFamily::matern32, KernelMode::tensorized, Eigen::Vector2d(0.4, 0.6));
  const auto probes = sample(input, 10, SamplingMethod::mc, 20).points;
  const auto g0 = GpModel::condition(x, y, TrendSpec::constant(2), k);
  const auto g1 = GpModel::condition(x, (y.array() + 3.7).matrix(), TrendSpec::constant(2), k);
  const auto g2 = GpModel::condition(x, 2.5 * y, TrendSpec::constant(2), k);
  const auto [m0, v0] = g0.predict_rows(probes);
  const auto [m1, v1] = g1.predict_rows(probes);
  const auto [m2, v2] = g2.predict_rows(probes);
  for (int i = 0; i < 10; ++i) {
    CHECK(std::abs(m1[i] - m0[i] - 3.7) < 1e-10);
    CHECK(std::abs(v1[i] - v0[i]) < 1e-10 * g0.sigma2());
    CHECK(std::abs(m2[i] - 2.5 * m0[i]) < 1e-10 * std::max(1.0, std::abs(m0[i])));
    CHECK(std::abs(v2[i] - 6.25 * v0[i]) < 1e-10 * g2.sigma2());
  }
}

TEST_CASE("closed-form LOO residuals equal explicit refits") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 18, SamplingMethod::lhs, 21).points;
  const Eigen::VectorXd y = toy(x);
  for (const auto& trend : {TrendSpec::constant(2), TrendSpec::linear(2)}) {
    const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(0.3, 0.5));
    const auto gp = GpModel::condition(x, y, trend, k);
    const Eigen::VectorXd loo = gp.loo_residuals();
    for (int i = 0; i < 18; ++i) {
      Eigen::MatrixXd xi(17, 2);
      Eigen::VectorXd yi(17);
      for (int r = 0, s = 0; r < 18; ++r)
        if (r != i) {
          xi.row(s) = x.row(r);
          yi[s++] = y[r];
        }
      const auto sub = GpModel::condition(xi, yi, trend, k, false);
      CHECK(loo[i] == doctest::Approx(y[i] - sub.predict(x.row(i).transpose()).mean).epsilon(1e-8));
    }
  }
}

TEST_CASE("noisy observations") {
  const auto input = InputModel::iid(1, Marginal::uniform(0, 1));
  const auto x = sample(input, 40, SamplingMethod::lhs, 22).points;
  Rng rng(23);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) y[i] = std::sin(6 * x(i, 0)) + 0.05 * rng.normal();
  GpFitOptions opt;
  opt.noise_std = Eigen::VectorXd::Constant(40, 0.05);
  const auto gp = fit_gp(x, y, TrendSpec::constant(1), make_kernel(KernelFamily::matern52, KernelMode::tensorized, {}), opt);
  CHECK(gp.noisy());
  // No longer interpolating: positive variance at the design points.
  const auto [m, v] = gp.predict_rows(x);
  CHECK(v.minCoeff() > 0.0);
  CHECK(v.maxCoeff() < 0.05 * 0.05 * 1.01);
  CHECK((m - y).cwiseAbs().maxCoeff() < 0.3);
  // Duplicate rows are allowed with noise.
  Eigen::MatrixXd xd(3, 1);
  xd << 0.2, 0.2, 0.8;
  const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::VectorXd::Constant(1, 0.3));
  const auto gd = GpModel::condition(xd, Eigen::Vector3d(1.0, 1.2, 0.0), TrendSpec::constant(1), k, false,
                                     Eigen::VectorXd::Constant(3, 0.1));
  CHECK(gd.predict(Eigen::VectorXd::Constant(1, 0.2)).mean == doctest::Approx(1.1).epsilon(0.1));
}

TEST_CASE("posterior sampling") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 15, SamplingMethod::lhs, 24).points;
  const Eigen::VectorXd y = toy(x);
  const auto gp = GpModel::condition(x, y, TrendSpec::constant(2),
                                     make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(0.3, 0.4)));
  const auto probes = sample(input, 5, SamplingMethod::mc, 25).points;
  const auto [m, v] = gp.predict_rows(probes);
  const Eigen::MatrixXd kn = gp.posterior_cov(probes, probes);

  for (auto method : {PosteriorSamplerOptions::Method::dense, PosteriorSamplerOptions::Method::spectral}) {
    PosteriorSamplerOptions o;
    o.method = method;
    CAPTURE(static_cast<int>(method));
    // Design points reproduce the data in every realization.
    const auto zx = gp.sample_posterior(x, 20, 1, o);
    for (int q = 0; q < 20; ++q)
      for (int i = 0; i < 15; ++i) CHECK(zx(i, q) == doctest::Approx(y[i]).epsilon(1e-6));

    const auto z = gp.sample_posterior(probes, 5000, 2, o);
    const auto z2 = gp.sample_posterior(probes, 2000, 3, o);
    const Eigen::VectorXd mean2 = z2.rowwise().mean();
    for (int i = 0; i < 5; ++i) CHECK(std::abs(mean2[i] - m[i]) < 4 * std::sqrt(v[i] / 2000));
    const Eigen::VectorXd mean = z.rowwise().mean();
    const Eigen::MatrixXd centered = z.colwise() - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose() / 4999.0;
    CHECK((cov - kn).norm() < 0.1 * kn.norm());
    // Same seed, same draws.
    CHECK(gp.sample_posterior(probes, 5, 9, o) == gp.sample_posterior(probes, 5, 9, o));
  }
}

TEST_CASE("spectral draws for every non-Gaussian family and mode") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 10, SamplingMethod::lhs, 26).points;
  const auto probes = sample(input, 4, SamplingMethod::mc, 27).points;
  for (auto fam : {KernelFamily::gamma_exponential, KernelFamily::matern12, KernelFamily::matern32, KernelFamily::matern52})
  for (auto mode : {KernelMode::isotropic, KernelMode::tensorized}) {
    CAPTURE(to_string(fam));
    CAPTURE(to_string(mode));
    const auto k = make_kernel(fam, mode,
                               mode == KernelMode::isotropic ? Eigen::VectorXd(Eigen::VectorXd::Constant(1, 0.4)) : Eigen::VectorXd(Eigen::Vector2d(0.3, 0.5)),
                               1.0, 1.4);
    const auto gp = GpModel::condition(x, toy(x), TrendSpec::constant(2), k);
    const Eigen::MatrixXd kn = gp.posterior_cov(probes, probes);
    PosteriorSamplerOptions o;
    o.method = PosteriorSamplerOptions::Method::spectral;
    const auto z = gp.sample_posterior(probes, 5000, 5, o);
    const Eigen::MatrixXd centered = z.colwise() - z.rowwise().mean();
    const Eigen::MatrixXd cov = centered * centered.transpose() / 4999.0;
    CHECK((cov - kn).norm() < 0.1 * kn.norm());
  }
}

TEST_CASE("update_realization") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  const auto x = sample(input, 12, SamplingMethod::lhs, 28).points;
  const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(0.3, 0.4));
  const auto gp = GpModel::condition(x, toy(x), TrendSpec::constant(2), k);
  Eigen::MatrixXd pts(2, 2);
  pts << 0.37, 0.61, 0.9, 0.15;  // test point, new point
  const double truth = toy(pts.row(1))[0];
  const auto z = gp.sample_posterior(pts, 5000, 4);
  Eigen::VectorXd updated(5000);
  for (int q = 0; q < 5000; ++q) {
    const Eigen::VectorXd u = gp.update_realization(pts, z.col(q), 1, truth);
    CHECK(u[1] == truth);
    updated[q] = u[0];
  }
  const Eigen::VectorXd same = gp.update_realization(pts, z.col(0), 1, z(1, 0));
  CHECK(same == z.col(0));

  Eigen::MatrixXd x2(13, 2);
  x2.topRows(12) = x;
  x2.row(12) = pts.row(1);
  Kernel k2 = k;
  k2.variance = gp.sigma2();
  Eigen::VectorXd y2(13);
  y2.head(12) = toy(x);
  y2[12] = truth;
  const auto refit = GpModel::condition(x2, y2, TrendSpec::constant(2), k2, false);
  const auto pred = refit.predict(pts.row(0).transpose());
  CHECK(std::abs(updated.mean() - pred.mean) < 4 * std::sqrt(pred.variance / 5000));
  const double var = (updated.array() - updated.mean()).square().sum() / 4999;
  CHECK(var == doctest::Approx(pred.variance).epsilon(0.1));

  CHECK_THROWS_AS(gp.update_realization(x.topRows(2), Eigen::Vector2d(0, 0), 0, 1.0), Error);
}

TEST_CASE("next_design_point") {
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 1.0;
  const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::VectorXd::Constant(1, 0.4));
  const auto gp = GpModel::condition(x, Eigen::Vector2d(0.0, 1.0), TrendSpec::constant(1), k);
  Eigen::MatrixXd cand(2, 1);
  cand << 0.0, 3.0;
  CHECK(gp.next_design_point(cand) == 1);
  CHECK(gp.next_design_point(x) == 0);
  Eigen::MatrixXd grid(101, 1);
  for (int i = 0; i <= 100; ++i) grid(i, 0) = i / 100.0;
  CHECK(std::abs(grid(gp.next_design_point(grid), 0) - 0.5) <= 0.01 + 1e-12);
}

TEST_CASE("linear trend on inputs of very different magnitudes") {
  const auto input = InputModel::iid(2, Marginal::uniform(0, 1));
  Eigen::MatrixXd x = sample(input, 25, SamplingMethod::lhs, 40).points;
  const Eigen::VectorXd y = toy(x);
  const auto k = make_kernel(KernelFamily::matern52, KernelMode::tensorized, Eigen::Vector2d(0.3, 0.4));
  const auto ref = GpModel::condition(x, y, TrendSpec::linear(2), k);
  Eigen::MatrixXd xs = x;
  xs.col(0) *= 2e11;
  xs.col(1) *= 1e-3;
  auto ks = k;
  ks.lengthscales = Eigen::Vector2d(0.3 * 2e11, 0.4 * 1e-3);
  const auto gp = GpModel::condition(xs, y, TrendSpec::linear(2), ks);
  const Eigen::Vector2d p(0.37, 0.52);
  const Eigen::Vector2d ps(0.37 * 2e11, 0.52 * 1e-3);
  CHECK(gp.predict(ps).mean == doctest::Approx(ref.predict(p).mean).epsilon(1e-8));
  CHECK(gp.predict(ps).variance == doctest::Approx(ref.predict(p).variance).epsilon(1e-6));
}
