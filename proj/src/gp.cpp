#include "uqsa/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "uqsa/error.hpp"
#include "uqsa/optim.hpp"
#include "uqsa/random.hpp"

namespace uqsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Jitter ladder relative to the mean diagonal.
constexpr double kJitterFirst = 1e-12;
constexpr double kJitterLast = 1e-6;

double matern_1d(KernelFamily f, double s) {
  switch (f) {
    case KernelFamily::matern12: return std::exp(-s);
    case KernelFamily::matern32: {
      const double t = std::sqrt(3.0) * s;
      return (1.0 + t) * std::exp(-t);
    }
    case KernelFamily::matern52: {
      const double t = std::sqrt(5.0) * s;
      return (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
    default: return 0.0;
  }
}

struct Factorization {
  Eigen::MatrixXd l;
  double jitter = 0.0;
};

// Cholesky with the jitter ladder 0, 1e-12, ..., 1e-6 (relative).
Factorization factor_with_jitter(const Eigen::MatrixXd& m) {
  const double scale = m.diagonal().mean();
  Eigen::LLT<Eigen::MatrixXd> llt;
  for (double j = 0.0; j <= kJitterLast * 1.0000001; j = (j == 0.0 ? kJitterFirst : j * 10.0)) {
    if (j == 0.0) {
      llt.compute(m);
    } else {
      Eigen::MatrixXd mj = m;
      mj.diagonal().array() += j * scale;
      llt.compute(mj);
    }
    if (llt.info() == Eigen::Success && (llt.matrixLLT().diagonal().array() > 0.0).all())
      return {llt.matrixL(), j};
  }
  fail(ErrorKind::numerical_breakdown,
       "covariance factorization failed even with the maximum jitter of 1e-6");
}

// Rank of F after scaling its columns to unit norm, so that inputs measured
// in very different units (moduli next to areas) do not look dependent.
bool full_column_rank(const Eigen::MatrixXd& f) {
  Eigen::MatrixXd g = f;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    const double nrm = g.col(j).norm();
    if (nrm == 0.0) return false;
    g.col(j) /= nrm;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(1e-12);
  qr.compute(g);
  return qr.rank() == g.cols();
}

// Everything needed to predict once M = L L^T is factorized.
struct Conditioned {
  Eigen::MatrixXd l, lf, rf;
  Eigen::VectorXi perm;
  Eigen::VectorXd beta, resid, alpha;
  double logdet_m = 0.0, logdet_g = 0.0, jitter = 0.0;
};

Conditioned condition_core(const Eigen::MatrixXd& m, const Eigen::MatrixXd& f, const Eigen::VectorXd& y) {
  Conditioned c;
  auto fac = factor_with_jitter(m);
  c.l = std::move(fac.l);
  c.jitter = fac.jitter;
  const auto lower = c.l.triangularView<Eigen::Lower>();
  c.lf = lower.solve(f);
  require(full_column_rank(c.lf), ErrorKind::trend, "trend matrix is rank deficient on the design");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(std::numeric_limits<double>::min());
  qr.compute(c.lf);
  c.rf = qr.matrixR().topLeftCorner(f.cols(), f.cols()).triangularView<Eigen::Upper>();
  c.perm = qr.colsPermutation().indices();
  const Eigen::VectorXd ly = lower.solve(y);
  c.beta = qr.solve(ly);
  c.resid = ly - c.lf * c.beta;
  c.alpha = c.l.transpose().triangularView<Eigen::Upper>().solve(c.resid);
  c.logdet_m = 2.0 * c.l.diagonal().array().log().sum();
  c.logdet_g = 2.0 * c.rf.diagonal().array().abs().log().sum();
  return c;
}

// Diagonal of the upper-left block of the inverse bordered matrix
// [[M, F], [F^T, 0]]^{-1}, i.e. M^{-1} - M^{-1} F G^{-1} F^T M^{-1}.
Eigen::VectorXd bordered_inverse_diagonal(const Conditioned& c) {
  const auto n = c.l.rows();
  const Eigen::MatrixXd linv =
      c.l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd diag = linv.colwise().squaredNorm().transpose();
  // B = M^{-1} F = L^{-T} L_f; H = B P R^{-1} has row norms b^T G^{-1} b.
  const Eigen::MatrixXd b = linv.transpose() * c.lf;
  Eigen::MatrixXd bp(n, c.lf.cols());
  for (Eigen::Index k = 0; k < c.perm.size(); ++k) bp.col(k) = b.col(c.perm[k]);
  const Eigen::MatrixXd h =
      c.rf.transpose().triangularView<Eigen::Lower>().solve(bp.transpose()).transpose();
  diag -= h.rowwise().squaredNorm();
  return diag;
}

double sample_variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
}

void check_no_duplicates(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  auto less = [&x](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) < x(b, j)) return true;
      if (x(a, j) > x(b, j)) return false;
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t i = 1; i < order.size(); ++i)
    require(less(order[i - 1], order[i]), ErrorKind::ill_conditioned,
            "duplicate design rows in noise-free data");
}

// Restricted log-likelihood criterion of sigma^2 for noisy data (up to constants):
// (n - p) log s2 + log|M| + log|G| + |L^{-1}(Y - F beta)|^2 / s2, M = R + Delta / s2.
struct NoisyVariance {
  double sigma2;
  double criterion;
};

NoisyVariance noisy_variance(const Eigen::MatrixXd& r, const Eigen::VectorXd& noise_var,
                             const Eigen::MatrixXd& f, const Eigen::VectorXd& y) {
  const double n = static_cast<double>(y.size());
  const double p = static_cast<double>(f.cols());
  const double scale = std::max(sample_variance(y), 1e-300);
  auto crit = [&](double log_s2) {
    const double s2 = std::exp(log_s2);
    Eigen::MatrixXd m = r;
    m.diagonal() += noise_var / s2;
    const auto c = condition_core(m, f, y);
    return (n - p) * log_s2 + c.logdet_m + c.logdet_g + c.resid.squaredNorm() / s2;
  };
  const auto [best, value] =
      minimize_scalar(crit, std::log(scale * 1e-8), std::log(scale * 1e4));
  return {std::exp(best), value};
}

}  // namespace

std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::squared_exponential: return "squared_exponential";
    case KernelFamily::matern12: return "matern12";
    case KernelFamily::matern32: return "matern32";
    case KernelFamily::matern52: return "matern52";
    case KernelFamily::gamma_exponential: return "gamma_exponential";
  }
  return "";
}

KernelFamily kernel_family_from_string(const std::string& s) {
  if (s == "squared_exponential" || s == "se" || s == "gaussian") return KernelFamily::squared_exponential;
  if (s == "matern12" || s == "matern1/2") return KernelFamily::matern12;
  if (s == "matern32" || s == "matern3/2") return KernelFamily::matern32;
  if (s == "matern52" || s == "matern5/2") return KernelFamily::matern52;
  if (s == "gamma_exponential" || s == "gamma_exp") return KernelFamily::gamma_exponential;
  fail(ErrorKind::argument, "unknown kernel family '" + s + "'");
}

std::string to_string(KernelMode m) { return m == KernelMode::isotropic ? "isotropic" : "tensorized"; }

KernelMode kernel_mode_from_string(const std::string& s) {
  if (s == "isotropic") return KernelMode::isotropic;
  if (s == "tensorized") return KernelMode::tensorized;
  fail(ErrorKind::argument, "unknown kernel mode '" + s + "'");
}

std::string to_string(HyperEstimator e) {
  return e == HyperEstimator::max_likelihood ? "max_likelihood" : "loo_cv";
}

HyperEstimator hyper_estimator_from_string(const std::string& s) {
  if (s == "max_likelihood" || s == "ml" || s == "reml") return HyperEstimator::max_likelihood;
  if (s == "loo_cv" || s == "loo") return HyperEstimator::loo_cv;
  fail(ErrorKind::argument, "unknown hyperparameter estimator '" + s + "'");
}

void Kernel::validate(int dim) const {
  const auto expected = mode == KernelMode::isotropic ? 1 : dim;
  require(lengthscales.size() == expected, ErrorKind::argument,
          "kernel: expected " + std::to_string(expected) + " lengthscale(s)");
  require((lengthscales.array() > 0.0).all() && lengthscales.allFinite(), ErrorKind::argument,
          "kernel: lengthscales must be positive");
  require(variance >= 0.0 && std::isfinite(variance), ErrorKind::argument,
          "kernel: variance must be nonnegative");
  if (family == KernelFamily::gamma_exponential)
    require(gamma > 0.0 && gamma <= 2.0, ErrorKind::argument, "kernel: gamma must lie in (0, 2]");
}

double Kernel::correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                           const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const auto d = x.size();
  const bool iso = mode == KernelMode::isotropic;
  if (family == KernelFamily::gamma_exponential && !iso) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) s += std::pow(std::abs(x[i] - y[i]) / lengthscales[i], gamma);
    return std::exp(-s);
  }
  if (family != KernelFamily::squared_exponential && !iso) {
    double r = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) r *= matern_1d(family, std::abs(x[i] - y[i]) / lengthscales[i]);
    return r;
  }
  double s2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    const double h = (x[i] - y[i]) / (iso ? lengthscales[0] : lengthscales[i]);
    s2 += h * h;
  }
  switch (family) {
    case KernelFamily::squared_exponential: return std::exp(-0.5 * s2);
    case KernelFamily::gamma_exponential: return std::exp(-std::pow(s2, 0.5 * gamma));
    default: return matern_1d(family, std::sqrt(s2));
  }
}

Eigen::MatrixXd Kernel::correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                           const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  require(a.cols() == b.cols(), ErrorKind::argument, "correlation_matrix: dimension mismatch");
  const auto d = a.cols();
  // Pre-scaled coordinates, stored point-major for contiguous access.
  Eigen::VectorXd inv(d);
  for (Eigen::Index i = 0; i < d; ++i)
    inv[i] = 1.0 / (mode == KernelMode::isotropic ? lengthscales[0] : lengthscales[i]);
  const Eigen::MatrixXd as = (a * inv.asDiagonal()).transpose();
  const Eigen::MatrixXd bs = (b * inv.asDiagonal()).transpose();
  Eigen::MatrixXd out(a.rows(), b.rows());
  const bool product_gamma = family == KernelFamily::gamma_exponential && mode == KernelMode::tensorized;
  const bool product_matern = family != KernelFamily::squared_exponential && !product_gamma &&
                              mode == KernelMode::tensorized;
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    const double* pb = bs.data() + j * d;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double* pa = as.data() + i * d;
      double s = 0.0;
      if (product_gamma) {
        for (Eigen::Index k = 0; k < d; ++k) s += std::pow(std::abs(pa[k] - pb[k]), gamma);
        out(i, j) = std::exp(-s);
        continue;
      }
      if (product_matern) {
        double r = 1.0;
        for (Eigen::Index k = 0; k < d; ++k) r *= matern_1d(family, std::abs(pa[k] - pb[k]));
        out(i, j) = r;
        continue;
      }
      for (Eigen::Index k = 0; k < d; ++k) {
        const double h = pa[k] - pb[k];
        s += h * h;
      }
      switch (family) {
        case KernelFamily::squared_exponential: out(i, j) = std::exp(-0.5 * s); break;
        case KernelFamily::gamma_exponential: out(i, j) = std::exp(-std::pow(s, 0.5 * gamma)); break;
        default: out(i, j) = matern_1d(family, std::sqrt(s));
      }
    }
  }
  return out;
}

double kernel_eval(const Kernel& k, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y) {
  require(x.size() == y.size(), ErrorKind::argument, "kernel_eval: dimension mismatch");
  k.validate(static_cast<int>(x.size()));
  return k.variance * k.correlation(x, y);
}

TrendSpec::TrendSpec(std::vector<std::vector<int>> exponents)
    : dim_(exponents.empty() ? 0 : static_cast<int>(exponents.front().size())),
      exponents_(std::move(exponents)) {
  require(!exponents_.empty() && dim_ >= 1, ErrorKind::argument, "TrendSpec: needs at least one function");
  for (const auto& e : exponents_) {
    require(static_cast<int>(e.size()) == dim_, ErrorKind::argument, "TrendSpec: ragged exponents");
    for (int v : e) require(v >= 0, ErrorKind::argument, "TrendSpec: negative exponent");
  }
}

TrendSpec TrendSpec::constant(int dim) {
  return TrendSpec({std::vector<int>(static_cast<std::size_t>(dim), 0)});
}

TrendSpec TrendSpec::linear(int dim) {
  std::vector<std::vector<int>> e{std::vector<int>(static_cast<std::size_t>(dim), 0)};
  for (int i = 0; i < dim; ++i) {
    e.emplace_back(static_cast<std::size_t>(dim), 0);
    e.back()[static_cast<std::size_t>(i)] = 1;
  }
  return TrendSpec(std::move(e));
}

Eigen::VectorXd TrendSpec::eval(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == dim_, ErrorKind::argument, "TrendSpec: dimension mismatch");
  Eigen::VectorXd f(size());
  for (int j = 0; j < size(); ++j) {
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) {
      const int e = exponents_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      if (e) v *= std::pow(x[i], e);
    }
    f[j] = v;
  }
  return f;
}

Eigen::MatrixXd TrendSpec::matrix(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  require(x.cols() == dim_, ErrorKind::argument, "TrendSpec: dimension mismatch");
  Eigen::MatrixXd f(x.rows(), size());
  for (Eigen::Index r = 0; r < x.rows(); ++r) f.row(r) = eval(x.row(r).transpose()).transpose();
  return f;
}

GpModel GpModel::condition(Eigen::MatrixXd design, Eigen::VectorXd responses, TrendSpec trend,
                           Kernel kernel, bool estimate_variance, Eigen::VectorXd noise_std) {
  const auto n = design.rows();
  const int d = static_cast<int>(design.cols());
  require(responses.size() == n, ErrorKind::argument, "GP: one response per design point required");
  require(responses.allFinite(), ErrorKind::argument, "GP: responses must be finite");
  require(trend.dim() == d, ErrorKind::argument, "GP: trend dimension mismatch");
  require(n > trend.size(), ErrorKind::underdetermined, "GP: need n > p");
  kernel.validate(d);
  const bool noisy = noise_std.size() > 0;
  if (noisy) {
    require(noise_std.size() == n && (noise_std.array() >= 0.0).all(), ErrorKind::argument,
            "GP: one nonnegative noise level per design point required");
  } else {
    check_no_duplicates(design);
  }

  const Eigen::MatrixXd f = trend.matrix(design);
  const Eigen::MatrixXd r = kernel.correlation_matrix(design, design);
  Eigen::MatrixXd m = r;
  if (noisy) {
    const Eigen::VectorXd nv = noise_std.array().square();
    if (estimate_variance) kernel.variance = noisy_variance(r, nv, f, responses).sigma2;
    require(kernel.variance > 0.0, ErrorKind::degenerate, "GP: noisy model needs a positive variance");
    m.diagonal() += nv / kernel.variance;
  }
  auto c = condition_core(m, f, responses);
  if (!noisy && estimate_variance)
    kernel.variance = c.resid.squaredNorm() / static_cast<double>(n - trend.size());

  GpModel g;
  g.design_ = std::move(design);
  g.responses_ = std::move(responses);
  g.trend_ = std::move(trend);
  g.kernel_ = std::move(kernel);
  g.noise_std_ = std::move(noise_std);
  g.chol_ = std::move(c.l);
  g.lf_ = std::move(c.lf);
  g.rf_ = std::move(c.rf);
  g.perm_ = std::move(c.perm);
  g.resid_ = std::move(c.resid);
  g.alpha_ = std::move(c.alpha);
  g.beta_ = std::move(c.beta);
  g.nugget_ = c.jitter;
  return g;
}

GpModel::Factors GpModel::factors(const Eigen::Ref<const Eigen::MatrixXd>& points) const {
  require(points.cols() == dim(), ErrorKind::argument, "GP: point dimension mismatch");
  Factors out;
  out.v = chol_.triangularView<Eigen::Lower>().solve(kernel_.correlation_matrix(design_, points));
  const Eigen::MatrixXd u = trend_.matrix(points).transpose() - lf_.transpose() * out.v;
  Eigen::MatrixXd pu(u.rows(), u.cols());
  for (Eigen::Index k = 0; k < perm_.size(); ++k) pu.row(k) = u.row(perm_[k]);
  out.w = rf_.transpose().triangularView<Eigen::Lower>().solve(pu);
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> GpModel::predict_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  const auto fac = factors(x);
  Eigen::VectorXd mean = trend_.matrix(x) * beta_ + fac.v.transpose() * resid_;
  Eigen::VectorXd var =
      kernel_.variance * (1.0 - fac.v.colwise().squaredNorm().array() + fac.w.colwise().squaredNorm().array()).matrix().transpose();
  const double floor = -1e-9 * kernel_.variance;
  for (Eigen::Index i = 0; i < var.size(); ++i) {
    require(var[i] >= floor, ErrorKind::numerical_breakdown,
            "GP: predictive variance is significantly negative");
    var[i] = std::max(var[i], 0.0);
  }
  return {std::move(mean), std::move(var)};
}

Eigen::VectorXd GpModel::predict_mean_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  constexpr Eigen::Index kBlock = 4096;
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index s = 0; s < x.rows(); s += kBlock) {
    const Eigen::Index len = std::min(kBlock, x.rows() - s);
    const auto xs = x.middleRows(s, len);
    out.segment(s, len) = trend_.matrix(xs) * beta_ + kernel_.correlation_matrix(xs, design_) * alpha_;
  }
  return out;
}

Prediction GpModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::MatrixXd row = x.transpose();
  const auto [m, v] = predict_rows(row);
  return {m[0], v[0]};
}

Eigen::MatrixXd GpModel::posterior_cov(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                       const Eigen::Ref<const Eigen::MatrixXd>& b) const {
  const auto fa = factors(a);
  const auto fb = factors(b);
  return kernel_.variance *
         (kernel_.correlation_matrix(a, b) - fa.v.transpose() * fb.v + fa.w.transpose() * fb.w);
}

double GpModel::predict_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const Eigen::Ref<const Eigen::VectorXd>& y) const {
  const Eigen::MatrixXd a = x.transpose();
  const Eigen::MatrixXd b = y.transpose();
  return posterior_cov(a, b)(0, 0);
}

Eigen::VectorXd GpModel::loo_residuals() const {
  Conditioned c;
  c.l = chol_;
  c.lf = lf_;
  c.rf = rf_;
  c.perm = perm_;
  const Eigen::VectorXd diag = bordered_inverse_diagonal(c);
  return alpha_.array() / diag.array();
}

Eigen::MatrixXd GpModel::prior_draws_dense(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                           std::uint64_t seed) const {
  // Identical rows share one value, so the joint covariance stays nonsingular.
  std::map<std::vector<double>, Eigen::Index> unique_index;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(points.rows()));
  std::vector<Eigen::Index> representatives;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    std::vector<double> key(static_cast<std::size_t>(points.cols()));
    for (Eigen::Index j = 0; j < points.cols(); ++j) key[static_cast<std::size_t>(j)] = points(i, j);
    auto [it, inserted] = unique_index.emplace(std::move(key), static_cast<Eigen::Index>(representatives.size()));
    if (inserted) representatives.push_back(i);
    slot[static_cast<std::size_t>(i)] = it->second;
  }
  const auto u = static_cast<Eigen::Index>(representatives.size());
  Eigen::MatrixXd up(u, points.cols());
  for (Eigen::Index k = 0; k < u; ++k) up.row(k) = points.row(representatives[static_cast<std::size_t>(k)]);
  const Eigen::MatrixXd l = factor_with_jitter(kernel_.correlation_matrix(up, up)).l;

  Rng rng(seed);
  Eigen::MatrixXd xi(u, count);
  for (int q = 0; q < count; ++q)
    for (Eigen::Index k = 0; k < u; ++k) xi(k, q) = rng.normal();
  Eigen::MatrixXd z = l.triangularView<Eigen::Lower>() * xi;
  z *= std::sqrt(kernel_.variance);
  Eigen::MatrixXd out(points.rows(), count);
  for (Eigen::Index i = 0; i < points.rows(); ++i) out.row(i) = z.row(slot[static_cast<std::size_t>(i)]);
  return out;
}

double sample_positive_stable(double alpha, double u_angle, double exp_draw) {
  if (alpha >= 1.0) return 1.0;
  const double a = std::sin(alpha * u_angle) / std::pow(std::sin(u_angle), 1.0 / alpha);
  const double b = std::pow(std::sin((1.0 - alpha) * u_angle) / exp_draw, (1.0 - alpha) / alpha);
  return a * b;
}

Eigen::MatrixXd GpModel::prior_draws_spectral(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                              std::uint64_t seed, const PosteriorSamplerOptions& o) const {
  require(o.features >= 1 && o.realizations_per_draw >= 1, ErrorKind::argument,
          "spectral sampler: features and realizations_per_draw must be positive");
  const auto d = points.cols();
  const int nf = o.features;
  const bool iso = kernel_.mode == KernelMode::isotropic;
  auto theta = [&](Eigen::Index i) { return iso ? kernel_.lengthscales[0] : kernel_.lengthscales[i]; };
  const double amplitude = std::sqrt(kernel_.variance / nf);
  Eigen::MatrixXd out(points.rows(), count);

  for (int start = 0, chunk = 0; start < count; start += o.realizations_per_draw, ++chunk) {
    const int cs = std::min(o.realizations_per_draw, count - start);
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(chunk)}));
    // Frequencies from the spectral measure of the kernel.
    Eigen::MatrixXd omega(d, nf);
    for (int k = 0; k < nf; ++k) {
      double shared = 1.0;
      switch (kernel_.family) {
        case KernelFamily::squared_exponential: break;
        case KernelFamily::matern12:
        case KernelFamily::matern32:
        case KernelFamily::matern52: {
          const double nu = kernel_.family == KernelFamily::matern12 ? 0.5
                            : kernel_.family == KernelFamily::matern32 ? 1.5 : 2.5;
          std::chi_squared_distribution<double> chi(2.0 * nu);
          if (iso) {
            shared = std::sqrt(2.0 * nu / chi(rng.engine()));
          } else {
            // product kernel: independent Student-t frequency per dimension
            for (Eigen::Index i = 0; i < d; ++i)
              omega(i, k) = rng.normal() * std::sqrt(2.0 * nu / chi(rng.engine())) / theta(i);
            continue;
          }
          break;
        }
        case KernelFamily::gamma_exponential: {
          auto stable = [&] {
            std::exponential_distribution<double> e(1.0);
            const double s = sample_positive_stable(0.5 * kernel_.gamma, std::numbers::pi * rng.uniform(),
                                                    e(rng.engine()));
            return std::sqrt(2.0 * s);
          };
          if (iso) {
            shared = stable();
          } else {
            for (Eigen::Index i = 0; i < d; ++i) omega(i, k) = rng.normal() * stable() / theta(i);
            continue;
          }
          break;
        }
      }
      for (Eigen::Index i = 0; i < d; ++i) omega(i, k) = rng.normal() * shared / theta(i);
    }
    Eigen::MatrixXd weights(2 * nf, cs);
    for (int q = 0; q < cs; ++q)
      for (int k = 0; k < 2 * nf; ++k) weights(k, q) = rng.normal();

    constexpr Eigen::Index kBlock = 1024;
    for (Eigen::Index s = 0; s < points.rows(); s += kBlock) {
      const Eigen::Index len = std::min(kBlock, points.rows() - s);
      const Eigen::ArrayXXd phase = (points.middleRows(s, len) * omega).array();
      Eigen::MatrixXd features(len, 2 * nf);
      features.leftCols(nf) = phase.cos().matrix();
      features.rightCols(nf) = phase.sin().matrix();
      out.block(s, start, len, cs) = amplitude * (features * weights);
    }
  }
  return out;
}

Eigen::MatrixXd GpModel::sample_posterior(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                          std::uint64_t seed, const PosteriorSamplerOptions& options) const {
  require(count >= 1, ErrorKind::argument, "sample_posterior: count must be >= 1");
  require(points.cols() == dim(), ErrorKind::argument, "sample_posterior: dimension mismatch");
  const auto m = points.rows();
  const auto n = design_.rows();

  Eigen::MatrixXd all(m + n, dim());
  all.topRows(m) = points;
  all.bottomRows(n) = design_;

  Eigen::MatrixXd prior;
  if (kernel_.variance == 0.0) {
    prior = Eigen::MatrixXd::Zero(m + n, count);
  } else {
    bool dense = options.method == PosteriorSamplerOptions::Method::dense;
    if (options.method == PosteriorSamplerOptions::Method::automatic) dense = m + n <= options.dense_limit;
    prior = dense ? prior_draws_dense(all, count, derive_seed(seed, {0}))
                  : prior_draws_spectral(all, count, derive_seed(seed, {1}), options);
  }

  Eigen::MatrixXd zx = prior.bottomRows(n);
  if (noisy()) {
    Rng rng(derive_seed(seed, {2}));
    for (int q = 0; q < count; ++q)
      for (Eigen::Index i = 0; i < n; ++i) zx(i, q) += noise_std_[i] * rng.normal();
  }

  // Kriging predictor of the prior paths: T^T L^{-1} Z(X) with T = V + L_f P R^{-1} W.
  const auto fac = factors(points);
  Eigen::MatrixXd y1 = rf_.triangularView<Eigen::Upper>().solve(fac.w);
  Eigen::MatrixXd py(y1.rows(), y1.cols());
  for (Eigen::Index k = 0; k < perm_.size(); ++k) py.row(perm_[k]) = y1.row(k);
  const Eigen::MatrixXd t = fac.v + lf_ * py;
  const Eigen::MatrixXd lz = chol_.triangularView<Eigen::Lower>().solve(zx);
  const Eigen::VectorXd mean = trend_.matrix(points) * beta_ + fac.v.transpose() * resid_;

  Eigen::MatrixXd out = prior.topRows(m) - t.transpose() * lz;
  out.colwise() += mean;
  return out;
}

Eigen::VectorXd GpModel::update_realization(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                            const Eigen::Ref<const Eigen::VectorXd>& realization,
                                            int new_index, double true_value) const {
  require(realization.size() == points.rows(), ErrorKind::argument,
          "update_realization: one value per point required");
  require(new_index >= 0 && new_index < points.rows(), ErrorKind::argument,
          "update_realization: new_index out of range");
  const Eigen::MatrixXd xnew = points.row(new_index);
  const Eigen::VectorXd c = posterior_cov(xnew, points).row(0).transpose();
  const double denom = c[new_index];
  require(denom >= 1e-12 * kernel_.variance && denom > 0.0, ErrorKind::degenerate,
          "update_realization: the new point is already known (zero posterior variance)");
  Eigen::VectorXd out = realization + c * ((true_value - realization[new_index]) / denom);
  out[new_index] = true_value;
  return out;
}

int GpModel::next_design_point(const Eigen::Ref<const Eigen::MatrixXd>& candidates) const {
  require(candidates.rows() >= 1, ErrorKind::argument, "next_design_point: empty candidate set");
  const Eigen::VectorXd var = predict_rows(candidates).second;
  const double tie = 1e-10 * kernel_.variance;
  int best = 0;
  for (Eigen::Index i = 1; i < var.size(); ++i)
    if (var[i] > var[best] + tie) best = static_cast<int>(i);
  return best;
}

GpModel fit_gp(const Eigen::Ref<const Eigen::MatrixXd>& design_in,
               const Eigen::Ref<const Eigen::VectorXd>& responses_in, const TrendSpec& trend,
               const Kernel& kernel_in, const GpFitOptions& options) {
  const Eigen::MatrixXd design = design_in;
  const Eigen::VectorXd responses = responses_in;
  const auto n = design.rows();
  const int d = static_cast<int>(design.cols());
  require(responses.size() == n, ErrorKind::argument, "fit_gp: one response per design point required");
  require(trend.dim() == d, ErrorKind::argument, "fit_gp: trend dimension mismatch");
  require(n > trend.size(), ErrorKind::underdetermined, "fit_gp: need n > p");
  require(options.starts >= 1, ErrorKind::argument, "fit_gp: need at least one start");
  const bool noisy = options.noise_std.size() > 0;
  if (!noisy) check_no_duplicates(design);

  const bool iso = kernel_in.mode == KernelMode::isotropic;
  const int dim_theta = iso ? 1 : d;
  Eigen::VectorXd range(dim_theta);
  for (int i = 0; i < dim_theta; ++i) {
    const double r = iso ? (design.colwise().maxCoeff() - design.colwise().minCoeff()).maxCoeff()
                         : design.col(i).maxCoeff() - design.col(i).minCoeff();
    require(r > 0.0, ErrorKind::degenerate, "fit_gp: design has zero range in an input");
    range[i] = r;
  }
  const Eigen::ArrayXd lo = (range.array() * options.theta_lower).log();
  const Eigen::ArrayXd hi = (range.array() * options.theta_upper).log();

  const Eigen::MatrixXd f = trend.matrix(design);
  require(full_column_rank(f), ErrorKind::trend, "fit_gp: trend matrix is rank deficient on the design");
  const Eigen::VectorXd noise_var = noisy ? Eigen::VectorXd(options.noise_std.array().square()) : Eigen::VectorXd();
  const double np = static_cast<double>(n - trend.size());

  Kernel kernel = kernel_in;
  auto objective_at = [&](const Eigen::ArrayXd& log_theta) {
    kernel.lengthscales = log_theta.exp().matrix();
    const Eigen::MatrixXd r = kernel.correlation_matrix(design, design);
    Eigen::MatrixXd m = r;
    double criterion = 0.0;
    if (noisy) {
      const auto nv = noisy_variance(r, noise_var, f, responses);
      m.diagonal() += noise_var / nv.sigma2;
      criterion = nv.criterion;
    }
    const auto c = condition_core(m, f, responses);
    if (options.estimator == HyperEstimator::loo_cv) {
      const Eigen::VectorXd diag = bordered_inverse_diagonal(c);
      if ((diag.array() <= 0.0).any()) return kInf;
      return (c.alpha.array() / diag.array()).square().mean();
    }
    if (noisy) return criterion;
    const double s2 = c.resid.squaredNorm() / np;
    if (!(s2 > 0.0)) return -1e100;  // exact fit of the trend
    return np * std::log(s2) + c.logdet_m + c.logdet_g;
  };
  auto boxed = [&](const Eigen::VectorXd& x) {
    const Eigen::ArrayXd clamped = x.array().max(lo).min(hi);
    const double dist2 = (x.array() - clamped).square().sum();
    const double v = objective_at(clamped);
    return v + (std::abs(v) + 1.0) * dist2;
  };

  OptimizerTrace trace;
  trace.estimator = options.estimator;
  Rng rng(derive_seed(options.seed, {0x67705f666974ULL}));
  const Eigen::ArrayXd slo = (range.array() * options.start_lower).log();
  const Eigen::ArrayXd shi = (range.array() * options.start_upper).log();
  Eigen::VectorXd best_x;
  double best_v = kInf;
  for (int s = 0; s < options.starts; ++s) {
    Eigen::VectorXd x0(dim_theta);
    for (int i = 0; i < dim_theta; ++i) x0[i] = slo[i] + (shi[i] - slo[i]) * rng.uniform();
    const auto res = minimize_simplex(boxed, x0, 0.5, options.max_iterations, options.simplex_tolerance);
    const Eigen::VectorXd xf = res.x.array().max(lo).min(hi).matrix();
    trace.starts.push_back({x0, xf, res.value, res.iterations});
    if (res.value < best_v) {
      best_v = res.value;
      best_x = xf;
    }
  }
  require(std::isfinite(best_v) && best_v < 1e99, ErrorKind::numerical_breakdown,
          "fit_gp: no start produced a valid objective value");
  trace.best_objective = best_v;
  for (int i = 0; i < dim_theta; ++i)
    trace.at_boundary = trace.at_boundary || best_x[i] - lo[i] < 1e-3 || hi[i] - best_x[i] < 1e-3;

  kernel.lengthscales = best_x.array().exp().matrix();
  GpModel model = GpModel::condition(design, responses, trend, kernel, true, options.noise_std);
  model.trace_ = std::move(trace);
  return model;
}

}  // namespace uqsa
