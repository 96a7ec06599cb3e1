#include "uqsa/sobol.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "uqsa/error.hpp"
#include "uqsa/random.hpp"

namespace uqsa {

namespace {

constexpr Eigen::Index kBlock = 1 << 15;

// Streaming sums of the per-sample statistics and their second moments.
// Outputs are shifted by the first observed value; the first-order formula
// is corrected for the shift exactly, so the estimate does not depend on it.
class PairAccumulator {
 public:
  explicit PairAccumulator(bool total) : total_(total) {}

  void add(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::VectorXd>& yp) {
    require(y.size() == yp.size(), ErrorKind::argument, "pick-freeze: output size mismatch");
    if (count_ == 0 && y.size() > 0) shift_ = y[0];
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double z = y[i] - shift_;
      const double zp = yp[i] - shift_;
      Eigen::Vector4d u;
      if (total_)
        u << 0.5 * (z - zp) * (z - zp), 0.5 * (z + zp), 0.5 * (z * z + zp * zp), 0.0;
      else
        u << z * zp, 0.5 * (z + zp), z * z, z;
      sum_ += u;
      cross_ += u * u.transpose();
    }
    count_ += y.size();
    require(std::isfinite(sum_.sum()) && std::isfinite(cross_.sum()), ErrorKind::numerical_breakdown,
            "pick-freeze: non-finite model output");
  }

  PickFreezeEstimate result() const {
    require(count_ >= 2, ErrorKind::argument, "pick-freeze: N must be >= 2");
    const double n = static_cast<double>(count_);
    const Eigen::Vector4d mean = sum_ / n;
    const Eigen::Matrix4d cov = (cross_ - n * mean * mean.transpose()) / (n - 1.0);
    const double a = mean[0], b = mean[1], q = mean[2], zbar = mean[3];
    Eigen::Vector4d grad;
    double estimate;
    if (total_) {
      // a / (pooled second moment - b^2), shift invariant.
      const double d = q - b * b;
      require(d > 0.0, ErrorKind::degenerate, "pick-freeze: zero empirical output variance");
      estimate = a / d;
      grad << 1.0 / d, 2.0 * a * b / (d * d), -a / (d * d), 0.0;
    } else {
      // [mean(Y Y') - mu^2] / [mean(Y^2) - mu^2] written in shifted outputs.
      const double num = a - b * b;
      const double d = q - b * b + 2.0 * shift_ * (zbar - b);
      require(d > 0.0 && q - b * b > 0.0, ErrorKind::degenerate, "pick-freeze: zero empirical output variance");
      estimate = num / d;
      grad << 1.0 / d, -2.0 * b / d + num * (2.0 * b + 2.0 * shift_) / (d * d), -num / (d * d),
          -2.0 * shift_ * num / (d * d);
    }
    const double var = std::max(grad.dot(cov * grad), 0.0);
    return {estimate, std::sqrt(var / n)};
  }

 private:
  bool total_;
  double shift_ = 0.0;
  long long count_ = 0;
  Eigen::Vector4d sum_ = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cross_ = Eigen::Matrix4d::Zero();
};

void check_subset(const Subset& a, int d, bool proper) {
  require(!a.empty(), ErrorKind::argument, "subset must be nonempty");
  require(std::is_sorted(a.begin(), a.end()) && std::adjacent_find(a.begin(), a.end()) == a.end(),
          ErrorKind::argument, "subset must be sorted without repeats");
  require(a.front() >= 0 && a.back() < d, ErrorKind::argument, "subset variable out of range");
  if (proper) require(static_cast<int>(a.size()) < d, ErrorKind::argument, "subset must be a proper subset");
}

Eigen::VectorXd evaluate(const Evaluator& eval, const Eigen::MatrixXd& x) {
  Eigen::VectorXd y = eval(x);
  require(y.size() == x.rows(), ErrorKind::argument, "evaluator returned the wrong number of outputs");
  return y;
}

SobolEntry make_entry(Subset s, IndexType t, double estimate, double std, double se, std::string estimator,
                      long long n, int m, std::uint64_t seed) {
  SobolEntry e;
  e.subset = std::move(s);
  e.type = t;
  e.estimate = estimate;
  e.std = std;
  e.mc_stderr = se;
  e.estimator = std::move(estimator);
  e.sample_size = n;
  e.realizations = m;
  e.seed = seed;
  e.out_of_range = estimate < 0.0 || estimate > 1.0;
  return e;
}

// Pick-freeze core shared by the single-index and report entry points.
struct Batch {
  std::vector<PickFreezeEstimate> first;
  std::vector<PickFreezeEstimate> total;
};

Batch pick_freeze_core(const Evaluator& eval, const InputModel& model, long long n, std::uint64_t seed,
                       const std::vector<Subset>& first, const std::vector<int>& total) {
  require(n >= 2, ErrorKind::argument, "pick-freeze: N must be >= 2");
  const int d = model.dim();
  for (const auto& a : first) check_subset(a, d, true);
  for (int i : total) require(i >= 0 && i < d, ErrorKind::argument, "pick-freeze: variable out of range");
  std::vector<PairAccumulator> acc_first(first.size(), PairAccumulator(false));
  std::vector<PairAccumulator> acc_total(total.size(), PairAccumulator(true));
  Rng rng(seed);
  for (long long done = 0; done < n;) {
    const auto len = static_cast<int>(std::min<long long>(kBlock, n - done));
    const Eigen::MatrixXd xa = sample_points(model, len, SamplingMethod::mc, rng);
    const Eigen::MatrixXd xb = sample_points(model, len, SamplingMethod::mc, rng);
    const Eigen::VectorXd ya = evaluate(eval, xa);
    for (std::size_t k = 0; k < first.size(); ++k) {
      Eigen::MatrixXd x = xb;
      for (int j : first[k]) x.col(j) = xa.col(j);
      acc_first[k].add(ya, evaluate(eval, x));
    }
    for (std::size_t k = 0; k < total.size(); ++k) {
      Eigen::MatrixXd x = xa;
      x.col(total[k]) = xb.col(total[k]);
      acc_total[k].add(ya, evaluate(eval, x));
    }
    done += len;
  }
  Batch out;
  for (const auto& a : acc_first) out.first.push_back(a.result());
  for (const auto& a : acc_total) out.total.push_back(a.result());
  return out;
}

double percentile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// Mean and sample standard deviation of per-realization estimates (Welford,
// so identical realizations give a spread of exactly zero).
SobolEntry summarize_realizations(Subset s, const std::vector<PickFreezeEstimate>& per, long long n,
                                  std::uint64_t seed) {
  double mean = 0.0, m2 = 0.0, se = 0.0;
  int k = 0;
  for (const auto& p : per) {
    ++k;
    const double delta = p.estimate - mean;
    mean += delta / k;
    m2 += delta * (p.estimate - mean);
    se += p.mc_stderr;
  }
  const auto type = s.size() == 1 ? IndexType::first : IndexType::closed;
  return make_entry(std::move(s), type, mean, std::sqrt(m2 / (k - 1.0)), se / k, "gp_realizations", n, k, seed);
}

}  // namespace

Evaluator pointwise(std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> f) {
  return [f = std::move(f)](const Eigen::MatrixXd& x) {
    Eigen::VectorXd y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = f(x.row(i).transpose());
    return y;
  };
}

Evaluator pce_evaluator(const PceModel& model) {
  return [&model](const Eigen::MatrixXd& x) { return model.predict_rows(x); };
}

Evaluator gp_mean_evaluator(const GpModel& model) {
  return [&model](const Eigen::MatrixXd& x) { return model.predict_mean_rows(x); };
}

PickFreezeEstimate first_order_from_pairs(const Eigen::Ref<const Eigen::VectorXd>& y,
                                          const Eigen::Ref<const Eigen::VectorXd>& y_frozen) {
  PairAccumulator acc(false);
  acc.add(y, y_frozen);
  return acc.result();
}

PickFreezeEstimate total_from_pairs(const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& y_resampled) {
  PairAccumulator acc(true);
  acc.add(y, y_resampled);
  return acc.result();
}

PickFreezeEstimate pick_freeze_first_order(const Evaluator& eval, const InputModel& model,
                                           const Subset& a, long long n, std::uint64_t seed) {
  return pick_freeze_core(eval, model, n, seed, {a}, {}).first.front();
}

PickFreezeEstimate pick_freeze_total(const Evaluator& eval, const InputModel& model, int variable,
                                     long long n, std::uint64_t seed) {
  return pick_freeze_core(eval, model, n, seed, {}, {variable}).total.front();
}

SobolReport pick_freeze_indices(const Evaluator& eval, const InputModel& model, long long n,
                                std::uint64_t seed, const std::vector<int>& first,
                                const std::vector<int>& total) {
  std::vector<Subset> singles;
  for (int i : first) singles.push_back({i});
  const auto batch = pick_freeze_core(eval, model, n, seed, singles, total);
  SobolReport report;
  for (std::size_t k = 0; k < first.size(); ++k)
    report.entries.push_back(make_entry({first[k]}, IndexType::first, batch.first[k].estimate,
                                        std::numeric_limits<double>::quiet_NaN(), batch.first[k].mc_stderr,
                                        "pick_freeze_first", n, 0, seed));
  for (std::size_t k = 0; k < total.size(); ++k)
    report.entries.push_back(make_entry({total[k]}, IndexType::total, batch.total[k].estimate,
                                        std::numeric_limits<double>::quiet_NaN(), batch.total[k].mc_stderr,
                                        "pick_freeze_total", n, 0, seed));
  return report;
}

SobolReport gp_sobol(const GpModel& gp, const InputModel& model, const Subset& a, long long n, int m,
                     std::uint64_t seed, const PosteriorSamplerOptions& sampler) {
  require(m >= 2, ErrorKind::argument, "gp_sobol: m must be >= 2");
  require(n >= 2, ErrorKind::argument, "gp_sobol: N must be >= 2");
  require(gp.dim() == model.dim(), ErrorKind::argument, "gp_sobol: dimension mismatch");
  check_subset(a, model.dim(), true);
  const auto nn = static_cast<Eigen::Index>(n);
  Rng rng(derive_seed(seed, {1}));
  const Eigen::MatrixXd xa = sample_points(model, static_cast<int>(n), SamplingMethod::mc, rng);
  Eigen::MatrixXd points = Eigen::MatrixXd(2 * nn, model.dim());
  points.topRows(nn) = xa;
  points.bottomRows(nn) = sample_points(model, static_cast<int>(n), SamplingMethod::mc, rng);
  for (int j : a) points.col(j).tail(nn) = xa.col(j);
  const Eigen::MatrixXd z = gp.sample_posterior(points, m, derive_seed(seed, {2}), sampler);
  std::vector<PickFreezeEstimate> per;
  for (int r = 0; r < m; ++r) per.push_back(first_order_from_pairs(z.col(r).head(nn), z.col(r).tail(nn)));
  SobolReport report;
  report.entries.push_back(summarize_realizations(a, per, n, seed));
  return report;
}

SobolReport gp_sobol_first_orders(const GpModel& gp, const InputModel& model, long long n, int m,
                                  std::uint64_t seed, const PosteriorSamplerOptions& sampler) {
  require(m >= 2, ErrorKind::argument, "gp_sobol: m must be >= 2");
  require(n >= 2, ErrorKind::argument, "gp_sobol: N must be >= 2");
  require(gp.dim() == model.dim(), ErrorKind::argument, "gp_sobol: dimension mismatch");
  const int d = model.dim();
  require(d >= 2, ErrorKind::argument, "gp_sobol: needs at least two variables");
  const auto nn = static_cast<Eigen::Index>(n);
  Rng rng(derive_seed(seed, {1}));
  const Eigen::MatrixXd xa = sample_points(model, static_cast<int>(n), SamplingMethod::mc, rng);
  const Eigen::MatrixXd xb = sample_points(model, static_cast<int>(n), SamplingMethod::mc, rng);
  Eigen::MatrixXd points(nn * (d + 1), d);
  points.topRows(nn) = xa;
  for (int i = 0; i < d; ++i) {
    auto block = points.middleRows(nn * (i + 1), nn);
    block = xb;
    block.col(i) = xa.col(i);
  }
  const Eigen::MatrixXd z = gp.sample_posterior(points, m, derive_seed(seed, {2}), sampler);
  SobolReport report;
  for (int i = 0; i < d; ++i) {
    std::vector<PickFreezeEstimate> per;
    for (int r = 0; r < m; ++r)
      per.push_back(first_order_from_pairs(z.col(r).head(nn), z.col(r).segment(nn * (i + 1), nn)));
    report.entries.push_back(summarize_realizations({i}, per, n, seed));
  }
  return report;
}

std::vector<MainEffectPoint> main_effects(const GpModel& gp, const InputModel& model, int variable,
                                          const std::vector<double>& grid, int m, int n_inner,
                                          std::uint64_t seed, const PosteriorSamplerOptions& sampler) {
  require(variable >= 0 && variable < model.dim(), ErrorKind::argument, "main_effects: variable out of range");
  require(!grid.empty() && m >= 2 && n_inner >= 1, ErrorKind::argument,
          "main_effects: needs a grid, m >= 2 and n_inner >= 1");
  for (double g : grid)
    require(model.marginal(variable).in_support(g), ErrorKind::domain,
            "main_effects: grid value outside the support of the variable");
  const auto g = static_cast<Eigen::Index>(grid.size());
  Rng rng(derive_seed(seed, {1}));
  const Eigen::MatrixXd inner = sample_points(model, n_inner, SamplingMethod::mc, rng);
  Eigen::MatrixXd points(g * n_inner, model.dim());
  for (Eigen::Index k = 0; k < g; ++k) {
    auto block = points.middleRows(k * n_inner, n_inner);
    block = inner;
    block.col(variable).setConstant(grid[static_cast<std::size_t>(k)]);
  }
  const Eigen::MatrixXd z = gp.sample_posterior(points, m, derive_seed(seed, {2}), sampler);
  std::vector<MainEffectPoint> out;
  for (Eigen::Index k = 0; k < g; ++k) {
    std::vector<double> values(static_cast<std::size_t>(m));
    for (int r = 0; r < m; ++r) values[static_cast<std::size_t>(r)] = z.col(r).segment(k * n_inner, n_inner).mean();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= m;
    out.push_back({grid[static_cast<std::size_t>(k)], mean, percentile(values, 0.025), percentile(values, 0.975)});
  }
  return out;
}

}  // namespace uqsa
