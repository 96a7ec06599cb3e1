#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace uqsa {

enum class KernelFamily { squared_exponential, matern12, matern32, matern52, gamma_exponential };
enum class KernelMode { isotropic, tensorized };

std::string to_string(KernelFamily f);
KernelFamily kernel_family_from_string(const std::string& s);
std::string to_string(KernelMode m);
KernelMode kernel_mode_from_string(const std::string& s);

/// Stationary covariance k(x, x') = variance * r(x - x').
///
/// Tensorized kernels are products of 1D factors in h_i / theta_i (for SE
/// this equals the anisotropic-norm form). Isotropic kernels apply the 1D
/// closed form to |h| / theta.
struct Kernel {
  KernelFamily family = KernelFamily::matern52;
  KernelMode mode = KernelMode::tensorized;
  double gamma = 1.0;             // exponent of the gamma-exponential family, in (0, 2]
  Eigen::VectorXd lengthscales;   // one entry (isotropic) or d entries
  double variance = 1.0;

  void validate(int dim) const;
  double correlation(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// r(a_i, b_j) for rows of a and b.
  Eigen::MatrixXd correlation_matrix(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                     const Eigen::Ref<const Eigen::MatrixXd>& b) const;
};

double kernel_eval(const Kernel& k, const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y);

/// Trend basis: each function is a monomial given by its exponent tuple; the
/// all-zero tuple is the constant.
class TrendSpec {
 public:
  explicit TrendSpec(std::vector<std::vector<int>> exponents);
  static TrendSpec constant(int dim);
  static TrendSpec linear(int dim);

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return static_cast<int>(exponents_.size()); }
  const std::vector<std::vector<int>>& exponents() const noexcept { return exponents_; }

  Eigen::VectorXd eval(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// One row f(x)^T per row of x.
  Eigen::MatrixXd matrix(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

 private:
  int dim_;
  std::vector<std::vector<int>> exponents_;
};

enum class HyperEstimator { max_likelihood, loo_cv };
std::string to_string(HyperEstimator e);
HyperEstimator hyper_estimator_from_string(const std::string& s);

struct GpFitOptions {
  HyperEstimator estimator = HyperEstimator::max_likelihood;
  int starts = 10;
  std::uint64_t seed = 0;
  /// Search box for each lengthscale: [lower, upper] x (design range of that input).
  double theta_lower = 1e-3;
  double theta_upper = 1e3;
  /// Starting points are drawn log-uniformly in [start_lower, start_upper] x range.
  double start_lower = 0.05;
  double start_upper = 5.0;
  int max_iterations = 600;
  double simplex_tolerance = 1e-4;
  /// Observation noise standard deviation per design point; empty = interpolating.
  Eigen::VectorXd noise_std;
};

struct StartRecord {
  Eigen::VectorXd start_log_theta;
  Eigen::VectorXd final_log_theta;
  double objective;
  int iterations;
};

struct OptimizerTrace {
  HyperEstimator estimator = HyperEstimator::max_likelihood;
  std::vector<StartRecord> starts;
  double best_objective = 0.0;
  bool at_boundary = false;  // warning: optimum touches the search box
};

struct Prediction {
  double mean;
  double variance;
};

struct PosteriorSamplerOptions {
  enum class Method { automatic, dense, spectral };
  Method method = Method::automatic;
  /// `automatic` uses the exact dense sampler up to this many distinct points.
  int dense_limit = 2500;
  /// Random Fourier features per frequency draw of the spectral sampler.
  int features = 1000;
  /// Realizations sharing one frequency draw.
  int realizations_per_draw = 10;
};

/// Universal kriging model: GP prior with trend f(x)^T beta and kernel
/// sigma^2 r(x, x'), conditioned on (design, responses).
class GpModel {
 public:
  /// Conditions on data with fixed correlation hyperparameters. When
  /// `estimate_variance` is true the kernel variance is replaced by its REML
  /// estimate (noise-free data only).
  static GpModel condition(Eigen::MatrixXd design, Eigen::VectorXd responses, TrendSpec trend,
                           Kernel kernel, bool estimate_variance = true,
                           Eigen::VectorXd noise_std = {});

  const Eigen::MatrixXd& design() const noexcept { return design_; }
  const Eigen::VectorXd& responses() const noexcept { return responses_; }
  const TrendSpec& trend() const noexcept { return trend_; }
  const Kernel& kernel() const noexcept { return kernel_; }
  const Eigen::VectorXd& beta() const noexcept { return beta_; }
  double sigma2() const noexcept { return kernel_.variance; }
  const Eigen::VectorXd& noise_std() const noexcept { return noise_std_; }
  bool noisy() const noexcept { return noise_std_.size() > 0; }
  /// Diagonal jitter actually added, relative to the mean diagonal.
  double nugget() const noexcept { return nugget_; }
  const OptimizerTrace& trace() const noexcept { return trace_; }
  int dim() const noexcept { return static_cast<int>(design_.cols()); }
  int size() const noexcept { return static_cast<int>(design_.rows()); }

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd predict_mean_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  /// Means and variances at the rows of x.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  double predict_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y) const;
  /// k_n(a_i, b_j).
  Eigen::MatrixXd posterior_cov(const Eigen::Ref<const Eigen::MatrixXd>& a,
                                const Eigen::Ref<const Eigen::MatrixXd>& b) const;

  /// Closed-form leave-one-out residuals y_i - m_{n,-i}(x_i) at the current
  /// hyperparameters (trend coefficients re-estimated without point i).
  Eigen::VectorXd loo_residuals() const;

  /// q posterior realizations at the rows of `points` (one column each),
  /// drawn by kriging conditioning of unconditioned prior paths.
  Eigen::MatrixXd sample_posterior(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                   std::uint64_t seed,
                                   const PosteriorSamplerOptions& options = {}) const;

  /// Conditions a realization, given at the rows of `points`, on the extra
  /// observation true_value at points.row(new_index).
  Eigen::VectorXd update_realization(const Eigen::Ref<const Eigen::MatrixXd>& points,
                                     const Eigen::Ref<const Eigen::VectorXd>& realization,
                                     int new_index, double true_value) const;

  /// Candidate with the largest predictive variance; ties go to the lowest index.
  int next_design_point(const Eigen::Ref<const Eigen::MatrixXd>& candidates) const;

 private:
  friend GpModel fit_gp(const Eigen::Ref<const Eigen::MatrixXd>&, const Eigen::Ref<const Eigen::VectorXd>&,
                        const TrendSpec&, const Kernel&, const GpFitOptions&);
  friend class GpSerializer;

  struct Factors {
    Eigen::MatrixXd v;  // L^{-1} r(X, points)
    Eigen::MatrixXd w;  // R_f^{-T} P^T (f(points) - L_f^T v)
  };
  Factors factors(const Eigen::Ref<const Eigen::MatrixXd>& points) const;
  Eigen::MatrixXd prior_draws_dense(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                    std::uint64_t seed) const;
  Eigen::MatrixXd prior_draws_spectral(const Eigen::Ref<const Eigen::MatrixXd>& points, int count,
                                       std::uint64_t seed, const PosteriorSamplerOptions& o) const;

  Eigen::MatrixXd design_;
  Eigen::VectorXd responses_;
  TrendSpec trend_{std::vector<std::vector<int>>{{0}}};
  Kernel kernel_;
  Eigen::VectorXd noise_std_;
  Eigen::MatrixXd chol_;      // lower Cholesky factor L of M = R + Delta / sigma^2 + jitter
  Eigen::MatrixXd lf_;        // L^{-1} F
  Eigen::MatrixXd rf_;        // upper factor of the pivoted QR of L^{-1} F
  Eigen::VectorXi perm_;      // its column permutation
  Eigen::VectorXd resid_;     // L^{-1} (Y - F beta)
  Eigen::VectorXd alpha_;     // M^{-1} (Y - F beta)
  Eigen::VectorXd beta_;
  double nugget_ = 0.0;
  OptimizerTrace trace_;
};

/// Estimates lengthscales (and the variance) by restricted maximum
/// likelihood or leave-one-out cross-validation, then conditions. The
/// lengthscales of `kernel` are ignored; its family, mode and gamma are used.
GpModel fit_gp(const Eigen::Ref<const Eigen::MatrixXd>& design,
               const Eigen::Ref<const Eigen::VectorXd>& responses, const TrendSpec& trend,
               const Kernel& kernel, const GpFitOptions& options = {});

/// Positive alpha-stable variate with Laplace transform exp(-t^alpha), 0 < alpha <= 1.
double sample_positive_stable(double alpha, double u_angle, double exp_draw);

}  // namespace uqsa
