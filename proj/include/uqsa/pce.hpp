#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/distributions.hpp"
#include "uqsa/orthopoly.hpp"
#include "uqsa/sobol_report.hpp"

namespace uqsa {

/// Relative pivot threshold of the rank-revealing QR.
inline constexpr double kRankThreshold = 1e-12;

struct DegreeTrial {
  int degree;
  std::size_t basis_size;
  double loo_error;  // +inf when the fit failed or LOO is degenerate
};

/// Truncated polynomial chaos expansion
///   G(x) ~ sum_alpha y_alpha Psi_alpha(T^{-1}(x)).
class PceModel {
 public:
  PceModel(InputModel input, MultivariateBasis basis, Eigen::VectorXd coefficients);

  const InputModel& input() const noexcept { return input_; }
  const MultivariateBasis& basis() const noexcept { return basis_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  int dim() const noexcept { return basis_.dim(); }

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// One prediction per row of physical points.
  Eigen::VectorXd predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;

  // Diagnostics recorded by fit(); zero/NaN for hand-built models.
  int design_size() const noexcept { return n_; }
  double empirical_error() const noexcept { return emp_error_; }
  /// Closed-form leave-one-out error. Throws a degenerate error when some
  /// hat-matrix diagonal equals 1 (interpolation regime).
  double loo_error() const;
  bool loo_degenerate() const noexcept { return loo_degenerate_; }
  /// Sample variance of the training responses (normalization for the errors).
  double response_variance() const noexcept { return response_variance_; }
  double normalized_empirical_error() const { return emp_error_ / response_variance_; }
  double normalized_loo_error() const { return loo_error() / response_variance_; }
  const Eigen::VectorXd& hat_diagonal() const noexcept { return hat_; }

  std::uint64_t design_seed() const noexcept { return design_seed_; }
  void set_design_seed(std::uint64_t s) noexcept { design_seed_ = s; }
  const std::vector<DegreeTrial>& degree_trials() const noexcept { return trials_; }
  std::optional<int> selected_degree() const noexcept { return degree_; }

 private:
  friend PceModel fit_pce(const InputModel&, const Eigen::Ref<const Eigen::MatrixXd>&,
                          const Eigen::Ref<const Eigen::VectorXd>&, const MultivariateBasis&);
  friend PceModel adaptive_fit_pce(const InputModel&, const Eigen::Ref<const Eigen::MatrixXd>&,
                                   const Eigen::Ref<const Eigen::VectorXd>&,
                                   const std::vector<PolynomialFamily>&, int, int, double);
  friend class PceSerializer;

  InputModel input_;
  MultivariateBasis basis_;
  Eigen::VectorXd coefficients_;
  int n_ = 0;
  double emp_error_ = 0.0;
  double loo_error_ = 0.0;
  bool loo_degenerate_ = false;
  double response_variance_ = 0.0;
  Eigen::VectorXd hat_;
  std::uint64_t design_seed_ = 0;
  std::vector<DegreeTrial> trials_;
  std::optional<int> degree_;
};

/// Families matching the standard space of each marginal.
std::vector<PolynomialFamily> default_families(const InputModel& input);

/// Least-squares fit on a fixed basis through column-pivoted QR.
PceModel fit_pce(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                 const Eigen::Ref<const Eigen::VectorXd>& responses, const MultivariateBasis& basis);

/// Leave-one-out error by n explicit refits.
double loo_error_explicit(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& responses,
                          const MultivariateBasis& basis);

/// Fits every total degree in [p_min, p_max] with n >= oversampling * card A,
/// keeps the smallest LOO error.
PceModel adaptive_fit_pce(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& responses,
                          const std::vector<PolynomialFamily>& families, int p_min, int p_max,
                          double oversampling = 2.0);

struct Moments {
  double mean;
  double variance;
};

Moments moments(const PceModel& model);

/// Partial variance of every subset present in the expansion, keyed by the
/// support bitmask of the multi-indices.
std::map<std::vector<int>, double> partial_variances(const PceModel& model);

enum class SobolRequest { first_order, total, subset, all_subsets };

/// Analytic indices from squared coefficients. For `subset`, `which` is the
/// variable set A (partial index S_A); it is ignored otherwise.
SobolReport sobol_indices(const PceModel& model, SobolRequest request, const Subset& which = {});

}  // namespace uqsa
