#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/random.hpp"

namespace uqsa {

/// Standardized space a marginal is mapped to: U(-1,1) for uniform
/// marginals, N(0,1) for everything else.
enum class StandardSpace { uniform, gaussian };

struct UniformLaw { double lower, upper; };
struct GaussianLaw { double mean, std; };
/// Parameterized by the mean and standard deviation of the variable itself.
struct LognormalLaw { double mean, std; };
/// Gumbel (maxima), parameterized by mean and standard deviation.
struct GumbelLaw { double mean, std; };
/// Gamma with unit rate.
struct GammaLaw { double shape; };
/// Density proportional to (1-x)^a (1+x)^b on [-1, 1].
struct BetaLaw { double a, b; };

/// One independent input marginal. Construct through the named factories,
/// which validate parameters.
class Marginal {
 public:
  using Law = std::variant<UniformLaw, GaussianLaw, LognormalLaw, GumbelLaw, GammaLaw, BetaLaw>;

  static Marginal uniform(double lower, double upper);
  static Marginal gaussian(double mean, double std);
  static Marginal lognormal(double mean, double std);
  static Marginal gumbel(double mean, double std);
  static Marginal gamma(double shape);
  static Marginal beta(double a, double b);

  const Law& law() const noexcept { return law_; }
  std::string tag() const;

  double quantile(double q) const;
  double cdf(double x) const;
  double mean() const;
  double std_dev() const;
  bool in_support(double x) const;

  StandardSpace standard_space() const noexcept;
  double to_standard(double x) const;
  double from_standard(double u) const;

  /// Lognormal (lambda, zeta) or Gumbel (location, scale) parameters after
  /// moment matching; throws for other laws.
  std::pair<double, double> native_parameters() const;

 private:
  explicit Marginal(Law law) : law_(law) {}
  Law law_;
};

/// Independent marginals with optional variable names.
class InputModel {
 public:
  InputModel() = default;
  InputModel(std::vector<Marginal> marginals, std::vector<std::string> names = {});

  /// d copies of the same marginal.
  static InputModel iid(int d, const Marginal& m);

  int dim() const noexcept { return static_cast<int>(marginals_.size()); }
  const Marginal& marginal(int i) const { return marginals_.at(i); }
  const std::vector<Marginal>& marginals() const noexcept { return marginals_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  Eigen::VectorXd to_standard(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd from_standard(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// Row-wise transforms of a sample matrix.
  Eigen::MatrixXd to_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::MatrixXd from_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& u) const;

 private:
  std::vector<Marginal> marginals_;
  std::vector<std::string> names_;
};

enum class SamplingMethod { mc, lhs };

std::string to_string(SamplingMethod m);
SamplingMethod sampling_method_from_string(const std::string& s);

struct DesignMatrix {
  Eigen::MatrixXd points;  // n x d, physical coordinates
  SamplingMethod method = SamplingMethod::mc;
  std::uint64_t seed = 0;
};

/// Plain Monte Carlo or random Latin hypercube sampling. Deterministic in
/// (model, n, method, seed).
DesignMatrix sample(const InputModel& model, int n, SamplingMethod method, std::uint64_t seed);

/// Same, drawing from an existing stream.
Eigen::MatrixXd sample_points(const InputModel& model, int n, SamplingMethod method, Rng& rng);

/// CSV with a header of variable names and 17 significant digits.
void write_design_csv(std::ostream& os, const Eigen::Ref<const Eigen::MatrixXd>& points,
                      const std::vector<std::string>& names);
Eigen::MatrixXd read_design_csv(std::istream& is, std::vector<std::string>* names = nullptr);

}  // namespace uqsa
