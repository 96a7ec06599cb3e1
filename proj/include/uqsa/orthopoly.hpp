#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/distributions.hpp"

namespace uqsa {

/// Univariate polynomial families, each orthonormal with respect to a
/// probability measure:
///  - legendre: U(-1, 1)
///  - hermite:  N(0, 1) (probabilists' convention)
///  - laguerre: density proportional to x^a e^{-x} on (0, inf), a > -1
///  - jacobi:   density proportional to (1-x)^a (1+x)^b on [-1, 1], a, b > -1
class PolynomialFamily {
 public:
  enum class Kind { legendre, hermite, laguerre, jacobi };

  static PolynomialFamily legendre() { return {Kind::legendre, 0.0, 0.0}; }
  static PolynomialFamily hermite() { return {Kind::hermite, 0.0, 0.0}; }
  static PolynomialFamily laguerre(double a);
  static PolynomialFamily jacobi(double a, double b);
  /// Legendre for U(-1,1)-standardized inputs, Hermite for N(0,1).
  static PolynomialFamily for_space(StandardSpace s);

  Kind kind() const noexcept { return kind_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::string tag() const;
  static PolynomialFamily from_tag(const std::string& tag, double a = 0.0, double b = 0.0);

  /// Coefficients of the monic recurrence
  /// pi_{k+1}(x) = (x - alpha_k) pi_k(x) - beta_k pi_{k-1}(x), with beta_k = ||pi_k||^2 / ||pi_{k-1}||^2.
  double alpha(int k) const;
  double beta(int k) const;

  bool operator==(const PolynomialFamily&) const = default;

 private:
  PolynomialFamily(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}
  Kind kind_;
  double a_;
  double b_;
};

inline constexpr int kDefaultMaxDegree = 30;

/// psi_j(x), the degree-j orthonormal polynomial of the family.
double eval_orthonormal(const PolynomialFamily& family, int degree, double x,
                        int max_degree = kDefaultMaxDegree);

/// psi_0(x) .. psi_p(x) in one recurrence sweep.
void eval_orthonormal_all(const PolynomialFamily& family, int max_degree, double x, double* out);

using MultiIndex = std::vector<int>;

/// A set of multi-indices in a fixed order. The order defines the layout of
/// coefficient vectors everywhere else.
class MultiIndexSet {
 public:
  MultiIndexSet(int dim, std::vector<MultiIndex> indices);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const noexcept { return indices_; }
  int max_degree() const noexcept { return max_degree_; }
  /// Largest exponent of each variable.
  const std::vector<int>& max_exponents() const noexcept { return max_exponents_; }

  /// Position of alpha, or -1.
  long find(const MultiIndex& alpha) const;

  void write_csv(std::ostream& os) const;
  static MultiIndexSet read_csv(std::istream& is);

 private:
  int dim_;
  int max_degree_ = 0;
  std::vector<MultiIndex> indices_;
  std::vector<int> max_exponents_;
};

inline constexpr std::uint64_t kDefaultIndexCap = 1'000'000;

/// card A^{d,p} = C(d+p, p), saturating at UINT64_MAX.
std::uint64_t total_degree_cardinality(int d, int p);

/// All alpha with |alpha| <= p in graded lexicographic order: by total
/// degree, then lexicographically descending in (alpha_1, alpha_2, ...).
MultiIndexSet enumerate_total_degree(int d, int p, std::uint64_t cap = kDefaultIndexCap);

/// Tensor-product basis Psi_alpha(u) = prod_i psi^{(i)}_{alpha_i}(u_i).
class MultivariateBasis {
 public:
  MultivariateBasis(std::vector<PolynomialFamily> families, MultiIndexSet indices);

  int dim() const noexcept { return indices_.dim(); }
  std::size_t size() const noexcept { return indices_.size(); }
  const std::vector<PolynomialFamily>& families() const noexcept { return families_; }
  const MultiIndexSet& indices() const noexcept { return indices_; }

  Eigen::VectorXd eval_row(const Eigen::Ref<const Eigen::VectorXd>& u) const;
  /// Information matrix, one row per standardized point.
  Eigen::MatrixXd eval_matrix(const Eigen::Ref<const Eigen::MatrixXd>& u) const;

 private:
  void fill_row(const double* u, Eigen::Index stride, double* out, Eigen::Index out_stride,
                std::vector<double>& scratch) const;

  std::vector<PolynomialFamily> families_;
  MultiIndexSet indices_;
};

}  // namespace uqsa
