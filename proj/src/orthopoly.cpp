#include "uqsa/orthopoly.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "uqsa/error.hpp"

namespace uqsa {

PolynomialFamily PolynomialFamily::laguerre(double a) {
  require(a > -1.0, ErrorKind::argument, "laguerre: parameter a must exceed -1");
  return {Kind::laguerre, a, 0.0};
}

PolynomialFamily PolynomialFamily::jacobi(double a, double b) {
  require(a > -1.0 && b > -1.0, ErrorKind::argument, "jacobi: parameters must exceed -1");
  return {Kind::jacobi, a, b};
}

PolynomialFamily PolynomialFamily::for_space(StandardSpace s) {
  return s == StandardSpace::uniform ? legendre() : hermite();
}

std::string PolynomialFamily::tag() const {
  switch (kind_) {
    case Kind::legendre: return "legendre";
    case Kind::hermite: return "hermite";
    case Kind::laguerre: return "laguerre";
    case Kind::jacobi: return "jacobi";
  }
  return "";
}

PolynomialFamily PolynomialFamily::from_tag(const std::string& tag, double a, double b) {
  if (tag == "legendre") return legendre();
  if (tag == "hermite") return hermite();
  if (tag == "laguerre") return laguerre(a);
  if (tag == "jacobi") return jacobi(a, b);
  fail(ErrorKind::argument, "unknown polynomial family '" + tag + "'");
}

double PolynomialFamily::alpha(int k) const {
  switch (kind_) {
    case Kind::legendre:
    case Kind::hermite: return 0.0;
    case Kind::laguerre: return 2.0 * k + a_ + 1.0;
    case Kind::jacobi: {
      if (k == 0) return (b_ - a_) / (a_ + b_ + 2.0);
      const double s = 2.0 * k + a_ + b_;
      return (b_ * b_ - a_ * a_) / (s * (s + 2.0));
    }
  }
  return 0.0;
}

double PolynomialFamily::beta(int k) const {
  if (k <= 0) return 1.0;  // total mass of the probability measure
  const double kk = k;
  switch (kind_) {
    case Kind::legendre: return kk * kk / (4.0 * kk * kk - 1.0);
    case Kind::hermite: return kk;
    case Kind::laguerre: return kk * (kk + a_);
    case Kind::jacobi: {
      if (k == 1) {
        const double s = 2.0 + a_ + b_;
        return 4.0 * (1.0 + a_) * (1.0 + b_) / (s * s * (s + 1.0));
      }
      const double s = 2.0 * kk + a_ + b_;
      return 4.0 * kk * (kk + a_) * (kk + b_) * (kk + a_ + b_) / (s * s * (s + 1.0) * (s - 1.0));
    }
  }
  return 1.0;
}

void eval_orthonormal_all(const PolynomialFamily& family, int max_degree, double x, double* out) {
  // Orthonormal form of the recurrence: no factorials ever appear.
  out[0] = 1.0;
  if (max_degree == 0) return;
  double prev = 0.0;
  double cur = 1.0;
  double sqrt_beta_k = 0.0;
  for (int k = 0; k < max_degree; ++k) {
    const double sqrt_beta_next = std::sqrt(family.beta(k + 1));
    const double next = ((x - family.alpha(k)) * cur - sqrt_beta_k * prev) / sqrt_beta_next;
    prev = cur;
    cur = next;
    sqrt_beta_k = sqrt_beta_next;
    out[k + 1] = cur;
  }
}

double eval_orthonormal(const PolynomialFamily& family, int degree, double x, int max_degree) {
  require(degree >= 0, ErrorKind::argument, "eval_orthonormal: negative degree");
  require(degree <= max_degree, ErrorKind::argument,
          "eval_orthonormal: degree " + std::to_string(degree) + " exceeds maximum " +
              std::to_string(max_degree));
  std::vector<double> v(static_cast<std::size_t>(degree) + 1);
  eval_orthonormal_all(family, degree, x, v.data());
  return v.back();
}

MultiIndexSet::MultiIndexSet(int dim, std::vector<MultiIndex> indices)
    : dim_(dim), indices_(std::move(indices)), max_exponents_(static_cast<std::size_t>(dim), 0) {
  require(dim >= 1, ErrorKind::argument, "MultiIndexSet: dimension must be >= 1");
  for (const auto& a : indices_) {
    require(static_cast<int>(a.size()) == dim, ErrorKind::argument,
            "MultiIndexSet: index of wrong dimension");
    int total = 0;
    for (int i = 0; i < dim; ++i) {
      require(a[i] >= 0, ErrorKind::argument, "MultiIndexSet: negative exponent");
      total += a[i];
      max_exponents_[i] = std::max(max_exponents_[i], a[i]);
    }
    max_degree_ = std::max(max_degree_, total);
  }
}

long MultiIndexSet::find(const MultiIndex& alpha) const {
  auto it = std::find(indices_.begin(), indices_.end(), alpha);
  return it == indices_.end() ? -1 : static_cast<long>(it - indices_.begin());
}

void MultiIndexSet::write_csv(std::ostream& os) const {
  for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << "a" << i + 1;
  os << '\n';
  for (const auto& a : indices_) {
    for (int i = 0; i < dim_; ++i) os << (i ? "," : "") << a[i];
    os << '\n';
  }
}

MultiIndexSet MultiIndexSet::read_csv(std::istream& is) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::io, "MultiIndexSet: empty input");
  const int d = static_cast<int>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<MultiIndex> idx;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    MultiIndex a;
    while (std::getline(ss, cell, ',')) a.push_back(std::stoi(cell));
    require(static_cast<int>(a.size()) == d, ErrorKind::io, "MultiIndexSet: ragged row");
    idx.push_back(std::move(a));
  }
  return MultiIndexSet(d, std::move(idx));
}

std::uint64_t total_degree_cardinality(int d, int p) {
  // C(d+p, p) built incrementally; each partial product is itself a binomial.
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t c = 1;
  for (int k = 1; k <= p; ++k) {
    const std::uint64_t num = static_cast<std::uint64_t>(d) + static_cast<std::uint64_t>(k);
    if (c > kMax / num) return kMax;
    c = c * num / static_cast<std::uint64_t>(k);
  }
  return c;
}

namespace {

void compositions(int remaining, int pos, MultiIndex& cur, std::vector<MultiIndex>& out) {
  const int d = static_cast<int>(cur.size());
  if (pos == d - 1) {
    cur[pos] = remaining;
    out.push_back(cur);
    return;
  }
  for (int v = remaining; v >= 0; --v) {
    cur[pos] = v;
    compositions(remaining - v, pos + 1, cur, out);
  }
  cur[pos] = 0;
}

}  // namespace

MultiIndexSet enumerate_total_degree(int d, int p, std::uint64_t cap) {
  require(d >= 1 && p >= 0, ErrorKind::argument, "enumerate_total_degree: need d >= 1, p >= 0");
  const std::uint64_t card = total_degree_cardinality(d, p);
  require(card <= cap, ErrorKind::resource,
          "enumerate_total_degree: cardinality " + std::to_string(card) + " exceeds cap " +
              std::to_string(cap));
  std::vector<MultiIndex> out;
  out.reserve(card);
  MultiIndex cur(static_cast<std::size_t>(d), 0);
  for (int q = 0; q <= p; ++q) compositions(q, 0, cur, out);
  return MultiIndexSet(d, std::move(out));
}

MultivariateBasis::MultivariateBasis(std::vector<PolynomialFamily> families, MultiIndexSet indices)
    : families_(std::move(families)), indices_(std::move(indices)) {
  require(static_cast<int>(families_.size()) == indices_.dim(), ErrorKind::argument,
          "MultivariateBasis: one family per dimension required");
  for (int e : indices_.max_exponents())
    require(e <= kDefaultMaxDegree, ErrorKind::argument,
            "MultivariateBasis: univariate degree exceeds " + std::to_string(kDefaultMaxDegree));
}

void MultivariateBasis::fill_row(const double* u, Eigen::Index stride, double* out,
                                 Eigen::Index out_stride, std::vector<double>& scratch) const {
  const int d = dim();
  const auto& maxe = indices_.max_exponents();
  std::size_t offset = 0;
  std::vector<std::size_t> start(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    start[i] = offset;
    eval_orthonormal_all(families_[i], maxe[i], u[i * stride], scratch.data() + offset);
    offset += static_cast<std::size_t>(maxe[i]) + 1;
  }
  for (std::size_t j = 0; j < indices_.size(); ++j) {
    const MultiIndex& a = indices_[j];
    double v = 1.0;
    for (int i = 0; i < d; ++i)
      if (a[i] != 0) v *= scratch[start[i] + static_cast<std::size_t>(a[i])];
    out[static_cast<Eigen::Index>(j) * out_stride] = v;
  }
}

Eigen::VectorXd MultivariateBasis::eval_row(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  require(u.size() == dim(), ErrorKind::argument, "eval_basis_row: dimension mismatch");
  std::size_t total = 0;
  for (int e : indices_.max_exponents()) total += static_cast<std::size_t>(e) + 1;
  std::vector<double> scratch(total);
  Eigen::VectorXd row(static_cast<Eigen::Index>(size()));
  const Eigen::VectorXd uc = u;
  fill_row(uc.data(), 1, row.data(), 1, scratch);
  return row;
}

Eigen::MatrixXd MultivariateBasis::eval_matrix(const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  require(u.cols() == dim(), ErrorKind::argument, "eval_matrix: dimension mismatch");
  std::size_t total = 0;
  for (int e : indices_.max_exponents()) total += static_cast<std::size_t>(e) + 1;
  std::vector<double> scratch(total);
  Eigen::MatrixXd a(u.rows(), static_cast<Eigen::Index>(size()));
  const Eigen::MatrixXd uc = u;
  for (Eigen::Index i = 0; i < uc.rows(); ++i)
    fill_row(uc.data() + i, uc.rows(), a.data() + i, a.rows(), scratch);
  return a;
}

}  // namespace uqsa
