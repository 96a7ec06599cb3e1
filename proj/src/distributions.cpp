#include "uqsa/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/extreme_value.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/uniform.hpp>

#include "uqsa/error.hpp"

namespace uqsa {

namespace bm = boost::math;

namespace {

const bm::normal& standard_normal() {
  static const bm::normal n(0.0, 1.0);
  return n;
}

double lognormal_zeta(const LognormalLaw& l) {
  return std::sqrt(std::log1p((l.std / l.mean) * (l.std / l.mean)));
}
double lognormal_lambda(const LognormalLaw& l) {
  const double z = lognormal_zeta(l);
  return std::log(l.mean) - 0.5 * z * z;
}
double gumbel_scale(const GumbelLaw& g) { return g.std * std::sqrt(6.0) / std::numbers::pi; }
double gumbel_location(const GumbelLaw& g) {
  return g.mean - std::numbers::egamma * gumbel_scale(g);
}

// Applies f to the Boost distribution object equivalent to a non-uniform
// law. Beta laws are expressed on t = (x + 1) / 2.
template <typename F>
auto with_boost(const Marginal::Law& law, F&& f) {
  return std::visit(
      [&](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, UniformLaw>) {
          return f(bm::uniform_distribution<double>(l.lower, l.upper));
        } else if constexpr (std::is_same_v<L, GaussianLaw>) {
          return f(bm::normal(l.mean, l.std));
        } else if constexpr (std::is_same_v<L, LognormalLaw>) {
          return f(bm::lognormal(lognormal_lambda(l), lognormal_zeta(l)));
        } else if constexpr (std::is_same_v<L, GumbelLaw>) {
          return f(bm::extreme_value(gumbel_location(l), gumbel_scale(l)));
        } else if constexpr (std::is_same_v<L, GammaLaw>) {
          return f(bm::gamma_distribution<double>(l.shape, 1.0));
        } else {
          return f(bm::beta_distribution<double>(l.b + 1.0, l.a + 1.0));
        }
      },
      law);
}

bool is_beta(const Marginal::Law& law) { return std::holds_alternative<BetaLaw>(law); }

}  // namespace

Marginal Marginal::uniform(double lower, double upper) {
  require(std::isfinite(lower) && std::isfinite(upper) && upper > lower, ErrorKind::argument,
          "uniform: requires finite lower < upper");
  return Marginal(UniformLaw{lower, upper});
}

Marginal Marginal::gaussian(double mean, double std) {
  require(std::isfinite(mean) && std > 0.0 && std::isfinite(std), ErrorKind::argument,
          "gaussian: requires std > 0");
  return Marginal(GaussianLaw{mean, std});
}

Marginal Marginal::lognormal(double mean, double std) {
  require(mean > 0.0 && std > 0.0 && std::isfinite(mean) && std::isfinite(std),
          ErrorKind::argument, "lognormal: requires mean > 0 and std > 0");
  return Marginal(LognormalLaw{mean, std});
}

Marginal Marginal::gumbel(double mean, double std) {
  require(std::isfinite(mean) && std > 0.0 && std::isfinite(std), ErrorKind::argument,
          "gumbel: requires std > 0");
  return Marginal(GumbelLaw{mean, std});
}

Marginal Marginal::gamma(double shape) {
  require(shape > 0.0 && std::isfinite(shape), ErrorKind::argument, "gamma: requires shape > 0");
  return Marginal(GammaLaw{shape});
}

Marginal Marginal::beta(double a, double b) {
  require(a > -1.0 && b > -1.0 && std::isfinite(a) && std::isfinite(b), ErrorKind::argument,
          "beta: requires a, b > -1");
  return Marginal(BetaLaw{a, b});
}

std::string Marginal::tag() const {
  return std::visit(
      [](const auto& l) -> std::string {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, UniformLaw>) return "uniform";
        else if constexpr (std::is_same_v<L, GaussianLaw>) return "gaussian";
        else if constexpr (std::is_same_v<L, LognormalLaw>) return "lognormal";
        else if constexpr (std::is_same_v<L, GumbelLaw>) return "gumbel";
        else if constexpr (std::is_same_v<L, GammaLaw>) return "gamma";
        else return "beta";
      },
      law_);
}

double Marginal::quantile(double q) const {
  require(q > 0.0 && q < 1.0, ErrorKind::domain, "quantile: probability must lie in (0, 1)");
  // Upper tail through the complement keeps precision near q = 1.
  double v = with_boost(law_, [q](const auto& d) {
    return q <= 0.5 ? bm::quantile(d, q) : bm::quantile(bm::complement(d, 1.0 - q));
  });
  return is_beta(law_) ? 2.0 * v - 1.0 : v;
}

double Marginal::cdf(double x) const {
  require(in_support(x), ErrorKind::domain, "cdf: value outside support");
  const double t = is_beta(law_) ? 0.5 * (x + 1.0) : x;
  return with_boost(law_, [t](const auto& d) { return bm::cdf(d, t); });
}

double Marginal::mean() const {
  const double m = with_boost(law_, [](const auto& d) { return bm::mean(d); });
  return is_beta(law_) ? 2.0 * m - 1.0 : m;
}

double Marginal::std_dev() const {
  const double s = with_boost(law_, [](const auto& d) { return bm::standard_deviation(d); });
  return is_beta(law_) ? 2.0 * s : s;
}

bool Marginal::in_support(double x) const {
  if (!std::isfinite(x)) return false;
  return std::visit(
      [x](const auto& l) {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, UniformLaw>) return x >= l.lower && x <= l.upper;
        else if constexpr (std::is_same_v<L, LognormalLaw> || std::is_same_v<L, GammaLaw>)
          return x > 0.0;
        else if constexpr (std::is_same_v<L, BetaLaw>) return x >= -1.0 && x <= 1.0;
        else return true;
      },
      law_);
}

StandardSpace Marginal::standard_space() const noexcept {
  return std::holds_alternative<UniformLaw>(law_) ? StandardSpace::uniform
                                                  : StandardSpace::gaussian;
}

double Marginal::to_standard(double x) const {
  require(in_support(x), ErrorKind::domain, "to_standard: value outside support of " + tag());
  if (const auto* u = std::get_if<UniformLaw>(&law_))
    return (2.0 * x - u->lower - u->upper) / (u->upper - u->lower);
  if (const auto* g = std::get_if<GaussianLaw>(&law_)) return (x - g->mean) / g->std;
  const double t = is_beta(law_) ? 0.5 * (x + 1.0) : x;
  const double p = with_boost(law_, [t](const auto& d) { return bm::cdf(d, t); });
  if (p <= 0.5) {
    require(p > 0.0, ErrorKind::domain, "to_standard: value at the lower support edge");
    return bm::quantile(standard_normal(), p);
  }
  const double c = with_boost(law_, [t](const auto& d) { return bm::cdf(bm::complement(d, t)); });
  require(c > 0.0, ErrorKind::domain, "to_standard: value at the upper support edge");
  return -bm::quantile(standard_normal(), c);
}

double Marginal::from_standard(double u) const {
  require(std::isfinite(u), ErrorKind::domain, "from_standard: non-finite coordinate");
  if (const auto* l = std::get_if<UniformLaw>(&law_))
    return 0.5 * (l->lower + l->upper) + 0.5 * (l->upper - l->lower) * u;
  if (const auto* g = std::get_if<GaussianLaw>(&law_)) return g->mean + g->std * u;
  double v;
  if (u <= 0.0) {
    const double p = bm::cdf(standard_normal(), u);
    v = with_boost(law_, [p](const auto& d) { return bm::quantile(d, p); });
  } else {
    const double c = bm::cdf(standard_normal(), -u);
    v = with_boost(law_, [c](const auto& d) { return bm::quantile(bm::complement(d, c)); });
  }
  return is_beta(law_) ? 2.0 * v - 1.0 : v;
}

std::pair<double, double> Marginal::native_parameters() const {
  if (const auto* l = std::get_if<LognormalLaw>(&law_))
    return {lognormal_lambda(*l), lognormal_zeta(*l)};
  if (const auto* g = std::get_if<GumbelLaw>(&law_))
    return {gumbel_location(*g), gumbel_scale(*g)};
  fail(ErrorKind::argument, "native_parameters: only defined for lognormal and gumbel laws");
}

InputModel::InputModel(std::vector<Marginal> marginals, std::vector<std::string> names)
    : marginals_(std::move(marginals)), names_(std::move(names)) {
  require(!marginals_.empty(), ErrorKind::argument, "InputModel: dimension must be >= 1");
  if (names_.empty()) {
    for (std::size_t i = 0; i < marginals_.size(); ++i) names_.push_back("x" + std::to_string(i + 1));
  }
  require(names_.size() == marginals_.size(), ErrorKind::argument,
          "InputModel: one name per marginal required");
}

InputModel InputModel::iid(int d, const Marginal& m) {
  require(d >= 1, ErrorKind::argument, "InputModel: dimension must be >= 1");
  return InputModel(std::vector<Marginal>(static_cast<std::size_t>(d), m));
}

Eigen::VectorXd InputModel::to_standard(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  require(x.size() == dim(), ErrorKind::argument, "to_standard: dimension mismatch");
  Eigen::VectorXd u(dim());
  for (int i = 0; i < dim(); ++i) u[i] = marginals_[i].to_standard(x[i]);
  return u;
}

Eigen::VectorXd InputModel::from_standard(const Eigen::Ref<const Eigen::VectorXd>& u) const {
  require(u.size() == dim(), ErrorKind::argument, "from_standard: dimension mismatch");
  Eigen::VectorXd x(dim());
  for (int i = 0; i < dim(); ++i) x[i] = marginals_[i].from_standard(u[i]);
  return x;
}

Eigen::MatrixXd InputModel::to_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  require(x.cols() == dim(), ErrorKind::argument, "to_standard: dimension mismatch");
  Eigen::MatrixXd u(x.rows(), x.cols());
  for (int j = 0; j < dim(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i) u(i, j) = marginals_[j].to_standard(x(i, j));
  return u;
}

Eigen::MatrixXd InputModel::from_standard_rows(const Eigen::Ref<const Eigen::MatrixXd>& u) const {
  require(u.cols() == dim(), ErrorKind::argument, "from_standard: dimension mismatch");
  Eigen::MatrixXd x(u.rows(), u.cols());
  for (int j = 0; j < dim(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i) x(i, j) = marginals_[j].from_standard(u(i, j));
  return x;
}

std::string to_string(SamplingMethod m) { return m == SamplingMethod::mc ? "mc" : "lhs"; }

SamplingMethod sampling_method_from_string(const std::string& s) {
  if (s == "mc") return SamplingMethod::mc;
  if (s == "lhs") return SamplingMethod::lhs;
  fail(ErrorKind::argument, "unknown sampling method '" + s + "'");
}

Eigen::MatrixXd sample_points(const InputModel& model, int n, SamplingMethod method, Rng& rng) {
  require(n >= 1, ErrorKind::argument, "sample: n must be >= 1");
  const int d = model.dim();
  Eigen::MatrixXd x(n, d);
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int j = 0; j < d; ++j) {
    const Marginal& m = model.marginal(j);
    if (method == SamplingMethod::lhs) {
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng.engine());
    }
    for (int i = 0; i < n; ++i) {
      double q = rng.uniform();
      if (method == SamplingMethod::lhs) {
        q = (perm[static_cast<std::size_t>(i)] + q) / n;
        // (k + U)/n may round up to the next stratum edge when n is large.
        q = std::min(q, std::nextafter((perm[static_cast<std::size_t>(i)] + 1.0) / n, 0.0));
      }
      x(i, j) = m.quantile(q);
    }
  }
  return x;
}

DesignMatrix sample(const InputModel& model, int n, SamplingMethod method, std::uint64_t seed) {
  Rng rng(seed);
  return DesignMatrix{sample_points(model, n, method, rng), method, seed};
}

void write_design_csv(std::ostream& os, const Eigen::Ref<const Eigen::MatrixXd>& points,
                      const std::vector<std::string>& names) {
  require(static_cast<Eigen::Index>(names.size()) == points.cols(), ErrorKind::argument,
          "write_design_csv: one name per column required");
  for (std::size_t j = 0; j < names.size(); ++j) os << (j ? "," : "") << names[j];
  os << '\n';
  const auto old = os.precision(17);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    for (Eigen::Index j = 0; j < points.cols(); ++j) os << (j ? "," : "") << points(i, j);
    os << '\n';
  }
  os.precision(old);
}

Eigen::MatrixXd read_design_csv(std::istream& is, std::vector<std::string>* names) {
  std::string line;
  require(static_cast<bool>(std::getline(is, line)), ErrorKind::io, "read_design_csv: empty input");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorKind::io, "read_design_csv: bad number '" + cell + "'");
      }
    }
    require(row.size() == header.size(), ErrorKind::io, "read_design_csv: ragged row");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < header.size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  if (names) *names = std::move(header);
  return x;
}

}  // namespace uqsa
