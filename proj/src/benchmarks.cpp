#include "uqsa/benchmarks.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <json.hpp>

#include "uqsa/error.hpp"

namespace uqsa {

namespace {

constexpr double kPi = std::numbers::pi;

void check_unit_cube(const Eigen::Ref<const Eigen::VectorXd>& x, const char* who) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    require(x[i] >= 0.0 && x[i] <= 1.0, ErrorKind::domain, std::string(who) + ": input outside the unit cube");
}

}  // namespace

double ishigami(const Eigen::Ref<const Eigen::VectorXd>& x, double a, double b) {
  require(x.size() == 3, ErrorKind::argument, "ishigami: expects 3 inputs");
  const double s2 = std::sin(x[1]);
  const double x3 = x[2] * x[2];
  return std::sin(x[0]) * (1.0 + b * x3 * x3) + a * s2 * s2;
}

IshigamiIndices ishigami_indices(double a, double b) {
  const double pi4 = std::pow(kPi, 4), pi8 = std::pow(kPi, 8);
  const double v1 = 0.5 * std::pow(1.0 + b * pi4 / 5.0, 2);
  const double v2 = a * a / 8.0;
  const double v13 = b * b * pi8 * 8.0 / 225.0;
  const double v = v1 + v2 + v13;
  return {v, {v1 / v, v2 / v, 0.0}, {(v1 + v13) / v, v2 / v, v13 / v}};
}

std::vector<double> g_sobol_default_a() {
  return {1, 2, 5, 10, 20, 50, 100, 500, 1000, 1000, 1000, 1000, 1000, 1000, 1000};
}

double g_sobol(const Eigen::Ref<const Eigen::VectorXd>& x, const std::vector<double>& a) {
  require(static_cast<std::size_t>(x.size()) == a.size(), ErrorKind::argument, "g_sobol: size mismatch");
  check_unit_cube(x, "g_sobol");
  double g = 1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ai = a[static_cast<std::size_t>(i)];
    g *= (std::abs(4.0 * x[i] - 2.0) + ai) / (1.0 + ai);
  }
  return g;
}

GSobolIndices g_sobol_indices(const std::vector<double>& a) {
  GSobolIndices out;
  double prod = 1.0;
  for (double ai : a) {
    require(ai >= 0.0, ErrorKind::argument, "g_sobol: a_i must be nonnegative");
    out.partial.push_back(1.0 / (3.0 * (1.0 + ai) * (1.0 + ai)));
    prod *= 1.0 + out.partial.back();
  }
  out.variance = prod - 1.0;
  for (double vi : out.partial) out.first.push_back(vi / out.variance);
  return out;
}

double morris(const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() == 20, ErrorKind::argument, "morris: expects 20 inputs");
  check_unit_cube(x, "morris");
  std::array<double, 20> w;
  for (int k = 0; k < 20; ++k) {
    const int i = k + 1;
    w[k] = (i == 3 || i == 5 || i == 7) ? 2.0 * (1.1 * x[k] / (x[k] + 0.1) - 0.5) : 2.0 * (x[k] - 0.5);
  }
  auto sign = [](int i) { return i % 2 == 0 ? 1.0 : -1.0; };
  double linear = 0.0, s_all = 0.0, q_all = 0.0, s6 = 0.0, p6 = 0.0, q6 = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int i = k + 1;
    linear += (i <= 10 ? 20.0 : sign(i)) * w[k];
    s_all += sign(i) * w[k];
    q_all += w[k] * w[k];
    if (i <= 6) {
      s6 += sign(i) * w[k];
      p6 += w[k];
      q6 += w[k] * w[k];
    }
  }
  // Sum over i < j of (-1)^(i+j) w_i w_j, with the block i, j <= 6 replaced by -15.
  const double pairs = 0.5 * (s_all * s_all - q_all) - 0.5 * (s6 * s6 - q6) - 15.0 * 0.5 * (p6 * p6 - q6);
  double triples = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int l = j + 1; l < 5; ++l) triples += w[i] * w[j] * w[l];
  return linear + pairs - 10.0 * triples + 5.0 * w[0] * w[1] * w[2] * w[3];
}

TrussSpec TrussSpec::standard() {
  TrussSpec s;
  s.nodes.resize(13, 2);
  for (int k = 0; k <= 6; ++k) s.nodes.row(k) << 4.0 * k, 0.0;
  for (int k = 1; k <= 6; ++k) s.nodes.row(6 + k) << 4.0 * k - 2.0, 2.0;
  for (int k = 0; k < 6; ++k) s.members.push_back({k, k + 1, MemberGroup::chord});
  for (int k = 1; k < 6; ++k) s.members.push_back({6 + k, 7 + k, MemberGroup::chord});
  for (int k = 1; k <= 6; ++k) {
    s.members.push_back({k - 1, 6 + k, MemberGroup::diagonal});
    s.members.push_back({6 + k, k, MemberGroup::diagonal});
  }
  s.load_nodes = {7, 8, 9, 10, 11, 12};
  s.pin_node = 0;
  s.roller_node = 6;
  s.monitored_node = 3;
  return s;
}

void TrussSpec::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  j["units"] = {{"length", "m"}, {"force", "N"}, {"modulus", "Pa"}, {"area", "m^2"}};
  j["inputs"] = {"E1", "E2", "A1", "A2", "P1", "P2", "P3", "P4", "P5", "P6"};
  auto& nodes_json = j["nodes"] = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < nodes.rows(); ++i)
    nodes_json.push_back({{"id", i}, {"x", nodes(i, 0)}, {"y", nodes(i, 1)}});
  auto& members_json = j["members"] = nlohmann::ordered_json::array();
  for (std::size_t m = 0; m < members.size(); ++m) {
    const auto& b = members[m];
    members_json.push_back({{"id", m},
                            {"from", b.from},
                            {"to", b.to},
                            {"group", b.group == MemberGroup::chord ? "chord (E1, A1)" : "diagonal (E2, A2)"}});
  }
  auto& loads = j["loads"] = nlohmann::ordered_json::array();
  for (int k = 0; k < 6; ++k)
    loads.push_back({{"input", "P" + std::to_string(k + 1)}, {"node", load_nodes[static_cast<std::size_t>(k)]},
                     {"direction", "-y"}});
  j["supports"] = {{{"node", pin_node}, {"type", "pin"}}, {{"node", roller_node}, {"type", "roller (y fixed)"}}};
  j["output"] = {{"node", monitored_node}, {"quantity", "vertical displacement, positive downward"}};
  os << j.dump(2) << '\n';
}

TrussSolution truss_solve(const TrussSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  require(x.size() == 10, ErrorKind::argument, "truss: expects 10 inputs {E1, E2, A1, A2, P1..P6}");
  for (int i = 0; i < 4; ++i)
    require(x[i] > 0.0 && std::isfinite(x[i]), ErrorKind::domain, "truss: E and A must be positive");
  for (int i = 4; i < 10; ++i) require(std::isfinite(x[i]), ErrorKind::domain, "truss: loads must be finite");
  const int nd = spec.dofs();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(nd, nd);
  for (const auto& m : spec.members) {
    const Eigen::Vector2d delta = spec.nodes.row(m.to) - spec.nodes.row(m.from);
    const double len = delta.norm();
    const Eigen::Vector2d c = delta / len;
    const double ea = m.group == MemberGroup::chord ? x[0] * x[2] : x[1] * x[3];
    const Eigen::Matrix2d kk = (ea / len) * c * c.transpose();
    const int a = 2 * m.from, b = 2 * m.to;
    k.block<2, 2>(a, a) += kk;
    k.block<2, 2>(b, b) += kk;
    k.block<2, 2>(a, b) -= kk;
    k.block<2, 2>(b, a) -= kk;
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(nd);
  for (int p = 0; p < 6; ++p) f[2 * spec.load_nodes[static_cast<std::size_t>(p)] + 1] -= x[4 + p];

  std::vector<bool> fixed(static_cast<std::size_t>(nd), false);
  fixed[static_cast<std::size_t>(2 * spec.pin_node)] = true;
  fixed[static_cast<std::size_t>(2 * spec.pin_node + 1)] = true;
  fixed[static_cast<std::size_t>(2 * spec.roller_node + 1)] = true;
  std::vector<int> free;
  for (int i = 0; i < nd; ++i)
    if (!fixed[static_cast<std::size_t>(i)]) free.push_back(i);
  const auto nf = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd kf(nf, nf);
  Eigen::VectorXd ff(nf);
  for (Eigen::Index i = 0; i < nf; ++i) {
    ff[i] = f[free[static_cast<std::size_t>(i)]];
    for (Eigen::Index j = 0; j < nf; ++j) kf(i, j) = k(free[static_cast<std::size_t>(i)], free[static_cast<std::size_t>(j)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(kf);
  const double scale = kf.diagonal().maxCoeff();
  require(llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 1e-7 * std::sqrt(scale),
          ErrorKind::mechanism, "truss: stiffness matrix is singular (mechanism)");
  const Eigen::VectorXd uf = llt.solve(ff);

  TrussSolution s;
  s.displacements = Eigen::VectorXd::Zero(nd);
  for (Eigen::Index i = 0; i < nf; ++i) s.displacements[free[static_cast<std::size_t>(i)]] = uf[i];
  s.external = f;
  s.reactions = k * s.displacements - f;
  for (Eigen::Index i = 0; i < nf; ++i) s.reactions[free[static_cast<std::size_t>(i)]] = 0.0;
  s.deflection = -s.displacements[2 * spec.monitored_node + 1];
  return s;
}

double truss_deflection(const TrussSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return truss_solve(spec, x).deflection;
}

double truss_deflection(const Eigen::Ref<const Eigen::VectorXd>& x) {
  static const TrussSpec spec = TrussSpec::standard();
  return truss_deflection(spec, x);
}

std::vector<std::string> benchmark_names() { return {"ishigami", "g_sobol", "morris", "truss"}; }

BenchmarkCase benchmark(const std::string& name) {
  BenchmarkCase c;
  c.name = name;
  if (name == "ishigami") {
    c.input = InputModel::iid(3, Marginal::uniform(-kPi, kPi));
    c.evaluator = pointwise([](const Eigen::Ref<const Eigen::VectorXd>& x) { return ishigami(x); });
    const auto idx = ishigami_indices();
    c.reference_first.assign(idx.first.begin(), idx.first.end());
    c.reference_source = "analytic";
  } else if (name == "g_sobol") {
    const auto a = g_sobol_default_a();
    c.input = InputModel::iid(static_cast<int>(a.size()), Marginal::uniform(0.0, 1.0));
    c.evaluator = pointwise([a](const Eigen::Ref<const Eigen::VectorXd>& x) { return g_sobol(x, a); });
    c.reference_first = g_sobol_indices(a).first;
    c.reference_source = "analytic";
  } else if (name == "morris") {
    c.input = InputModel::iid(20, Marginal::uniform(0.0, 1.0));
    c.evaluator = pointwise([](const Eigen::Ref<const Eigen::VectorXd>& x) { return morris(x); });
    c.reference_first = {0.017, 0.005, 0.008, 0.009, 0.016, 0.000, 0.069, 0.100, 0.150, 0.100,
                         0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0,   0.0};
    c.reference_source = "published";
  } else if (name == "truss") {
    c.input = InputModel({Marginal::lognormal(2.1e11, 2.1e10), Marginal::lognormal(2.1e11, 2.1e10),
                          Marginal::lognormal(2.0e-3, 2.0e-4), Marginal::lognormal(1.0e-3, 1.0e-4),
                          Marginal::gumbel(5.0e4, 7.5e3), Marginal::gumbel(5.0e4, 7.5e3),
                          Marginal::gumbel(5.0e4, 7.5e3), Marginal::gumbel(5.0e4, 7.5e3),
                          Marginal::gumbel(5.0e4, 7.5e3), Marginal::gumbel(5.0e4, 7.5e3)},
                         {"E1", "E2", "A1", "A2", "P1", "P2", "P3", "P4", "P5", "P6"});
    c.evaluator = pointwise([](const Eigen::Ref<const Eigen::VectorXd>& x) { return truss_deflection(x); });
    c.reference_first = {0.365, 0.011, 0.365, 0.011, 0.002, 0.035, 0.075, 0.074, 0.035, 0.003};
    c.reference_source = "published";
  } else {
    fail(ErrorKind::argument, "unknown benchmark '" + name + "'");
  }
  return c;
}

SobolReport reference_indices(const BenchmarkCase& c) {
  SobolReport r;
  for (int i = 0; i < c.dim(); ++i) {
    SobolEntry e;
    e.subset = {i};
    e.type = IndexType::first;
    e.estimate = c.reference_first[static_cast<std::size_t>(i)];
    e.estimator = c.reference_source;
    r.entries.push_back(e);
  }
  return r;
}

SobolReport recompute_reference(const BenchmarkCase& c, long long n, std::uint64_t seed) {
  std::vector<int> all(static_cast<std::size_t>(c.dim()));
  for (int i = 0; i < c.dim(); ++i) all[static_cast<std::size_t>(i)] = i;
  return pick_freeze_indices(c.evaluator, c.input, n, seed, all, {});
}

}  // namespace uqsa
