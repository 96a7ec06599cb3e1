#include "uqsa/serialize.hpp"

#include <fstream>

#include "uqsa/error.hpp"

namespace uqsa {

namespace {

Json vector_to_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, Eigen::Index cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto row = vector_from_json(j[i]);
    require(row.size() == cols, ErrorKind::io, "json: ragged matrix");
    m.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return m;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorKind::io, std::string("malformed json: ") + e.what());
  }
}

}  // namespace

Json marginal_to_json(const Marginal& m) {
  return std::visit(
      [](const auto& l) -> Json {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, UniformLaw>) return {{"law", "uniform"}, {"lower", l.lower}, {"upper", l.upper}};
        else if constexpr (std::is_same_v<L, GaussianLaw>) return {{"law", "gaussian"}, {"mean", l.mean}, {"std", l.std}};
        else if constexpr (std::is_same_v<L, LognormalLaw>) return {{"law", "lognormal"}, {"mean", l.mean}, {"std", l.std}};
        else if constexpr (std::is_same_v<L, GumbelLaw>) return {{"law", "gumbel"}, {"mean", l.mean}, {"std", l.std}};
        else if constexpr (std::is_same_v<L, GammaLaw>) return {{"law", "gamma"}, {"shape", l.shape}};
        else return {{"law", "beta"}, {"a", l.a}, {"b", l.b}};
      },
      m.law());
}

Marginal marginal_from_json(const Json& j) {
  return guarded([&] {
    const auto law = j.at("law").get<std::string>();
    if (law == "uniform") return Marginal::uniform(j.at("lower").get<double>(), j.at("upper").get<double>());
    if (law == "gaussian") return Marginal::gaussian(j.at("mean").get<double>(), j.at("std").get<double>());
    if (law == "lognormal") return Marginal::lognormal(j.at("mean").get<double>(), j.at("std").get<double>());
    if (law == "gumbel") return Marginal::gumbel(j.at("mean").get<double>(), j.at("std").get<double>());
    if (law == "gamma") return Marginal::gamma(j.at("shape").get<double>());
    if (law == "beta") return Marginal::beta(j.at("a").get<double>(), j.at("b").get<double>());
    fail(ErrorKind::io, "unknown marginal law '" + law + "'");
  });
}

Json input_model_to_json(const InputModel& model) {
  Json vars = Json::array();
  for (int i = 0; i < model.dim(); ++i) {
    Json v = marginal_to_json(model.marginal(i));
    v["name"] = model.names()[static_cast<std::size_t>(i)];
    vars.push_back(v);
  }
  return {{"variables", vars}};
}

InputModel input_model_from_json(const Json& j) {
  return guarded([&] {
    std::vector<Marginal> marginals;
    std::vector<std::string> names;
    for (const auto& v : j.at("variables")) {
      marginals.push_back(marginal_from_json(v));
      names.push_back(v.value("name", "x" + std::to_string(names.size() + 1)));
    }
    return InputModel(std::move(marginals), std::move(names));
  });
}

Json trend_to_json(const TrendSpec& t) { return Json(t.exponents()); }

TrendSpec trend_from_json(const Json& j, int dim) {
  return guarded([&] {
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      if (s == "constant") return TrendSpec::constant(dim);
      if (s == "linear") return TrendSpec::linear(dim);
      fail(ErrorKind::io, "unknown trend '" + s + "'");
    }
    auto e = j.get<std::vector<std::vector<int>>>();
    for (const auto& row : e)
      require(static_cast<int>(row.size()) == dim, ErrorKind::io, "trend exponents must have one entry per input");
    return TrendSpec(std::move(e));
  });
}

Json PceSerializer::to_json(const PceModel& m) {
  Json families = Json::array();
  for (const auto& f : m.basis().families()) families.push_back({{"family", f.tag()}, {"a", f.a()}, {"b", f.b()}});
  Json trials = Json::array();
  for (const auto& t : m.trials_)
    trials.push_back({{"degree", t.degree}, {"basis_size", t.basis_size}, {"loo_error", t.loo_error}});
  Json j = {{"type", "pce"},
            {"input", input_model_to_json(m.input())},
            {"families", families},
            {"indices", m.basis().indices().indices()},
            {"coefficients", vector_to_json(m.coefficients())},
            {"design_size", m.n_},
            {"design_seed", m.design_seed_},
            {"empirical_error", m.emp_error_},
            {"loo_error", m.loo_degenerate_ ? Json(nullptr) : Json(m.loo_error_)},
            {"loo_degenerate", m.loo_degenerate_},
            {"response_variance", m.response_variance_},
            {"degree_trials", trials}};
  if (m.degree_) j["selected_degree"] = *m.degree_;
  return j;
}

PceModel PceSerializer::from_json(const Json& j) {
  return guarded([&] {
    auto input = input_model_from_json(j.at("input"));
    std::vector<PolynomialFamily> families;
    for (const auto& f : j.at("families"))
      families.push_back(PolynomialFamily::from_tag(f.at("family").get<std::string>(), f.value("a", 0.0), f.value("b", 0.0)));
    MultiIndexSet set(input.dim(), j.at("indices").get<std::vector<MultiIndex>>());
    PceModel m(std::move(input), MultivariateBasis(std::move(families), std::move(set)),
               vector_from_json(j.at("coefficients")));
    m.n_ = j.value("design_size", 0);
    m.design_seed_ = j.value("design_seed", std::uint64_t{0});
    m.emp_error_ = j.value("empirical_error", 0.0);
    m.loo_degenerate_ = j.value("loo_degenerate", false);
    if (!m.loo_degenerate_ && j.contains("loo_error") && j["loo_error"].is_number())
      m.loo_error_ = j["loo_error"].get<double>();
    m.response_variance_ = j.value("response_variance", 0.0);
    if (j.contains("degree_trials"))
      for (const auto& t : j["degree_trials"])
        m.trials_.push_back({t.at("degree").get<int>(), t.at("basis_size").get<std::size_t>(),
                             t.at("loo_error").is_number() ? t["loo_error"].get<double>()
                                                           : std::numeric_limits<double>::infinity()});
    if (j.contains("selected_degree")) m.degree_ = j["selected_degree"].get<int>();
    return m;
  });
}

Json GpSerializer::to_json(const GpModel& m) {
  const auto& k = m.kernel();
  Json starts = Json::array();
  for (const auto& s : m.trace().starts)
    starts.push_back({{"start_log_theta", vector_to_json(s.start_log_theta)},
                      {"final_log_theta", vector_to_json(s.final_log_theta)},
                      {"objective", s.objective},
                      {"iterations", s.iterations}});
  Json j = {{"type", "gp"},
            {"design", matrix_to_json(m.design())},
            {"responses", vector_to_json(m.responses())},
            {"trend", trend_to_json(m.trend())},
            {"kernel",
             {{"family", to_string(k.family)},
              {"mode", to_string(k.mode)},
              {"gamma", k.gamma},
              {"lengthscales", vector_to_json(k.lengthscales)},
              {"variance", k.variance}}},
            {"beta", vector_to_json(m.beta())},
            {"nugget", m.nugget()},
            {"optimizer",
             {{"estimator", to_string(m.trace().estimator)},
              {"best_objective", m.trace().best_objective},
              {"at_boundary", m.trace().at_boundary},
              {"starts", starts}}}};
  if (m.noisy()) j["noise_std"] = vector_to_json(m.noise_std());
  return j;
}

GpModel GpSerializer::from_json(const Json& j) {
  return guarded([&] {
    const auto& kj = j.at("kernel");
    Kernel k;
    k.family = kernel_family_from_string(kj.at("family").get<std::string>());
    k.mode = kernel_mode_from_string(kj.at("mode").get<std::string>());
    k.gamma = kj.value("gamma", 1.0);
    k.lengthscales = vector_from_json(kj.at("lengthscales"));
    k.variance = kj.at("variance").get<double>();
    const auto& dj = j.at("design");
    require(!dj.empty(), ErrorKind::io, "gp json: empty design");
    const auto d = static_cast<Eigen::Index>(dj[0].size());
    Eigen::VectorXd noise;
    if (j.contains("noise_std")) noise = vector_from_json(j["noise_std"]);
    GpModel m = GpModel::condition(matrix_from_json(dj, d), vector_from_json(j.at("responses")),
                                   trend_from_json(j.at("trend"), static_cast<int>(d)), k, false, noise);
    if (j.contains("optimizer")) {
      const auto& o = j["optimizer"];
      m.trace_.estimator = hyper_estimator_from_string(o.value("estimator", std::string("max_likelihood")));
      m.trace_.best_objective = o.value("best_objective", 0.0);
      m.trace_.at_boundary = o.value("at_boundary", false);
      if (o.contains("starts"))
        for (const auto& s : o["starts"])
          m.trace_.starts.push_back({vector_from_json(s.at("start_log_theta")), vector_from_json(s.at("final_log_theta")),
                                     s.at("objective").get<double>(), s.at("iterations").get<int>()});
    }
    return m;
  });
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "'");
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const Json::exception& e) {
    fail(ErrorKind::io, "cannot parse '" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorKind::io, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

}  // namespace uqsa
