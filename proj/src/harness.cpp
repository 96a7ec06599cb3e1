#include "uqsa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "uqsa/benchmarks.hpp"
#include "uqsa/error.hpp"
#include "uqsa/pce.hpp"
#include "uqsa/random.hpp"
#include "uqsa/sobol.hpp"

namespace uqsa {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::uint64_t kTestSetTag = 0x7e57'5e7ULL;

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sampler_name(PosteriorSamplerOptions::Method m) {
  switch (m) {
    case PosteriorSamplerOptions::Method::dense: return "dense";
    case PosteriorSamplerOptions::Method::spectral: return "spectral";
    default: return "automatic";
  }
}

PosteriorSamplerOptions::Method sampler_from(const std::string& s) {
  if (s == "automatic") return PosteriorSamplerOptions::Method::automatic;
  if (s == "dense") return PosteriorSamplerOptions::Method::dense;
  if (s == "spectral") return PosteriorSamplerOptions::Method::spectral;
  fail(ErrorKind::argument, "unknown sampler '" + s + "'");
}

template <typename F>
void run_error_guarded(ReplicationRow& row, F&& f) {
  try {
    f();
    row.ok = true;
  } catch (const Error& e) {
    row.ok = false;
    row.error = std::string(to_string(e.kind()));
  } catch (const std::exception&) {
    row.ok = false;
    row.error = "internal";
  }
}

}  // namespace

double q2(const Eigen::Ref<const Eigen::VectorXd>& predictions,
          const Eigen::Ref<const Eigen::VectorXd>& truths) {
  require(predictions.size() == truths.size(), ErrorKind::argument, "q2: size mismatch");
  require(truths.size() >= 2, ErrorKind::argument, "q2: need at least two test points");
  const double denom = (truths.array() - truths.mean()).square().sum();
  require(denom > 0.0, ErrorKind::degenerate, "q2: test responses have zero variance");
  return 1.0 - (truths - predictions).squaredNorm() / denom;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---- config --------------------------------------------------------------------

void ExperimentConfig::validate() const {
  require(!benchmark.empty(), ErrorKind::argument, "config: benchmark missing");
  require(run_pce || run_gp, ErrorKind::argument, "config: no method selected");
  require(!sizes.empty(), ErrorKind::argument, "config: design sizes missing");
  for (int n : sizes) require(n >= 2, ErrorKind::argument, "config: design sizes must be >= 2");
  require(replications >= 1, ErrorKind::argument, "config: replications must be >= 1");
  require(n_test >= 2, ErrorKind::argument, "config: n_test must be >= 2");
  require(threads >= 1, ErrorKind::argument, "config: threads must be >= 1");
  require(pce.p_min >= 0 && pce.p_min <= pce.p_max, ErrorKind::argument, "config: bad pce degree range");
  require(gp.starts >= 1 && gp.sobol_n >= 1 && gp.realizations >= 2, ErrorKind::argument,
          "config: bad gp options");
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  try {
    c.benchmark = j.at("benchmark").get<std::string>();
    const auto method = j.value("method", std::string("pce"));
    if (method == "pce") c.run_pce = true, c.run_gp = false;
    else if (method == "gp") c.run_pce = false, c.run_gp = true;
    else if (method == "both") c.run_pce = c.run_gp = true;
    else fail(ErrorKind::argument, "config: method must be pce, gp or both");
    c.sizes = j.at("sizes").get<std::vector<int>>();
    c.replications = j.value("replications", 100);
    c.n_test = j.value("n_test", 10000);
    c.design = sampling_method_from_string(j.value("design", std::string("lhs")));
    c.seed = j.value("seed", std::uint64_t{0});
    c.out = j.value("out", std::string());
    c.threads = j.value("threads", 1);
    if (j.contains("pce")) {
      const auto& p = j["pce"];
      c.pce.p_min = p.value("p_min", c.pce.p_min);
      c.pce.p_max = p.value("p_max", c.pce.p_max);
      c.pce.oversampling = p.value("oversampling", c.pce.oversampling);
    }
    if (j.contains("gp")) {
      const auto& g = j["gp"];
      c.gp.kernel.family = kernel_family_from_string(g.value("kernel", to_string(c.gp.kernel.family)));
      c.gp.kernel.mode = kernel_mode_from_string(g.value("mode", to_string(c.gp.kernel.mode)));
      c.gp.kernel.gamma = g.value("gamma", c.gp.kernel.gamma);
      if (g.contains("trend")) c.gp.trend = g["trend"];
      c.gp.estimator = hyper_estimator_from_string(g.value("estimator", to_string(c.gp.estimator)));
      c.gp.starts = g.value("starts", c.gp.starts);
      c.gp.indices = g.value("indices", c.gp.indices);
      c.gp.sobol_n = g.value("N", c.gp.sobol_n);
      c.gp.realizations = g.value("m", c.gp.realizations);
      c.gp.sampler.method = sampler_from(g.value("sampler", std::string("automatic")));
    }
  } catch (const Json::exception& e) {
    fail(ErrorKind::io, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

Json ExperimentConfig::to_json() const {
  return {{"benchmark", benchmark},
          {"method", run_pce && run_gp ? "both" : (run_pce ? "pce" : "gp")},
          {"sizes", sizes},
          {"replications", replications},
          {"n_test", n_test},
          {"design", to_string(design)},
          {"seed", seed},
          {"threads", threads},
          {"pce", {{"p_min", pce.p_min}, {"p_max", pce.p_max}, {"oversampling", pce.oversampling}}},
          {"gp",
           {{"kernel", to_string(gp.kernel.family)},
            {"mode", to_string(gp.kernel.mode)},
            {"gamma", gp.kernel.gamma},
            {"trend", gp.trend},
            {"estimator", to_string(gp.estimator)},
            {"starts", gp.starts},
            {"indices", gp.indices},
            {"N", gp.sobol_n},
            {"m", gp.realizations},
            {"sampler", sampler_name(gp.sampler.method)}}}};
}

// ---- summary -------------------------------------------------------------------

std::vector<SummaryRow> summarize(const std::vector<ReplicationRow>& rows,
                                  const std::vector<std::string>& names,
                                  const std::vector<double>& reference) {
  std::vector<SummaryRow> out;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t k = i;
    while (k < rows.size() && rows[k].method == rows[i].method && rows[k].n == rows[i].n) ++k;
    auto add = [&](const std::string& quantity, auto value_of, double ref) {
      std::vector<double> v;
      for (std::size_t t = i; t < k; ++t) {
        if (!rows[t].ok) continue;
        const double x = value_of(rows[t]);
        if (std::isfinite(x)) v.push_back(x);
      }
      SummaryRow s{rows[i].method, rows[i].n, quantity, static_cast<int>(v.size()),
                   quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75),
                   quantile(v, 1.0), kNaN};
      if (!std::isnan(ref) && !v.empty()) {
        double acc = 0.0;
        for (double x : v) acc += (x - ref) * (x - ref);
        s.rmse = std::sqrt(acc / static_cast<double>(v.size()));
      }
      out.push_back(s);
    };
    add("q2", [](const ReplicationRow& r) { return r.q2; }, kNaN);
    for (std::size_t j = 0; j < names.size(); ++j)
      add("S_" + names[j],
          [j](const ReplicationRow& r) { return j < r.first.size() ? r.first[j] : kNaN; },
          j < reference.size() ? reference[j] : kNaN);
    i = k;
  }
  return out;
}

// ---- runner --------------------------------------------------------------------

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const BenchmarkCase bench = benchmark(config.benchmark);
  const int d = bench.dim();
  const TrendSpec trend = trend_from_json(config.gp.trend, d);

  ExperimentResult result;
  result.config = config;
  result.names = bench.input.names();
  result.reference = bench.reference_first;

  const Eigen::MatrixXd x_test =
      sample(bench.input, config.n_test, SamplingMethod::mc, derive_seed(config.seed, {kTestSetTag})).points;
  const Eigen::VectorXd y_test = bench.evaluator(x_test);

  const std::size_t n_sizes = config.sizes.size();
  const std::size_t n_tasks = n_sizes * static_cast<std::size_t>(config.replications);
  std::vector<ReplicationRow> pce_rows(config.run_pce ? n_tasks : 0);
  std::vector<ReplicationRow> gp_rows(config.run_gp ? n_tasks : 0);

  auto task = [&](std::size_t t) {
    const int n = config.sizes[t / static_cast<std::size_t>(config.replications)];
    const int r = static_cast<int>(t % static_cast<std::size_t>(config.replications));
    const auto un = static_cast<std::uint64_t>(n);
    const auto ur = static_cast<std::uint64_t>(r);
    const std::uint64_t design_seed = derive_seed(config.seed, {un, ur});

    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::string design_error;
    try {
      x = sample(bench.input, n, config.design, design_seed).points;
      y = bench.evaluator(x);
    } catch (const Error& e) {
      design_error = std::string(to_string(e.kind()));
    }

    auto init = [&](ReplicationRow& row, const char* method) {
      row.method = method;
      row.n = n;
      row.replication = r;
      row.seed = design_seed;
      row.loo_normalized = kNaN;
      row.q2 = kNaN;
      row.sigma2 = kNaN;
      if (!design_error.empty()) row.error = design_error;
    };

    if (config.run_pce) {
      ReplicationRow& row = pce_rows[t];
      init(row, "pce");
      const auto start = std::chrono::steady_clock::now();
      if (design_error.empty())
        run_error_guarded(row, [&] {
          PceModel m = adaptive_fit_pce(bench.input, x, y, default_families(bench.input), config.pce.p_min,
                                        config.pce.p_max, config.pce.oversampling);
          m.set_design_seed(design_seed);
          row.q2 = q2(m.predict_rows(x_test), y_test);
          row.degree = m.selected_degree().value_or(-1);
          row.loo_normalized = m.loo_degenerate() ? kNaN : m.normalized_loo_error();
          row.first = sobol_indices(m, SobolRequest::first_order).first_order(d);
        });
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    if (config.run_gp) {
      ReplicationRow& row = gp_rows[t];
      init(row, "gp");
      const auto start = std::chrono::steady_clock::now();
      if (design_error.empty())
        run_error_guarded(row, [&] {
          GpFitOptions opt;
          opt.estimator = config.gp.estimator;
          opt.starts = config.gp.starts;
          opt.seed = derive_seed(config.seed, {un, ur, 1});
          const GpModel gp = fit_gp(x, y, trend, config.gp.kernel, opt);
          row.q2 = q2(gp.predict_mean_rows(x_test), y_test);
          row.theta = gp.kernel().lengthscales;
          row.sigma2 = gp.sigma2();
          row.boundary = gp.trace().at_boundary;
          if (config.gp.indices) {
            const SobolReport rep = gp_sobol_first_orders(gp, bench.input, config.gp.sobol_n, config.gp.realizations,
                                                          derive_seed(config.seed, {un, ur, 2}), config.gp.sampler);
            row.first = rep.first_order(d);
            row.first_std.assign(static_cast<std::size_t>(d), kNaN);
            for (const auto& e : rep.entries)
              if (e.type == IndexType::first && e.subset.size() == 1)
                row.first_std[static_cast<std::size_t>(e.subset[0])] = e.std;
          }
        });
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };

  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.threads), n_tasks);
  if (workers <= 1) {
    for (std::size_t t = 0; t < n_tasks; ++t) task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < n_tasks; t = next++) task(t);
      });
    for (auto& th : pool) th.join();
  }

  result.rows = std::move(pce_rows);
  result.rows.insert(result.rows.end(), std::make_move_iterator(gp_rows.begin()),
                     std::make_move_iterator(gp_rows.end()));
  result.summary = summarize(result.rows, result.names, result.reference);

  if (!config.out.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config.out, ec);
    require(!ec, ErrorKind::io, "cannot create '" + config.out + "'");
    const fs::path dir(config.out);
    auto open = [](const fs::path& p) {
      std::ofstream f(p);
      require(static_cast<bool>(f), ErrorKind::io, "cannot write '" + p.string() + "'");
      return f;
    };
    {
      auto f = open(dir / "replications.csv");
      write_replications_csv(f, result);
    }
    {
      auto f = open(dir / "summary.csv");
      write_summary_csv(f, result);
    }
    {
      auto f = open(dir / "timings.txt");
      write_timings(f, result);
    }
    write_json_file((dir / "config.json").string(), config.to_json());
  }

  for (std::size_t i = 0; i < result.rows.size(); i += static_cast<std::size_t>(config.replications)) {
    int failed = 0;
    for (int r = 0; r < config.replications; ++r) failed += !result.rows[i + static_cast<std::size_t>(r)].ok;
    if (2 * failed > config.replications)
      fail(ErrorKind::run_failed, result.rows[i].method + " at n = " + std::to_string(result.rows[i].n) + ": " +
                                      std::to_string(failed) + " of " + std::to_string(config.replications) +
                                      " replications failed");
  }
  return result;
}

// ---- output --------------------------------------------------------------------

void write_replications_csv(std::ostream& os, const ExperimentResult& r) {
  os << "method,n,replication,seed,status,error,q2,degree,loo_normalized,theta,sigma2,boundary";
  for (const auto& n : r.names) os << ",S_" << n;
  for (const auto& n : r.names) os << ",std_" << n;
  os << '\n';
  const auto d = r.names.size();
  for (const auto& row : r.rows) {
    os << row.method << ',' << row.n << ',' << row.replication << ',' << row.seed << ','
       << (row.ok ? "ok" : "failed") << ',' << row.error << ',' << num(row.ok ? row.q2 : kNaN) << ',';
    if (row.method == "pce" && row.ok) os << row.degree;
    os << ',' << num(row.ok ? row.loo_normalized : kNaN) << ',';
    for (Eigen::Index i = 0; i < row.theta.size(); ++i) os << (i ? ";" : "") << num(row.theta[i]);
    os << ',' << num(row.ok ? row.sigma2 : kNaN) << ',';
    if (row.method == "gp" && row.ok) os << (row.boundary ? 1 : 0);
    for (std::size_t j = 0; j < d; ++j) os << ',' << num(row.ok && j < row.first.size() ? row.first[j] : kNaN);
    for (std::size_t j = 0; j < d; ++j)
      os << ',' << num(row.ok && j < row.first_std.size() ? row.first_std[j] : kNaN);
    os << '\n';
  }
}

void write_summary_csv(std::ostream& os, const ExperimentResult& r) {
  os << "method,n,quantity,count,min,q25,median,q75,max,rmse,reference\n";
  for (const auto& s : r.summary) {
    double ref = kNaN;
    if (s.quantity.rfind("S_", 0) == 0) {
      const auto it = std::find(r.names.begin(), r.names.end(), s.quantity.substr(2));
      if (it != r.names.end()) ref = r.reference[static_cast<std::size_t>(it - r.names.begin())];
    }
    os << s.method << ',' << s.n << ',' << s.quantity << ',' << s.count << ',' << num(s.min) << ','
       << num(s.q25) << ',' << num(s.median) << ',' << num(s.q75) << ',' << num(s.max) << ',' << num(s.rmse)
       << ',' << num(ref) << '\n';
  }
}

void write_timings(std::ostream& os, const ExperimentResult& r) {
  os << "method n replication seconds\n";
  for (const auto& row : r.rows)
    os << row.method << ' ' << row.n << ' ' << row.replication << ' ' << row.seconds << '\n';
}

}  // namespace uqsa
