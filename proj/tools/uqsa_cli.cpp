// Command-line front end: surrogate fitting, Sobol' indices, benchmarks and
// replicated experiments.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "uqsa/benchmarks.hpp"
#include "uqsa/error.hpp"
#include "uqsa/harness.hpp"
#include "uqsa/pce.hpp"
#include "uqsa/serialize.hpp"
#include "uqsa/sobol.hpp"

using namespace uqsa;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  int threads = 1;
};

// Output goes to --out when given, else stdout.
template <typename F>
void emit(const std::string& path, F&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  require(static_cast<bool>(f), ErrorKind::io, "cannot write '" + path + "'");
  write(f);
}

struct Data {
  InputModel input;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

// Either a benchmark sampled by LHS, or an input model JSON plus a CSV whose
// last column is the response.
Data load_data(const std::string& bench, int n, const std::string& input_path, const std::string& data_path,
               std::uint64_t seed) {
  if (!bench.empty()) {
    require(n > 0, ErrorKind::argument, "-n is required with --benchmark");
    BenchmarkCase c = benchmark(bench);
    Eigen::MatrixXd x = sample(c.input, n, SamplingMethod::lhs, seed).points;
    Eigen::VectorXd y = c.evaluator(x);
    return {c.input, std::move(x), std::move(y)};
  }
  require(!input_path.empty() && !data_path.empty(), ErrorKind::argument,
          "give --benchmark or both --input and --data");
  InputModel input = input_model_from_json(read_json_file(input_path));
  std::ifstream f(data_path);
  require(static_cast<bool>(f), ErrorKind::io, "cannot open '" + data_path + "'");
  const Eigen::MatrixXd table = read_design_csv(f);
  require(table.cols() == input.dim() + 1, ErrorKind::io, "data must have d input columns plus a response column");
  return {input, table.leftCols(input.dim()), table.col(input.dim())};
}

void write_report(const SobolReport& rep, const std::string& out) {
  emit(out, [&](std::ostream& os) { rep.write_csv(os); });
}

int run(int argc, char** argv) {
  CLI::App app{"Polynomial chaos and kriging surrogates with Sobol' sensitivity analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Master seed");
  app.add_option("--out", common.out, "Output file (directory for experiment)");
  app.add_option("--threads", common.threads, "Worker threads for experiments")->check(CLI::PositiveNumber);

  std::string bench, input_path, data_path;
  int n = 0;

  auto* fit_pce_cmd = app.add_subcommand("fit-pce", "Fit a degree-adaptive PCE and print it as JSON");
  int p_min = 1, p_max = 8;
  double oversampling = 2.0;
  for (auto* c : {fit_pce_cmd}) {
    c->add_option("--benchmark", bench, "Sample this benchmark by LHS");
    c->add_option("-n", n, "Design size with --benchmark");
    c->add_option("--input", input_path, "Input model JSON");
    c->add_option("--data", data_path, "CSV with inputs and a trailing response column");
  }
  fit_pce_cmd->add_option("--p-min", p_min);
  fit_pce_cmd->add_option("--p-max", p_max);
  fit_pce_cmd->add_option("--oversampling", oversampling);

  auto* fit_gp_cmd = app.add_subcommand("fit-gp", "Fit a kriging model and print it as JSON");
  std::string kernel = "matern52", mode = "tensorized", trend = "constant", estimator = "ml";
  double gamma = 1.0;
  int starts = 10;
  fit_gp_cmd->add_option("--benchmark", bench);
  fit_gp_cmd->add_option("-n", n);
  fit_gp_cmd->add_option("--input", input_path);
  fit_gp_cmd->add_option("--data", data_path);
  fit_gp_cmd->add_option("--kernel", kernel, "squared_exponential|matern12|matern32|matern52|gamma_exponential");
  fit_gp_cmd->add_option("--mode", mode, "isotropic|tensorized");
  fit_gp_cmd->add_option("--gamma", gamma);
  fit_gp_cmd->add_option("--trend", trend, "constant, linear or a JSON list of exponent tuples");
  fit_gp_cmd->add_option("--estimator", estimator, "ml|loo");
  fit_gp_cmd->add_option("--starts", starts);

  auto* sobol_cmd = app.add_subcommand("sobol", "Sobol' indices of a saved model or a benchmark");
  std::string model_path, estimator_name = "auto";
  long long big_n = 10000;
  int m = 100;
  bool all_subsets = false;
  sobol_cmd->add_option("--model", model_path, "Model JSON from fit-pce or fit-gp");
  sobol_cmd->add_option("--benchmark", bench, "Pick-freeze on the true benchmark function");
  sobol_cmd->add_option("--estimator", estimator_name, "auto|analytic|pick-freeze|gp");
  sobol_cmd->add_option("-N", big_n, "Pick-freeze sample size");
  sobol_cmd->add_option("-m", m, "GP realizations");
  sobol_cmd->add_flag("--all-subsets", all_subsets, "PCE: every partial index present in the expansion");

  auto* bench_cmd = app.add_subcommand("benchmark", "Benchmark registry");
  bench_cmd->require_subcommand(1);
  auto* list_cmd = bench_cmd->add_subcommand("list", "Names, dimensions and reference indices");
  auto* eval_cmd = bench_cmd->add_subcommand("evaluate", "Evaluate at the rows of a CSV");
  std::string name, points_path;
  eval_cmd->add_option("name", name)->required();
  eval_cmd->add_option("--points", points_path)->required();
  auto* truss_cmd = bench_cmd->add_subcommand("export-truss", "Truss geometry as JSON");
  auto* ref_cmd = bench_cmd->add_subcommand("reference", "Stored or recomputed reference indices");
  ref_cmd->add_option("name", name)->required();
  long long ref_n = 0;
  ref_cmd->add_option("-N", ref_n, "Recompute by pick-freeze with this sample size");

  auto* exp_cmd = app.add_subcommand("experiment", "Replicated LHS study from a JSON config");
  std::string config_path;
  exp_cmd->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return exit_code(ErrorKind::argument);
  }

  if (fit_pce_cmd->parsed()) {
    const Data data = load_data(bench, n, input_path, data_path, common.seed);
    PceModel model = adaptive_fit_pce(data.input, data.x, data.y, default_families(data.input), p_min, p_max,
                                      oversampling);
    model.set_design_seed(common.seed);
    emit(common.out, [&](std::ostream& os) { os << PceSerializer::to_json(model).dump(2) << '\n'; });
  } else if (fit_gp_cmd->parsed()) {
    const Data data = load_data(bench, n, input_path, data_path, common.seed);
    Kernel k;
    k.family = kernel_family_from_string(kernel);
    k.mode = kernel_mode_from_string(mode);
    k.gamma = gamma;
    Json trend_json = (trend == "constant" || trend == "linear") ? Json(trend) : Json::parse(trend);
    GpFitOptions opt;
    opt.estimator = hyper_estimator_from_string(estimator);
    opt.starts = starts;
    opt.seed = derive_seed(common.seed, {1});
    const GpModel gp = fit_gp(data.x, data.y, trend_from_json(trend_json, data.input.dim()), k, opt);
    Json j = GpSerializer::to_json(gp);
    j["input"] = input_model_to_json(data.input);
    emit(common.out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  } else if (sobol_cmd->parsed()) {
    if (!bench.empty()) {
      const BenchmarkCase c = benchmark(bench);
      write_report(recompute_reference(c, big_n, common.seed), common.out);
      return 0;
    }
    require(!model_path.empty(), ErrorKind::argument, "give --model or --benchmark");
    const Json j = read_json_file(model_path);
    const std::string type = j.value("type", std::string());
    if (type == "pce") {
      const PceModel model = PceSerializer::from_json(j);
      const int d = model.dim();
      std::vector<int> all(static_cast<std::size_t>(d));
      for (int i = 0; i < d; ++i) all[static_cast<std::size_t>(i)] = i;
      if (estimator_name == "pick-freeze") {
        write_report(pick_freeze_indices(pce_evaluator(model), model.input(), big_n, common.seed, all, all),
                     common.out);
      } else {
        require(estimator_name == "auto" || estimator_name == "analytic", ErrorKind::argument,
                "pce models support analytic or pick-freeze");
        SobolReport rep = sobol_indices(model, SobolRequest::first_order);
        for (auto& e : sobol_indices(model, SobolRequest::total).entries) rep.entries.push_back(e);
        if (all_subsets)
          for (auto& e : sobol_indices(model, SobolRequest::all_subsets).entries)
            if (e.subset.size() > 1) rep.entries.push_back(e);
        write_report(rep, common.out);
      }
    } else if (type == "gp") {
      require(j.contains("input"), ErrorKind::io, "gp model JSON lacks the input model");
      const InputModel input = input_model_from_json(j["input"]);
      const GpModel gp = GpSerializer::from_json(j);
      if (estimator_name == "pick-freeze") {
        std::vector<int> all(static_cast<std::size_t>(input.dim()));
        for (int i = 0; i < input.dim(); ++i) all[static_cast<std::size_t>(i)] = i;
        write_report(pick_freeze_indices(gp_mean_evaluator(gp), input, big_n, common.seed, all, all), common.out);
      } else {
        require(estimator_name == "auto" || estimator_name == "gp", ErrorKind::argument,
                "gp models support gp or pick-freeze");
        write_report(gp_sobol_first_orders(gp, input, big_n, m, common.seed), common.out);
      }
    } else {
      fail(ErrorKind::io, "model JSON has unknown type '" + type + "'");
    }
  } else if (bench_cmd->parsed()) {
    if (list_cmd->parsed()) {
      emit(common.out, [&](std::ostream& os) {
        os << "name,dim,reference_source,reference_first\n";
        for (const auto& nm : benchmark_names()) {
          const BenchmarkCase c = benchmark(nm);
          os << c.name << ',' << c.dim() << ',' << c.reference_source << ',';
          for (std::size_t i = 0; i < c.reference_first.size(); ++i) os << (i ? ";" : "") << c.reference_first[i];
          os << '\n';
        }
      });
    } else if (eval_cmd->parsed()) {
      const BenchmarkCase c = benchmark(name);
      std::ifstream f(points_path);
      require(static_cast<bool>(f), ErrorKind::io, "cannot open '" + points_path + "'");
      const Eigen::MatrixXd x = read_design_csv(f);
      require(x.cols() == c.dim(), ErrorKind::argument, "points must have one column per input");
      const Eigen::VectorXd y = c.evaluator(x);
      Eigen::MatrixXd table(x.rows(), x.cols() + 1);
      table << x, y;
      auto names = c.input.names();
      names.push_back("y");
      emit(common.out, [&](std::ostream& os) { write_design_csv(os, table, names); });
    } else if (truss_cmd->parsed()) {
      emit(common.out, [&](std::ostream& os) { TrussSpec::standard().write_json(os); });
    } else if (ref_cmd->parsed()) {
      const BenchmarkCase c = benchmark(name);
      write_report(ref_n > 0 ? recompute_reference(c, ref_n, common.seed) : reference_indices(c), common.out);
    }
  } else if (exp_cmd->parsed()) {
    Json j = read_json_file(config_path);
    // command-line flags override the file
    if (app.get_option("--seed")->count()) j["seed"] = common.seed;
    if (app.get_option("--out")->count()) j["out"] = common.out;
    if (app.get_option("--threads")->count()) j["threads"] = common.threads;
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);
    const ExperimentResult r = run_experiment(cfg);
    if (cfg.out.empty()) write_summary_csv(std::cout, r);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const Error& e) {
    std::cerr << Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}.dump() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 2;
  }
}
