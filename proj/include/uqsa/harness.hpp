#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/distributions.hpp"
#include "uqsa/gp.hpp"
#include "uqsa/serialize.hpp"

namespace uqsa {

/// Nash-Sutcliffe coefficient 1 - sum (G - Ghat)^2 / sum (G - Gbar)^2.
double q2(const Eigen::Ref<const Eigen::VectorXd>& predictions,
          const Eigen::Ref<const Eigen::VectorXd>& truths);

struct PceExperimentOptions {
  int p_min = 3;
  int p_max = 8;
  double oversampling = 2.0;
};

struct GpExperimentOptions {
  Kernel kernel{KernelFamily::matern52, KernelMode::tensorized};
  Json trend = "constant";  // "constant", "linear" or a list of exponent tuples
  HyperEstimator estimator = HyperEstimator::max_likelihood;
  int starts = 10;
  bool indices = true;  // run gp_sobol on every replication
  long long sobol_n = 10000;
  int realizations = 100;
  PosteriorSamplerOptions sampler;
};

struct ExperimentConfig {
  std::string benchmark;
  bool run_pce = true;
  bool run_gp = false;
  std::vector<int> sizes;
  int replications = 100;
  int n_test = 10000;
  SamplingMethod design = SamplingMethod::lhs;
  PceExperimentOptions pce;
  GpExperimentOptions gp;
  std::uint64_t seed = 0;
  std::string out;  // empty: nothing written
  int threads = 1;

  void validate() const;
  static ExperimentConfig from_json(const Json& j);
  Json to_json() const;
};

struct ReplicationRow {
  std::string method;  // pce | gp
  int n = 0;
  int replication = 0;
  std::uint64_t seed = 0;  // design seed
  bool ok = false;
  std::string error;  // error category when !ok
  double q2 = 0.0;
  int degree = -1;                 // pce
  double loo_normalized = 0.0;     // pce, NaN when degenerate
  Eigen::VectorXd theta;           // gp lengthscales
  double sigma2 = 0.0;             // gp
  bool boundary = false;           // gp optimizer touched the box
  std::vector<double> first;       // per-variable first-order estimates
  std::vector<double> first_std;   // across-realization std (gp)
  double seconds = 0.0;            // wall time, never written to CSV
};

struct SummaryRow {
  std::string method;
  int n;
  std::string quantity;  // q2 or S_<name>
  int count;             // successful replications
  double min, q25, median, q75, max;
  double rmse;  // against the benchmark reference; NaN for q2
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<std::string> names;
  std::vector<double> reference;
  std::vector<ReplicationRow> rows;  // ordered by method, n, replication
  std::vector<SummaryRow> summary;
};

/// Type-7 quantile of unsorted data.
double quantile(std::vector<double> v, double q);

std::vector<SummaryRow> summarize(const std::vector<ReplicationRow>& rows,
                                  const std::vector<std::string>& names,
                                  const std::vector<double>& reference);

/// Runs every (method, n, replication) and writes replications.csv,
/// summary.csv, config.json and timings.txt when config.out is set. Throws
/// run_failed (after writing) when more than half the replications of some
/// (method, n) failed.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_replications_csv(std::ostream& os, const ExperimentResult& r);
void write_summary_csv(std::ostream& os, const ExperimentResult& r);
void write_timings(std::ostream& os, const ExperimentResult& r);

}  // namespace uqsa
