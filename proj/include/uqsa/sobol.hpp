#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/distributions.hpp"
#include "uqsa/gp.hpp"
#include "uqsa/pce.hpp"
#include "uqsa/sobol_report.hpp"

namespace uqsa {

/// Batch model evaluation: one output per row of physical input points.
/// Must be deterministic.
using Evaluator = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

/// Wraps a pointwise function.
Evaluator pointwise(std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)> f);
Evaluator pce_evaluator(const PceModel& model);
Evaluator gp_mean_evaluator(const GpModel& model);

struct PickFreezeEstimate {
  double estimate;
  double mc_stderr;  // delta-method asymptotic standard error
};

/// First-order (closed) index of A from paired outputs Y = G(X), Y_A = G(X_A):
/// [mean(Y Y_A) - mu^2] / [mean(Y^2) - mu^2] with mu = mean((Y + Y_A) / 2).
PickFreezeEstimate first_order_from_pairs(const Eigen::Ref<const Eigen::VectorXd>& y,
                                          const Eigen::Ref<const Eigen::VectorXd>& y_frozen);
/// Total index from Y and the output with only variable i redrawn:
/// mean((Y - Y')^2 / 2) / pooled variance.
PickFreezeEstimate total_from_pairs(const Eigen::Ref<const Eigen::VectorXd>& y,
                                    const Eigen::Ref<const Eigen::VectorXd>& y_resampled);

/// Sobol'-1993 pick-freeze estimate of the closed index of A (a nonempty
/// proper subset) from N pairs.
PickFreezeEstimate pick_freeze_first_order(const Evaluator& eval, const InputModel& model,
                                           const Subset& a, long long n, std::uint64_t seed);
PickFreezeEstimate pick_freeze_total(const Evaluator& eval, const InputModel& model, int variable,
                                     long long n, std::uint64_t seed);

/// First-order and total indices of every variable from one shared base
/// sample (N (1 + |first| + |total|) evaluations).
SobolReport pick_freeze_indices(const Evaluator& eval, const InputModel& model, long long n,
                                std::uint64_t seed, const std::vector<int>& first,
                                const std::vector<int>& total);

/// Index distribution over m GP posterior realizations sharing one
/// pick-freeze sample: estimate = mean, std = sample standard deviation.
SobolReport gp_sobol(const GpModel& gp, const InputModel& model, const Subset& a, long long n, int m,
                     std::uint64_t seed, const PosteriorSamplerOptions& sampler = {});
/// Same for every single variable at once, on the stacked sample
/// [X; X_1; ...; X_d].
SobolReport gp_sobol_first_orders(const GpModel& gp, const InputModel& model, long long n, int m,
                                  std::uint64_t seed, const PosteriorSamplerOptions& sampler = {});

struct MainEffectPoint {
  double value;  // grid value of the variable
  double mean;
  double lower;  // 2.5% percentile across realizations
  double upper;  // 97.5% percentile
};

/// E[Z_n(X) | X_i = value] along a grid, per realization, summarized across
/// realizations. The complement draws are common to all grid values.
std::vector<MainEffectPoint> main_effects(const GpModel& gp, const InputModel& model, int variable,
                                          const std::vector<double>& grid, int m, int n_inner,
                                          std::uint64_t seed, const PosteriorSamplerOptions& sampler = {});

}  // namespace uqsa
