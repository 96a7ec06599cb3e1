#pragma once

#include <functional>

#include <Eigen/Dense>

namespace uqsa {

struct SimplexResult {
  Eigen::VectorXd x;
  double value;
  int iterations;
};

/// Derivative-free Nelder-Mead minimization (GSL nmsimplex2). Objective
/// failures should be reported as +inf; they are mapped to a large finite
/// penalty internally.
SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& start, double step, int max_iterations,
                               double size_tolerance);

/// Brent minimization of a scalar function on [lower, upper].
std::pair<double, double> minimize_scalar(const std::function<double(double)>& f, double lower,
                                          double upper);

}  // namespace uqsa
