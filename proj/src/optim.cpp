#include "uqsa/optim.hpp"

#include <cmath>
#include <memory>

#include <boost/math/tools/minima.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "uqsa/error.hpp"

namespace uqsa {

namespace {

constexpr double kPenalty = 1e100;

struct Callback {
  const std::function<double(const Eigen::VectorXd&)>* f;
  Eigen::VectorXd scratch;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* cb = static_cast<Callback*>(params);
  for (Eigen::Index i = 0; i < cb->scratch.size(); ++i)
    cb->scratch[i] = gsl_vector_get(v, static_cast<std::size_t>(i));
  // No exception may cross the C frames of GSL.
  try {
    const double r = (*cb->f)(cb->scratch);
    return std::isfinite(r) ? r : kPenalty;
  } catch (...) {
    return kPenalty;
  }
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

}  // namespace

SimplexResult minimize_simplex(const std::function<double(const Eigen::VectorXd&)>& f,
                               const Eigen::VectorXd& start, double step, int max_iterations,
                               double size_tolerance) {
  const auto n = static_cast<std::size_t>(start.size());
  require(n >= 1, ErrorKind::argument, "minimize_simplex: empty start point");
  gsl_set_error_handler_off();

  Callback cb{&f, Eigen::VectorXd(start.size())};
  gsl_multimin_function fn{&trampoline, n, &cb};

  std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(n));
  std::unique_ptr<gsl_vector, VectorDeleter> steps(gsl_vector_alloc(n));
  for (std::size_t i = 0; i < n; ++i) {
    gsl_vector_set(x.get(), i, start[static_cast<Eigen::Index>(i)]);
    gsl_vector_set(steps.get(), i, step);
  }
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  gsl_multimin_fminimizer_set(m.get(), &fn, x.get(), steps.get());

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) break;
    const double size = gsl_multimin_fminimizer_size(m.get());
    if (gsl_multimin_test_size(size, size_tolerance) == GSL_SUCCESS) break;
  }

  SimplexResult r{Eigen::VectorXd(start.size()), m->fval, iter};
  for (std::size_t i = 0; i < n; ++i) r.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(m->x, i);
  return r;
}

std::pair<double, double> minimize_scalar(const std::function<double(double)>& f, double lower,
                                          double upper) {
  auto safe = [&f](double t) {
    try {
      const double r = f(t);
      return std::isfinite(r) ? r : kPenalty;
    } catch (const Error&) {
      return kPenalty;
    }
  };
  return boost::math::tools::brent_find_minima(safe, lower, upper, 30);
}

}  // namespace uqsa
