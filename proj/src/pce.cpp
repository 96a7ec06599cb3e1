#include "uqsa/pce.hpp"

#include <cmath>
#include <limits>

#include "uqsa/error.hpp"

namespace uqsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_variance(const Eigen::VectorXd& y) {
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1);
}

void check_fit_inputs(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                      const Eigen::Ref<const Eigen::VectorXd>& responses,
                      const MultivariateBasis& basis) {
  require(design.cols() == input.dim() && basis.dim() == input.dim(), ErrorKind::argument,
          "fit: dimension mismatch between design, input model and basis");
  require(design.rows() == responses.size(), ErrorKind::argument,
          "fit: one response per design point required");
  require(responses.allFinite(), ErrorKind::argument, "fit: responses must be finite");
  const auto card = static_cast<Eigen::Index>(basis.size());
  require(design.rows() >= card, ErrorKind::underdetermined,
          "fit: n = " + std::to_string(design.rows()) + " < card A = " + std::to_string(card));
}

// Least-squares coefficients; throws ill_posed on rank deficiency.
Eigen::ColPivHouseholderQR<Eigen::MatrixXd> factor(const Eigen::MatrixXd& a) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(kRankThreshold);
  qr.compute(a);
  require(qr.rank() == a.cols(), ErrorKind::ill_posed,
          "fit: information matrix is rank deficient (numerical rank " + std::to_string(qr.rank()) +
              " of " + std::to_string(a.cols()) + ")");
  return qr;
}

}  // namespace

PceModel::PceModel(InputModel input, MultivariateBasis basis, Eigen::VectorXd coefficients)
    : input_(std::move(input)), basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  require(basis_.dim() == input_.dim(), ErrorKind::argument, "PceModel: dimension mismatch");
  require(static_cast<std::size_t>(coefficients_.size()) == basis_.size(), ErrorKind::argument,
          "PceModel: one coefficient per basis term required");
}

double PceModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return basis_.eval_row(input_.to_standard(x)).dot(coefficients_);
}

Eigen::VectorXd PceModel::predict_rows(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  // Blocks bound the size of the temporary information matrix.
  constexpr Eigen::Index kBlock = 4096;
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index s = 0; s < x.rows(); s += kBlock) {
    const Eigen::Index len = std::min(kBlock, x.rows() - s);
    out.segment(s, len) = basis_.eval_matrix(input_.to_standard_rows(x.middleRows(s, len))) * coefficients_;
  }
  return out;
}

double PceModel::loo_error() const {
  require(!loo_degenerate_, ErrorKind::degenerate,
          "LOO error is undefined: a hat-matrix diagonal equals 1 (interpolation regime)");
  return loo_error_;
}

std::vector<PolynomialFamily> default_families(const InputModel& input) {
  std::vector<PolynomialFamily> f;
  for (const auto& m : input.marginals()) f.push_back(PolynomialFamily::for_space(m.standard_space()));
  return f;
}

PceModel fit_pce(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                 const Eigen::Ref<const Eigen::VectorXd>& responses, const MultivariateBasis& basis) {
  check_fit_inputs(input, design, responses, basis);
  const Eigen::MatrixXd a = basis.eval_matrix(input.to_standard_rows(design));
  const auto qr = factor(a);
  const Eigen::VectorXd y = responses;
  PceModel model(input, basis, qr.solve(y));

  const auto n = a.rows();
  const auto card = a.cols();
  const Eigen::VectorXd resid = y - a * model.coefficients_;
  model.n_ = static_cast<int>(n);
  model.emp_error_ = resid.squaredNorm() / static_cast<double>(n);
  model.response_variance_ = sample_variance(y);

  // h_i: squared row norms of the orthonormal factor spanning range(A).
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, card);
  model.hat_ = q.rowwise().squaredNorm();
  double loo = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double denom = 1.0 - model.hat_[i];
    if (denom <= 1e-10) {
      model.loo_degenerate_ = true;
      loo = kInf;
      break;
    }
    const double r = resid[i] / denom;
    loo += r * r;
  }
  model.loo_error_ = model.loo_degenerate_ ? kInf : loo / static_cast<double>(n);
  return model;
}

double loo_error_explicit(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& responses,
                          const MultivariateBasis& basis) {
  check_fit_inputs(input, design, responses, basis);
  const Eigen::MatrixXd a = basis.eval_matrix(input.to_standard_rows(design));
  const auto n = a.rows();
  require(n >= a.cols() + 1, ErrorKind::degenerate,
          "LOO error is undefined for n = card A (interpolation regime)");
  Eigen::MatrixXd sub(n - 1, a.cols());
  Eigen::VectorXd ysub(n - 1);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sub.topRows(i) = a.topRows(i);
    sub.bottomRows(n - 1 - i) = a.bottomRows(n - 1 - i);
    ysub.head(i) = responses.head(i);
    ysub.tail(n - 1 - i) = responses.tail(n - 1 - i);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    qr.setThreshold(kRankThreshold);
    qr.compute(sub);
    require(qr.rank() == a.cols(), ErrorKind::degenerate,
            "LOO error is undefined: removing point " + std::to_string(i) +
                " makes the information matrix rank deficient");
    const double delta = responses[i] - a.row(i).dot(qr.solve(ysub));
    sum += delta * delta;
  }
  return sum / static_cast<double>(n);
}

PceModel adaptive_fit_pce(const InputModel& input, const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const Eigen::Ref<const Eigen::VectorXd>& responses,
                          const std::vector<PolynomialFamily>& families, int p_min, int p_max,
                          double oversampling) {
  require(p_min >= 0 && p_min <= p_max, ErrorKind::argument, "adaptive_fit: need 0 <= p_min <= p_max");
  const int d = input.dim();
  const double n = static_cast<double>(design.rows());
  require(n >= oversampling * static_cast<double>(total_degree_cardinality(d, p_min)),
          ErrorKind::underdetermined,
          "adaptive_fit: n = " + std::to_string(design.rows()) + " is below " +
              std::to_string(oversampling) + " x card A for the smallest degree " +
              std::to_string(p_min));

  std::vector<DegreeTrial> trials;
  std::optional<PceModel> best;
  int best_degree = p_min;
  for (int p = p_min; p <= p_max; ++p) {
    const auto card = total_degree_cardinality(d, p);
    if (n < oversampling * static_cast<double>(card)) break;  // cardinality grows with p
    DegreeTrial t{p, card, kInf};
    try {
      PceModel m = fit_pce(input, design, responses, MultivariateBasis(families, enumerate_total_degree(d, p)));
      if (!m.loo_degenerate()) t.loo_error = m.loo_error_;
      if (!best || t.loo_error < best->loo_error_) {
        best.emplace(std::move(m));
        best_degree = p;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ill_posed) throw;
    }
    trials.push_back(t);
  }
  require(best.has_value(), ErrorKind::underdetermined, "adaptive_fit: no admissible degree");
  best->trials_ = std::move(trials);
  best->degree_ = best_degree;
  return std::move(*best);
}

Moments moments(const PceModel& model) {
  const auto& idx = model.basis().indices();
  const auto& c = model.coefficients();
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t j = 0; j < idx.size(); ++j) {
    bool zero = true;
    for (int a : idx[j]) zero = zero && a == 0;
    if (zero) mean += c[static_cast<Eigen::Index>(j)];
    else var += c[static_cast<Eigen::Index>(j)] * c[static_cast<Eigen::Index>(j)];
  }
  return {mean, var};
}

std::map<std::vector<int>, double> partial_variances(const PceModel& model) {
  std::map<std::vector<int>, double> out;
  const auto& idx = model.basis().indices();
  const auto& c = model.coefficients();
  for (std::size_t j = 0; j < idx.size(); ++j) {
    Subset support;
    for (int i = 0; i < idx.dim(); ++i)
      if (idx[j][static_cast<std::size_t>(i)] != 0) support.push_back(i);
    if (support.empty()) continue;
    const double v = c[static_cast<Eigen::Index>(j)];
    out[support] += v * v;
  }
  return out;
}

SobolReport sobol_indices(const PceModel& model, SobolRequest request, const Subset& which) {
  const double var = moments(model).variance;
  require(var > 0.0, ErrorKind::degenerate, "sobol_indices: model variance is zero");
  const int d = model.dim();
  const auto& idx = model.basis().indices();
  const auto& c = model.coefficients();

  auto entry = [](Subset s, IndexType t, double v) {
    SobolEntry e;
    e.subset = std::move(s);
    e.type = t;
    e.estimate = v;
    e.estimator = "pce_analytic";
    e.out_of_range = v < 0.0 || v > 1.0;
    return e;
  };

  SobolReport report;
  switch (request) {
    case SobolRequest::first_order:
    case SobolRequest::total: {
      const bool total = request == SobolRequest::total;
      std::vector<double> num(static_cast<std::size_t>(d), 0.0);
      for (std::size_t j = 0; j < idx.size(); ++j) {
        int nonzero = 0;
        for (int a : idx[j]) nonzero += a != 0;
        if (nonzero == 0 || (!total && nonzero != 1)) continue;
        const double v = c[static_cast<Eigen::Index>(j)] * c[static_cast<Eigen::Index>(j)];
        for (int i = 0; i < d; ++i)
          if (idx[j][static_cast<std::size_t>(i)] != 0) num[static_cast<std::size_t>(i)] += v;
      }
      for (int i = 0; i < d; ++i)
        report.entries.push_back(entry({i}, total ? IndexType::total : IndexType::first,
                                       num[static_cast<std::size_t>(i)] / var));
      break;
    }
    case SobolRequest::subset: {
      Subset s = which;
      std::sort(s.begin(), s.end());
      require(!s.empty() && s.back() < d && s.front() >= 0, ErrorKind::argument,
              "sobol_indices: subset must be a nonempty set of valid variables");
      const auto pv = partial_variances(model);
      const auto it = pv.find(s);
      report.entries.push_back(entry(s, s.size() == 1 ? IndexType::first : IndexType::partial, it == pv.end() ? 0.0 : it->second / var));
      break;
    }
    case SobolRequest::all_subsets:
      for (const auto& [s, v] : partial_variances(model))
        report.entries.push_back(entry(s, s.size() == 1 ? IndexType::first : IndexType::partial, v / var));
      break;
  }
  return report;
}

}  // namespace uqsa
