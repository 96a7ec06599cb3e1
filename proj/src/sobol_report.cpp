#include "uqsa/sobol_report.hpp"

#include <cmath>
#include <ostream>

#include "uqsa/error.hpp"

namespace uqsa {

std::string to_string(IndexType t) {
  switch (t) {
    case IndexType::first: return "first";
    case IndexType::total: return "total";
    case IndexType::partial: return "partial";
    case IndexType::closed: return "closed";
  }
  return "";
}

std::string subset_label(const Subset& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(s[i] + 1);
  }
  return out;
}

const SobolEntry& SobolReport::at(const Subset& s, IndexType t) const {
  for (const auto& e : entries)
    if (e.subset == s && e.type == t) return e;
  fail(ErrorKind::argument, "SobolReport: no " + to_string(t) + " entry for {" + subset_label(s) + "}");
}

namespace {
std::vector<double> per_variable(const std::vector<SobolEntry>& entries, int d, IndexType t) {
  std::vector<double> out(static_cast<std::size_t>(d), std::numeric_limits<double>::quiet_NaN());
  for (const auto& e : entries)
    if (e.type == t && e.subset.size() == 1 && e.subset[0] < d)
      out[static_cast<std::size_t>(e.subset[0])] = e.estimate;
  return out;
}

void put(std::ostream& os, double v) {
  if (std::isnan(v)) return;
  os << v;
}
}  // namespace

std::vector<double> SobolReport::first_order(int d) const {
  return per_variable(entries, d, IndexType::first);
}

std::vector<double> SobolReport::total(int d) const {
  return per_variable(entries, d, IndexType::total);
}

void SobolReport::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "subset,type,estimate,std,mc_stderr,estimator,N,m,seed,out_of_range\n";
  for (const auto& e : entries) {
    os << subset_label(e.subset) << ',' << to_string(e.type) << ',';
    put(os, e.estimate);
    os << ',';
    put(os, e.std);
    os << ',';
    put(os, e.mc_stderr);
    os << ',' << e.estimator << ',' << e.sample_size << ',' << e.realizations << ',' << e.seed
       << ',' << (e.out_of_range ? 1 : 0) << '\n';
  }
  os.precision(old);
}

}  // namespace uqsa
