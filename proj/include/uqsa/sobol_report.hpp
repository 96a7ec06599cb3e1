#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace uqsa {

/// Variable subset, 0-based, sorted ascending.
using Subset = std::vector<int>;

/// first: S_i; total: S_i^tot; partial: the ANOVA share of exactly the set A;
/// closed: the share of all subsets of A (what pick-freeze on A estimates).
enum class IndexType { first, total, partial, closed };

std::string to_string(IndexType t);

/// One estimated index. `std` is the across-realization spread of GP-based
/// estimates; `mc_stderr` the asymptotic Monte Carlo standard error of a
/// pick-freeze estimate. Either is NaN when not applicable.
struct SobolEntry {
  Subset subset;
  IndexType type = IndexType::first;
  double estimate = 0.0;
  double std = std::numeric_limits<double>::quiet_NaN();
  double mc_stderr = std::numeric_limits<double>::quiet_NaN();
  std::string estimator;  // pce_analytic | pick_freeze_first | pick_freeze_total | gp_realizations
  long long sample_size = 0;  // N
  int realizations = 0;       // m
  std::uint64_t seed = 0;
  bool out_of_range = false;  // raw estimate outside [0, 1]; never clamped
};

struct SobolReport {
  std::vector<SobolEntry> entries;

  const SobolEntry& at(const Subset& s, IndexType t) const;
  /// First-order estimates of variables 0..d-1 in order; NaN where missing.
  std::vector<double> first_order(int d) const;
  std::vector<double> total(int d) const;

  /// Columns: subset,type,estimate,std,mc_stderr,estimator,N,m,seed,out_of_range.
  /// Subsets are written 1-based, joined with ';'.
  void write_csv(std::ostream& os) const;
};

std::string subset_label(const Subset& s);

}  // namespace uqsa
