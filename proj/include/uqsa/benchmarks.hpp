#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "uqsa/distributions.hpp"
#include "uqsa/sobol.hpp"
#include "uqsa/sobol_report.hpp"

namespace uqsa {

// ---- Ishigami ----------------------------------------------------------------

double ishigami(const Eigen::Ref<const Eigen::VectorXd>& x, double a = 7.0, double b = 0.1);

struct IshigamiIndices {
  double variance;
  std::array<double, 3> first;
  std::array<double, 3> total;
};
IshigamiIndices ishigami_indices(double a = 7.0, double b = 0.1);

// ---- G-Sobol -----------------------------------------------------------------

std::vector<double> g_sobol_default_a();
double g_sobol(const Eigen::Ref<const Eigen::VectorXd>& x, const std::vector<double>& a);

struct GSobolIndices {
  std::vector<double> partial;  // V_i
  double variance;              // V
  std::vector<double> first;    // S_i
};
GSobolIndices g_sobol_indices(const std::vector<double>& a);

// ---- Morris (20 inputs on the unit cube) -------------------------------------

double morris(const Eigen::Ref<const Eigen::VectorXd>& x);

// ---- Truss -------------------------------------------------------------------

enum class MemberGroup { chord, diagonal };

struct TrussMember {
  int from;
  int to;
  MemberGroup group;
};

/// Planar pin-jointed truss. Inputs are ordered {E1, E2, A1, A2, P1..P6}:
/// chord bars use (E1, A1), diagonals (E2, A2), and P_k acts downward at
/// load_nodes[k-1].
struct TrussSpec {
  Eigen::MatrixX2d nodes;  // coordinates in m
  std::vector<TrussMember> members;
  std::array<int, 6> load_nodes;
  int pin_node;     // both directions fixed
  int roller_node;  // vertical direction fixed
  int monitored_node;

  /// 24 m span in 6 bays of 4 m, height 2 m, triangulated (Warren) web:
  /// bottom chord nodes 0..6 at x = 4k, top chord nodes 7..12 at x = 4k - 2.
  static TrussSpec standard();
  int dofs() const { return 2 * static_cast<int>(nodes.rows()); }
  void write_json(std::ostream& os) const;
};

struct TrussSolution {
  Eigen::VectorXd displacements;  // (u_x, u_y) per node
  Eigen::VectorXd external;       // applied nodal loads
  Eigen::VectorXd reactions;      // support reactions (zero at free dofs)
  double deflection;              // downward vertical displacement of the monitored node
};

TrussSolution truss_solve(const TrussSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);
double truss_deflection(const Eigen::Ref<const Eigen::VectorXd>& x);
double truss_deflection(const TrussSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

// ---- Registry ----------------------------------------------------------------

struct BenchmarkCase {
  std::string name;
  InputModel input;
  Evaluator evaluator;
  /// Reference first-order indices, one per variable, and where they come
  /// from ("analytic" or "published").
  std::vector<double> reference_first;
  std::string reference_source;

  int dim() const { return input.dim(); }
};

std::vector<std::string> benchmark_names();
BenchmarkCase benchmark(const std::string& name);

/// Stored reference first-order indices as a report.
SobolReport reference_indices(const BenchmarkCase& c);
/// Recomputed by pick-freeze on the true model.
SobolReport recompute_reference(const BenchmarkCase& c, long long n, std::uint64_t seed);

}  // namespace uqsa
