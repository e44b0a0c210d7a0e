#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cauchy/metrics.hpp"
#include "cauchy/problem.hpp"
#include "cauchy/solvers.hpp"

namespace cauchy {

enum class CaseKind { Hadamard1, Hadamard2, WellPosed };

/// Discrete method: one of the primal-dual variants solved directly, the
/// reduced least-squares system, or the defect correction built on it.
enum class Method { InfSup, WellBalanced, WellBalancedNoDual, Reduced, Defect };

std::string to_string(CaseKind c);
std::string to_string(Method m);
CaseKind parse_case(const std::string& name);
Method parse_method(const std::string& name);

using Ladder = std::vector<std::pair<int, int>>;

/// (12,4), (24,8), (48,16), (96,32), (192,64).
Ladder default_ladder();
/// "NXxNY:R" expands to R rungs starting at NX x NY and doubling both counts.
Ladder parse_ladder(const std::string& spec);

struct RunConfig {
  CaseKind kind = CaseKind::Hadamard1;
  int n = 1;
  int k = 1;
  Method method = Method::WellBalanced;
  double gamma_T = 1e-4;
  double gamma_star = 0.1;
  std::optional<int> l;  ///< flux order for Reduced/Defect (default k - 1)
  double delta = 0.0;
  Ladder ladder = default_ladder();
  std::uint64_t seed = 42;
  double sigma = 0.5;
  SolverOptions solver;

  /// Throws ConfigError on n < 1, a non-refining ladder or invalid orders.
  void validate() const;
  SpaceConfig space_config() const;
};

struct HadamardFields {
  ScalarField u;
  VectorField grad_u;
  ScalarField psi;
};

/// u = sin(nx) sinh(ny) / n and psi = -sin(nx) on (0, pi) x (0, 1).
HadamardFields hadamard_exact(int n);

/// Geometry, boundary tags and data of one case.
struct CaseSetup {
  BoundingBox box;
  PointPredicate sigma;
  PointPredicate dirichlet;
  ProblemSpec problem;
  ExactSolution exact;
};

CaseSetup make_case(const RunConfig& config);

struct RunRow {
  int nx = 0, ny = 0;
  double h = 0.0;
  int l = 0, m = 0;
  int dof_V = 0, dof_D = 0, dof_W = 0;
  ErrorReport errors;
  ResidualReport residual;
  int outer_iterations = 0;
  std::vector<OuterStep> history;
  double reduced_max_conservation = 0.0;  ///< first defect-correction iterate (z = 0), Defect only
};

struct RunRecord {
  RunConfig config;
  std::vector<RunRow> rows;
  RateTable table;  ///< rel_l2_global, rel_l2_local, rel_h1s_global, rel_h1s_local, tnorm_residual
};

/// Assembles and solves one rung and evaluates all metrics.
RunRow run_rung(const RunConfig& config, int nx, int ny);

/// Runs every rung in ladder order. With a CSV stream the header and each row
/// are written (and flushed) as soon as the rung finishes, so a solver
/// failure leaves the completed rows behind before the exception propagates.
RunRecord run_case(const RunConfig& config, std::ostream* csv = nullptr);

/// Well-posed check: u = sin(x) sin(pi y) on (0, pi) x (0, 1) with homogeneous
/// Dirichlet data on the whole boundary and no flux constraint.
RunRecord run_wellposed(RunConfig config, std::ostream* csv = nullptr);

struct GammaSweep {
  std::vector<double> gammas;
  std::vector<double> rel_l2;
  int first_increase = -1;  ///< index of the first gamma with visibly larger error, -1 if none
};

/// Fixed mesh, clean data; "visibly larger" means 5% above the error at the first gamma.
GammaSweep sweep_gamma(RunConfig config, const std::vector<double>& gammas, int nx, int ny);

std::string csv_header();
std::string csv_row(const RunConfig& config, const RunRow& row);

/// Rate table (rows in file order) from a CSV written by run_case.
RateTable read_rates_csv(std::istream& in);

}  // namespace cauchy
