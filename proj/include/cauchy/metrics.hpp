#pragma once

#include <map>
#include <string>
#include <vector>

#include "cauchy/problem.hpp"
#include "cauchy/solvers.hpp"
#include "cauchy/spaces.hpp"

namespace cauchy {

/// Exact primal solution and its gradient; the exact flux is A grad u.
struct ExactSolution {
  ScalarField u;
  VectorField grad_u;
};

/// Elements of Omega_sigma: all vertices with y <= lo.y + sigma * height.
/// Throws ConfigError unless 0 < sigma <= 1.
std::vector<char> local_elements(const Domain& domain, double sigma);

struct ErrorReport {
  double l2_global = 0.0, l2_local = 0.0;    ///< relative unless zero_exact
  double h1s_global = 0.0, h1s_local = 0.0;  ///< relative unless zero_exact
  double abs_l2_global = 0.0, abs_l2_local = 0.0;
  double abs_h1s_global = 0.0, abs_h1s_local = 0.0;
  bool zero_exact = false;  ///< exact solution vanishes: relative columns hold absolute errors
};

ErrorReport error_norms(const LagrangeSpace& V, const FEFunction& u_h, const ExactSolution& exact, double sigma = 0.5);

/// |||(v, q)|||_{-zeta} = (s[(v,q),(v,q)] + ||h^zeta (div q + mu v)||^2)^{1/2}, evaluated by
/// quadrature with the stabilizer of disc.config. zeta must be 0 or 1.
double triple_norm(const Discretization& disc, const ProblemSpec& problem, const FEFunction& v, const FEFunction& q,
                   int zeta);

/// Same norm of (u - u_h, p - p_h) with p = A grad u.
double triple_norm_error(const Discretization& disc, const ProblemSpec& problem, const ExactSolution& exact,
                         const FEFunction& u_h, const FEFunction& p_h, int zeta);

/// Broken norm (||grad x||_h^2 + sum_F h_F^{-1} ||pi_{F,l}[x]||_F^2)^{1/2} over the faces off Sigma,
/// with l the flux order and the jump on a boundary face equal to the trace.
double norm_1h(const DGSpace& W, const FEFunction& x, int l);

struct ResidualReport {
  int zeta = 0;
  double triple = 0.0;      ///< |||(u - u_h, p - p_h)|||_{-zeta}
  double z_norm_1h = 0.0;   ///< ||z_h||_{1,h}, zero without a multiplier
  double total = 0.0;       ///< triple + zeta * z_norm_1h
  double max_conservation = 0.0;  ///< max_K |int_K (div p_h + mu u_h - f~)|
  double conservation_scale = 0.0;  ///< ||f~|| + |mu| ||u_h|| + ||p_h||, the size conservation is measured against
  double flux_sigma = 0.0;  ///< ||psi - p_h . nu||_{L2(Sigma)} with the unperturbed psi
};

/// zeta = 1 when the solution carries a multiplier, 0 otherwise.
ResidualReport residual_report(const Discretization& disc, const ProblemSpec& problem, const ExactSolution& exact,
                               const DiscreteSolution& sol);

/// Rows of (h, metrics) ordered by decreasing h.
struct RateTable {
  std::vector<double> h;
  std::map<std::string, std::vector<double>> columns;

  void add_row(double h_row, const std::map<std::string, double>& values);
  /// Throws ConfigError unless h is strictly decreasing and the columns match.
  void validate() const;
};

/// Least-squares slope of log(error) against log(h) over the last `window`
/// rows, per column. Throws ConfigError for window < 2 or too few rows.
std::map<std::string, double> fit_rates(const RateTable& table, int window);

/// Slope of the least-squares line through (log h_i, log e_i).
double fit_rate(const std::vector<double>& h, const std::vector<double>& e);

}  // namespace cauchy
