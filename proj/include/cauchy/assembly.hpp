#pragma once

#include <iosfwd>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "cauchy/problem.hpp"
#include "cauchy/spaces.hpp"

namespace cauchy {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Primal stabilizer s[(u,p),(v,q)] = 1/2 (A grad u - p, A grad v - q) + t(u, v)
/// as blocks over all (unconstrained) dofs of V and D. The Tikhonov part t is
///   InfSup / WellBalanced / WellBalancedNoDual:  1/2 mu^2 h^2 ((1-pi_W)u, (1-pi_W)v) + gamma_T h^{2k} (grad u, grad v)
///   Reduced:                                     1/2 gamma_T h^{2k} (grad u, grad v)
struct PrimalForm {
  SparseMatrix uu, up, pp;
};

/// b(q, v, y) = (div q + mu v, y) as W x V and W x D blocks.
struct ConstraintForm {
  SparseMatrix u, p;
};

PrimalForm assemble_s(const Discretization& disc, const ProblemSpec& problem);
ConstraintForm assemble_b(const Discretization& disc, double mu);
/// Dual stabilizer on W x W: zero for InfSup/WellBalancedNoDual,
/// gamma*/2 ((1 - pi_{l-1}) grad z, (1 - pi_{l-1}) grad w) for WellBalanced,
/// the L2 mass (z, w) for Reduced.
SparseMatrix assemble_sstar(const Discretization& disc);
/// (div p + mu u, div q + mu v) over (V, D) x (V, D).
PrimalForm assemble_divdiv(const Discretization& disc, double mu);

enum class SystemKind { Full, Reduced };

/// Linear system over the free dofs. Unknowns are ordered (u free, p free[, z]).
struct SparseSystem {
  SystemKind kind = SystemKind::Full;
  SparseMatrix matrix;
  Eigen::VectorXd rhs;
  int n_u = 0, n_p = 0, n_z = 0;
  FEFunction lift_u;  ///< g_h on constrained V dofs, zero on free ones
  FEFunction lift_p;  ///< psi~_h moments on Sigma dofs, zero elsewhere

  /// Reduced systems only: b restricted to the free (u, p) columns, and the
  /// multiplier load (f~, w) - b(lift_p, lift_u, w). They drive the defect correction.
  SparseMatrix constraint;
  Eigen::VectorXd multiplier_load;
};

/// Full primal-dual system [s, b^T; b, -s*] with the Dirichlet/Neumann data lifted to the right-hand side.
SparseSystem assemble_full(const Discretization& disc, const ProblemSpec& problem);

/// Reduced least-squares system s + (div p + mu u, div q + mu v) with right-hand side (f~, div q + mu v).
/// Requires W to contain div D + mu V (guaranteed by SpaceConfig::make).
SparseSystem assemble_reduced(const Discretization& disc, const ProblemSpec& problem);

/// Per-cell flux balance r_K = int_{dK} p_h.n - int_K (f~ - mu u_h).
Eigen::VectorXd conservation_residual(const Discretization& disc, const FEFunction& u, const FEFunction& p,
                                      const ProblemSpec& problem);

/// Coordinate dump, one "row col value" line per stored entry (0-based).
void write_coordinate(std::ostream& out, const SparseMatrix& matrix);

}  // namespace cauchy
