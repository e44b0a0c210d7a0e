#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cauchy/assembly.hpp"

namespace cauchy {

enum class ReducedMethod { Direct, ConjugateGradient };

struct SolverOptions {
  ReducedMethod reduced = ReducedMethod::Direct;
  double cg_rtol = 1e-10;
  int cg_max_iter = 0;  ///< 0: ten times the system size
  /// Defect correction stops once ||z^{n+1} - z^n||_{L2} <= defect_tol
  /// (times ||z^{n+1}|| when defect_relative is set).
  double defect_tol = 1e-6;
  bool defect_relative = false;
  int max_outer = 50;
  /// Relative residual ||Ax - b||_inf / ||b||_inf accepted from a direct solve.
  double residual_tol = 1e-9;
};

/// One defect-correction step, recorded after computing x^{n+1} and z^{n+1}.
struct OuterStep {
  double z_increment = 0.0;  ///< ||z^{n+1} - z^n||
  double z_norm = 0.0;       ///< ||z^{n+1}||
  double s_energy = 0.0;     ///< s[x^{n+1}, x^{n+1}] of the free part
  double u_increment = 0.0;  ///< Euclidean norm of the change in the free u coefficients
  double p_increment = 0.0;
};

struct DiscreteSolution {
  FEFunction u;
  FEFunction p;
  std::optional<FEFunction> z;  ///< multiplier (full systems and defect correction)
  int outer_iterations = 0;
  std::vector<OuterStep> history;
  int cg_iterations = 0;
  std::vector<double> cg_energy;  ///< 1/2 x.Ax - b.x after each CG step
  double relative_residual = 0.0;
  /// Defect correction only: the first iterate, i.e. the reduced least-squares solution when z0 = 0.
  std::optional<std::pair<FEFunction, FEFunction>> first_iterate;
};

/// Solves the primal-dual system with a sparse LU factorization. Throws
/// SolverError (carrying a 1-norm condition estimate) if the factorization
/// fails or the residual check does not pass.
DiscreteSolution solve_full(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt = {});

/// Solves the symmetric positive definite reduced system, either with a
/// sparse LDL^T factorization or with Jacobi-preconditioned CG.
DiscreteSolution solve_reduced(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt = {});

/// Augmented-Lagrangian defect correction on the reduced system:
///   (s + b^T b) x^{n+1} = rhs - b^T z^n,   z^{n+1} = z^n + b x^{n+1} - g.
/// Converges to the primal-dual solution with s* = 0. The factorization is
/// computed once. z0 defaults to zero.
DiscreteSolution defect_correction(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt = {},
                                   const std::optional<Eigen::VectorXd>& z0 = std::nullopt);

struct CGResult {
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy;
};

/// Jacobi-preconditioned conjugate gradients for SPD A, started from x.
/// Stops when ||b - Ax|| <= rtol ||b||.
CGResult conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rtol,
                            int max_iter);

/// Hager's estimate of ||A^{-1}||_1 given a solver for A x = b and A^T x = b.
template <class Solve, class SolveTransposed>
double inverse_norm1_estimate(int n, Solve&& solve, SolveTransposed&& solve_t) {
  if (n == 0) return 0.0;
  Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
  double estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::VectorXd y = solve(x);
    const double norm = y.lpNorm<1>();
    if (iter > 0 && norm <= estimate) break;
    estimate = norm;
    const Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
    const Eigen::VectorXd w = solve_t(xi);
    Eigen::Index j = 0;
    if (w.cwiseAbs().maxCoeff(&j) <= w.dot(x)) break;
    x.setZero();
    x(j) = 1.0;
  }
  return estimate;
}

/// ||A||_1 (maximum absolute column sum).
double norm1(const SparseMatrix& A);

}  // namespace cauchy
