#include "cauchy/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "cauchy/error.hpp"

namespace cauchy {

namespace {

// Free coefficients back onto the full dof vector, on top of the lifting.
FEFunction expand(const FEFunction& lift, const DofMap& dofs, const Eigen::VectorXd& x, int offset) {
  FEFunction out = lift;
  for (int i = 0; i < dofs.num_free(); ++i) out.coeffs(dofs.free_dofs[static_cast<std::size_t>(i)]) += x(offset + i);
  return out;
}

// ||b - Ax||_inf / ||b||_inf, or the absolute residual for b = 0.
double relative_residual(const SparseMatrix& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
  const double nb = b.lpNorm<Eigen::Infinity>();
  const double nr = (b - A * x).lpNorm<Eigen::Infinity>();
  return nb > 0.0 ? nr / nb : nr;
}

std::string format_estimate(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", c);
  return buf;
}

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;
using LDLT = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>;

}  // namespace

double norm1(const SparseMatrix& A) {
  double best = 0.0;
  for (int j = 0; j < A.outerSize(); ++j) {
    double col = 0.0;
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) col += std::abs(it.value());
    best = std::max(best, col);
  }
  return best;
}

DiscreteSolution solve_full(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt) {
  if (sys.kind != SystemKind::Full) throw ConfigError("solve_full needs a full system");
  DiscreteSolution sol;
  const int n = static_cast<int>(sys.matrix.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n > 0) {
    SparseMatrix A = sys.matrix;
    A.makeCompressed();
    LU lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
      throw SolverError("sparse LU factorization failed: " + lu.lastErrorMessage(), -1.0);
    }
    x = lu.solve(sys.rhs);
    sol.relative_residual = relative_residual(A, x, sys.rhs);
    if (!(sol.relative_residual <= opt.residual_tol)) {
      const double cond = norm1(A) * inverse_norm1_estimate(
                                         n, [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(lu.solve(b)); },
                                         [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(lu.solve(b)); });
      throw SolverError("full system residual " + format_estimate(sol.relative_residual) +
                            " above tolerance (condition estimate " + format_estimate(cond) + ")",
                        cond);
    }
  }
  sol.u = expand(sys.lift_u, disc.V.dofs(), x, 0);
  sol.p = expand(sys.lift_p, disc.D.dofs(), x, sys.n_u);
  FEFunction z = disc.W.zero();
  z.coeffs = x.segment(sys.n_u + sys.n_p, sys.n_z);
  sol.z = std::move(z);
  return sol;
}

CGResult conjugate_gradient(const SparseMatrix& A, const Eigen::VectorXd& b, Eigen::VectorXd& x, double rtol,
                            int max_iter) {
  CGResult res;
  const Eigen::VectorXd diag = A.diagonal();
  const Eigen::VectorXd inv_diag = diag.unaryExpr([](double d) { return d > 0.0 ? 1.0 / d : 1.0; });
  Eigen::VectorXd r = b - A * x;
  const double stop = rtol * b.norm();
  if (r.norm() <= stop) {
    res.converged = true;
    return res;
  }
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd d = z;
  double rz = r.dot(z);
  Eigen::VectorXd Ad(b.size());
  for (int it = 0; it < max_iter; ++it) {
    Ad.noalias() = A * d;
    const double dAd = d.dot(Ad);
    if (!(dAd > 0.0)) throw SolverError("CG breakdown: reduced matrix is not positive definite", -1.0);
    const double alpha = rz / dAd;
    x += alpha * d;
    r -= alpha * Ad;
    // Energy 1/2 x.Ax - b.x = -1/2 (b + r).x since Ax = b - r.
    res.energy.push_back(-0.5 * (b + r).dot(x));
    res.iterations = it + 1;
    if (r.norm() <= stop) {
      res.converged = true;
      break;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    d = z + (rz_next / rz) * d;
    rz = rz_next;
  }
  return res;
}

DiscreteSolution solve_reduced(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt) {
  if (sys.kind != SystemKind::Reduced) throw ConfigError("solve_reduced needs a reduced system");
  DiscreteSolution sol;
  const int n = static_cast<int>(sys.matrix.rows());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  if (n > 0) {
    if (opt.reduced == ReducedMethod::Direct) {
      LDLT ldlt(sys.matrix);
      if (ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization of the reduced system failed", -1.0);
      x = ldlt.solve(sys.rhs);
    } else {
      const int max_iter = opt.cg_max_iter > 0 ? opt.cg_max_iter : 10 * n;
      const CGResult cg = conjugate_gradient(sys.matrix, sys.rhs, x, opt.cg_rtol, max_iter);
      sol.cg_iterations = cg.iterations;
      sol.cg_energy = cg.energy;
      if (!cg.converged) {
        throw SolverError("CG did not converge in " + std::to_string(max_iter) + " iterations", -1.0);
      }
    }
    sol.relative_residual = relative_residual(sys.matrix, x, sys.rhs);
    if (!(sol.relative_residual <= std::max(opt.residual_tol, 10.0 * opt.cg_rtol))) {
      throw SolverError("reduced system residual " + format_estimate(sol.relative_residual) + " above tolerance", -1.0);
    }
  }
  sol.u = expand(sys.lift_u, disc.V.dofs(), x, 0);
  sol.p = expand(sys.lift_p, disc.D.dofs(), x, sys.n_u);
  return sol;
}

DiscreteSolution defect_correction(const Discretization& disc, const SparseSystem& sys, const SolverOptions& opt,
                                   const std::optional<Eigen::VectorXd>& z0) {
  if (sys.kind != SystemKind::Reduced) throw ConfigError("defect correction needs a reduced system");
  const SparseMatrix& B = sys.constraint;
  const int n = static_cast<int>(sys.matrix.rows());
  const int nz = static_cast<int>(B.rows());
  Eigen::VectorXd z = z0 ? *z0 : Eigen::VectorXd::Zero(nz);
  if (z.size() != nz) throw ConfigError("initial multiplier has the wrong size");

  DiscreteSolution sol;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  LDLT ldlt;
  if (n > 0) {
    ldlt.compute(sys.matrix);
    if (ldlt.info() != Eigen::Success) throw SolverError("LDL^T factorization of the reduced system failed", -1.0);
  }
  const SparseMatrix Bt = B.transpose();
  bool converged = false;
  for (int it = 0; it < opt.max_outer; ++it) {
    const Eigen::VectorXd rhs = sys.rhs - Bt * z;
    const Eigen::VectorXd x_next = n > 0 ? Eigen::VectorXd(ldlt.solve(rhs)) : Eigen::VectorXd(x);
    const Eigen::VectorXd bx = B * x_next;
    const Eigen::VectorXd dz = bx - sys.multiplier_load;
    z += dz;

    OuterStep step;
    step.z_increment = dz.norm();
    step.z_norm = z.norm();
    // The reduced matrix is s + b^T b on the free dofs, so s[x, x] = x.Kx - |bx|^2.
    step.s_energy = x_next.dot(sys.matrix * x_next) - bx.squaredNorm();
    step.u_increment = (x_next.head(sys.n_u) - x.head(sys.n_u)).norm();
    step.p_increment = (x_next.tail(sys.n_p) - x.tail(sys.n_p)).norm();
    sol.history.push_back(step);
    if (it == 0) {
      sol.first_iterate.emplace(expand(sys.lift_u, disc.V.dofs(), x_next, 0),
                                expand(sys.lift_p, disc.D.dofs(), x_next, sys.n_u));
    }
    x = x_next;
    sol.outer_iterations = it + 1;

    const double threshold = opt.defect_relative ? opt.defect_tol * step.z_norm : opt.defect_tol;
    if (step.z_increment <= threshold) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw SolverError("defect correction did not reach the increment tolerance in " + std::to_string(opt.max_outer) +
                          " iterations",
                      -1.0);
  }
  // Residual of the last inner solve, whose right-hand side used the previous multiplier.
  const Eigen::VectorXd z_prev = z - (B * x - sys.multiplier_load);
  sol.relative_residual = n > 0 ? relative_residual(sys.matrix, x, sys.rhs - Bt * z_prev) : 0.0;
  sol.u = expand(sys.lift_u, disc.V.dofs(), x, 0);
  sol.p = expand(sys.lift_p, disc.D.dofs(), x, sys.n_u);
  FEFunction zf = disc.W.zero();
  zf.coeffs = z;
  sol.z = std::move(zf);
  return sol;
}

}  // namespace cauchy
