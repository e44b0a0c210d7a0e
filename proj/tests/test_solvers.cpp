#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "cauchy/error.hpp"
#include "cauchy/experiments.hpp"
#include "cauchy/solvers.hpp"
#include "oracle.hpp"

namespace cauchy {
namespace {

ProblemSpec hadamard_problem(int n) {
  ProblemSpec p;
  p.psi = hadamard_exact(n).psi;
  return p;
}

ProblemSpec mixed_problem() {
  ProblemSpec p;
  p.A << 1.5, 0.2, 0.2, 1.0;
  p.mu = 0.5;
  // Polynomial source so the dense reference sees the same loads.
  p.f = [](const Point& x) { return x.x() - x.y() * x.y(); };
  p.g = [](const Point& x) { return std::sin(x.x()); };
  p.psi = [](const Point& x) { return 1.0 + x.x(); };
  return p;
}

Eigen::VectorXd free_part(const FEFunction& f, const DofMap& dofs) {
  Eigen::VectorXd out(dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i) out(i) = f.coeffs(dofs.free_dofs[i]);
  return out;
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double s = b.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff() / (s > 0.0 ? s : 1.0);
}

TEST(SolveFull, MatchesDenseSolve) {
  auto d = testing::small_domain(2, 1, 1.5);
  for (Variant v : {Variant::InfSup, Variant::WellBalanced, Variant::WellBalancedNoDual}) {
    for (int k : {1, 2}) {
      const Discretization disc(d, SpaceConfig::make(v, k, 1e-2, 0.3));
      const ProblemSpec problem = mixed_problem();
      const DiscreteSolution sol = solve_full(disc, assemble_full(disc, problem));
      const testing::DenseSystem ref = testing::dense_full(disc, problem);
      const Eigen::VectorXd x = ref.matrix.fullPivLu().solve(ref.rhs);
      const int nu = disc.V.dofs().num_free(), np = disc.D.dofs().num_free();
      EXPECT_LT(rel(free_part(sol.u, disc.V.dofs()), x.head(nu)), 1e-9) << to_string(v) << " k=" << k;
      EXPECT_LT(rel(free_part(sol.p, disc.D.dofs()), x.segment(nu, np)), 1e-9) << to_string(v) << " k=" << k;
      EXPECT_LT(rel(sol.z->coeffs, x.tail(disc.W.dofs().size)), 1e-9) << to_string(v) << " k=" << k;
    }
  }
}

TEST(SolveFull, FullFluxConstraintOnWholeBoundaryIsReportedSingular) {
  // Sigma = whole boundary with mu = 0: constants in W are invisible to b, so the system is singular.
  BoundingBox box;
  box.hi = Point(1.0, 1.0);
  const PointPredicate all = [](const Point&) { return true; };
  auto d = std::make_shared<const Domain>(make_domain(generate_union_jack(4, 4, box), all, all));
  const Discretization disc(d, SpaceConfig::make(Variant::InfSup, 1));
  ProblemSpec p;
  p.f = [](const Point&) { return 1.0; };
  try {
    solve_full(disc, assemble_full(disc, p));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_TRUE(e.condition_estimate() < 0.0 || e.condition_estimate() > 1e12);
  }
}

TEST(SolveReduced, ConjugateGradientMatchesDirect) {
  auto d = testing::hadamard_domain(6, 2);
  for (int k : {1, 2}) {
    const Discretization disc(d, SpaceConfig::make(Variant::Reduced, k, 1e-2));
    const SparseSystem sys = assemble_reduced(disc, hadamard_problem(1));
    const DiscreteSolution direct = solve_reduced(disc, sys);
    SolverOptions cg;
    cg.reduced = ReducedMethod::ConjugateGradient;
    cg.cg_rtol = 1e-13;
    const DiscreteSolution iter = solve_reduced(disc, sys, cg);
    EXPECT_GT(iter.cg_iterations, 0);
    EXPECT_LT(rel(iter.u.coeffs, direct.u.coeffs), 1e-9) << "k=" << k;
    EXPECT_LT(rel(iter.p.coeffs, direct.p.coeffs), 1e-9) << "k=" << k;
    // The quadratic energy decreases monotonically along CG iterates.
    for (std::size_t i = 1; i < iter.cg_energy.size(); ++i) {
      EXPECT_LE(iter.cg_energy[i], iter.cg_energy[i - 1] + 1e-14 * std::abs(iter.cg_energy[i - 1]));
    }
  }
}

TEST(SolveReduced, CgIterationCapRaisesSolverError) {
  auto d = testing::hadamard_domain(6, 2);
  const Discretization disc(d, SpaceConfig::make(Variant::Reduced, 1, 1e-2));
  SolverOptions cg;
  cg.reduced = ReducedMethod::ConjugateGradient;
  cg.cg_max_iter = 2;
  EXPECT_THROW(solve_reduced(disc, assemble_reduced(disc, hadamard_problem(1)), cg), SolverError);
}

// J(x) = 1/2 x.Kx - b.x over the free dofs is minimized by the reduced solution.
TEST(SolveReduced, MinimizesTheLeastSquaresFunctional) {
  auto d = testing::hadamard_domain(12, 4);
  const HadamardFields h = hadamard_exact(1);
  for (int k : {1, 2}) {
    const Discretization disc(d, SpaceConfig::make(Variant::Reduced, k));
    ProblemSpec problem = hadamard_problem(1);
    problem.g = h.u;
    const SparseSystem sys = assemble_reduced(disc, problem);
    const DiscreteSolution sol = solve_reduced(disc, sys);
    auto J = [&](const FEFunction& u, const FEFunction& p) {
      Eigen::VectorXd x(sys.n_u + sys.n_p);
      x << free_part(u, disc.V.dofs()), free_part(p, disc.D.dofs());
      return 0.5 * x.dot(sys.matrix * x) - sys.rhs.dot(x);
    };
    const FEFunction iu = nodal_interpolant(disc.V, h.u);
    const FEFunction rp = rt_interpolant(disc.D, h.grad_u);
    EXPECT_LE(J(sol.u, sol.p), J(iu, rp));
  }
}

// With s* = 0 the defect-correction limit is the full solution of the
// matching primal-dual variant; the reduced Tikhonov weight is halved.
TEST(DefectCorrection, LimitIsThePrimalDualSolution) {
  auto d = testing::hadamard_domain(12, 4);
  for (int k : {1, 2}) {
    for (int l : {k - 1, k}) {
      const double gamma = 1e-3;
      const Discretization red(d, SpaceConfig::make(Variant::Reduced, k, gamma, 0.1, l));
      SolverOptions opt;
      opt.defect_tol = 1e-13;
      opt.max_outer = 200;
      const DiscreteSolution dc = defect_correction(red, assemble_reduced(red, hadamard_problem(1)), opt);
      const Variant full_variant = l == k ? Variant::InfSup : Variant::WellBalancedNoDual;
      const Discretization full(d, SpaceConfig::make(full_variant, k, gamma / 2));
      const DiscreteSolution ref = solve_full(full, assemble_full(full, hadamard_problem(1)));
      EXPECT_LT(rel(dc.u.coeffs, ref.u.coeffs), 1e-6) << "k=" << k << " l=" << l;
      EXPECT_LT(rel(dc.p.coeffs, ref.p.coeffs), 1e-6) << "k=" << k << " l=" << l;
      EXPECT_LT(rel(dc.z->coeffs, ref.z->coeffs), 1e-6) << "k=" << k << " l=" << l;
    }
  }
}

TEST(DefectCorrection, TelescopingIdentityWithHomogeneousData) {
  auto d = testing::hadamard_domain(6, 2);
  for (int k : {1, 2}) {
    const Discretization disc(d, SpaceConfig::make(Variant::Reduced, k, 1e-2));
    const SparseSystem sys = assemble_reduced(disc, ProblemSpec{});
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::VectorXd z0(disc.W.dofs().size);
    for (int i = 0; i < z0.size(); ++i) z0(i) = u(rng);
    SolverOptions opt;
    opt.defect_tol = 1e-10;
    opt.max_outer = 2000;
    const DiscreteSolution sol = defect_correction(disc, sys, opt, z0);
    const double start = 0.5 * z0.squaredNorm();
    double sum = 0.0;
    for (std::size_t n = 0; n < sol.history.size(); ++n) {
      const OuterStep& s = sol.history[n];
      sum += s.s_energy + 0.5 * s.z_increment * s.z_increment;
      EXPECT_NEAR(0.5 * s.z_norm * s.z_norm + sum, start, 1e-10 * start) << "step " << n;
      if (n > 0) {
        EXPECT_LE(s.z_increment, sol.history[n - 1].z_increment * (1 + 1e-12));
      }
    }
  }
}

TEST(ZeroData, EveryMethodReturnsZero) {
  auto d = testing::hadamard_domain(6, 2);
  const ProblemSpec zero;
  for (Variant v : {Variant::InfSup, Variant::WellBalanced, Variant::WellBalancedNoDual}) {
    for (int k : {1, 2}) {
      const Discretization disc(d, SpaceConfig::make(v, k));
      const DiscreteSolution sol = solve_full(disc, assemble_full(disc, zero));
      EXPECT_EQ(sol.u.coeffs.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(sol.p.coeffs.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(sol.z->coeffs.cwiseAbs().maxCoeff(), 0.0);
    }
  }
  for (int k : {1, 2}) {
    const Discretization disc(d, SpaceConfig::make(Variant::Reduced, k));
    const SparseSystem sys = assemble_reduced(disc, zero);
    SolverOptions cg;
    cg.reduced = ReducedMethod::ConjugateGradient;
    for (const DiscreteSolution& sol : {solve_reduced(disc, sys), solve_reduced(disc, sys, cg)}) {
      EXPECT_EQ(sol.u.coeffs.cwiseAbs().maxCoeff(), 0.0);
      EXPECT_EQ(sol.p.coeffs.cwiseAbs().maxCoeff(), 0.0);
    }
    const DiscreteSolution dc = defect_correction(disc, sys);
    EXPECT_EQ(dc.outer_iterations, 1);
    EXPECT_EQ(dc.u.coeffs.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(dc.z->coeffs.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Solvers, WrongSystemKindIsAConfigError) {
  auto d = testing::hadamard_domain(6, 2);
  const Discretization red(d, SpaceConfig::make(Variant::Reduced, 1));
  const Discretization full(d, SpaceConfig::make(Variant::InfSup, 1));
  const SparseSystem rs = assemble_reduced(red, ProblemSpec{});
  const SparseSystem fs = assemble_full(full, ProblemSpec{});
  EXPECT_THROW(solve_full(red, rs), ConfigError);
  EXPECT_THROW(solve_reduced(full, fs), ConfigError);
  EXPECT_THROW(defect_correction(full, fs), ConfigError);
  EXPECT_THROW(defect_correction(red, rs, {}, Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST(Solvers, HagerEstimateOnDiagonalMatrix) {
  Eigen::VectorXd diag(4);
  diag << 4.0, 0.5, 2.0, 1e-3;
  const double est = inverse_norm1_estimate(
      4, [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(b.cwiseQuotient(diag)); },
      [&](const Eigen::VectorXd& b) { return Eigen::VectorXd(b.cwiseQuotient(diag)); });
  EXPECT_NEAR(est, 1e3, 1e-9);
}

}  // namespace
}  // namespace cauchy
