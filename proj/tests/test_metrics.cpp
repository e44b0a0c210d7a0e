#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cauchy/error.hpp"
#include "cauchy/experiments.hpp"
#include "cauchy/metrics.hpp"
#include "oracle.hpp"

namespace cauchy {
namespace {

TEST(FitRates, GeometricAndConstantSequences) {
  EXPECT_NEAR(fit_rate({1.0, 0.5, 0.25}, {1.0, 0.25, 0.0625}), 2.0, 1e-14);
  EXPECT_NEAR(fit_rate({1.0, 0.5, 0.25}, {3.0, 3.0, 3.0}), 0.0, 1e-14);

  RateTable t;
  for (double h : {1.0, 0.5, 0.25, 0.125}) t.add_row(h, {{"a", h * h * h}, {"b", 0.1}});
  const auto r = fit_rates(t, 3);
  EXPECT_NEAR(r.at("a"), 3.0, 1e-12);
  EXPECT_NEAR(r.at("b"), 0.0, 1e-12);
}

TEST(FitRates, Errors) {
  RateTable t;
  t.add_row(1.0, {{"a", 1.0}});
  t.add_row(0.5, {{"a", 0.5}});
  EXPECT_THROW(fit_rates(t, 1), ConfigError);
  EXPECT_THROW(fit_rates(t, 3), ConfigError);
  EXPECT_THROW(t.add_row(0.7, {{"a", 0.1}}), ConfigError);
  RateTable u;
  u.add_row(1.0, {{"a", 1.0}});
  EXPECT_THROW(u.add_row(0.5, {{"b", 1.0}}), ConfigError);
}

TEST(ErrorNorms, InterpolantOfExactSolutionAndZeroFlag) {
  auto d = testing::hadamard_domain(12, 4);
  const LagrangeSpace V(d, 1);
  const HadamardFields h = hadamard_exact(1);
  const ExactSolution exact{h.u, h.grad_u};
  const ErrorReport r = error_norms(V, nodal_interpolant(V, h.u), exact);
  EXPECT_FALSE(r.zero_exact);
  EXPECT_GT(r.l2_global, 0.0);
  EXPECT_LT(r.l2_global, 1e-2);
  // Absolute local errors cannot exceed the global ones.
  EXPECT_LE(r.abs_l2_local, r.abs_l2_global);
  EXPECT_LE(r.abs_h1s_local, r.abs_h1s_global);

  const ExactSolution zero{[](const Point&) { return 0.0; }, [](const Point&) { return Eigen::Vector2d::Zero().eval(); }};
  FEFunction u = V.zero();
  u.coeffs.setConstant(0.5);
  const ErrorReport z = error_norms(V, u, zero);
  EXPECT_TRUE(z.zero_exact);
  EXPECT_NEAR(z.l2_global, 0.5 * std::sqrt(std::numbers::pi), 1e-12);
  EXPECT_THROW(error_norms(V, u, zero, 0.0), ConfigError);
}

TEST(TripleNorm, KernelHomogeneityAndZero) {
  auto d = testing::hadamard_domain(6, 2);
  ProblemSpec p;
  for (Variant v : {Variant::InfSup, Variant::WellBalancedNoDual, Variant::Reduced}) {
    const Discretization disc(d, SpaceConfig::make(v, 1, 0.0));
    // v affine with div(grad v) = 0: a kernel pair when gamma_T = 0.
    const FEFunction u = nodal_interpolant(disc.V, [](const Point& x) { return 2.0 * x.x() - x.y(); });
    const FEFunction q = rt_interpolant(disc.D, [](const Point&) { return Eigen::Vector2d(2.0, -1.0); });
    EXPECT_NEAR(triple_norm(disc, p, u, q, 0), 0.0, 1e-12);
    EXPECT_EQ(triple_norm(disc, p, disc.V.zero(), disc.D.zero(), 1), 0.0);

    std::mt19937 rng(2);
    std::uniform_real_distribution<double> dist(-1, 1);
    FEFunction a = disc.V.zero(), b = disc.D.zero();
    for (int i = 0; i < a.coeffs.size(); ++i) a.coeffs(i) = dist(rng);
    for (int i = 0; i < b.coeffs.size(); ++i) b.coeffs(i) = dist(rng);
    const double n1 = triple_norm(disc, p, a, b, 1);
    a.coeffs *= -3.0;
    b.coeffs *= -3.0;
    EXPECT_NEAR(triple_norm(disc, p, a, b, 1), 3.0 * n1, 1e-12 * n1);
  }
  const Discretization disc(d, SpaceConfig::make(Variant::InfSup, 1));
  EXPECT_THROW(triple_norm(disc, p, disc.V.zero(), disc.D.zero(), 2), ConfigError);
}

TEST(Norm1h, SingleJumpOnTwoTriangles) {
  // Indicator of the lower triangle: interior jump 1 on the diagonal, trace 1 on its Sigma' face.
  Mesh mesh = make_mesh({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}, {{0, 1, 2}, {0, 2, 3}});
  mesh.bbox.hi = Point(1, 1);
  const auto bottom = on_line_y(mesh.bbox, 0.0);
  auto d = std::make_shared<const Domain>(make_domain(std::move(mesh), bottom, bottom));
  const DGSpace W(d, 0);
  FEFunction x = W.zero();
  x.coeffs(W.dofs().element(0)[0]) = 1.0;
  x.coeffs /= evaluate_in_element(W, x, 0, ElementGeometry::of(d->mesh, 0).centroid);
  // h_F^{-1} ||1||_F^2 = 1 per face: the diagonal and the right edge (the bottom edge is Sigma).
  EXPECT_NEAR(norm_1h(W, x, 0), std::sqrt(2.0), 1e-14);
}

TEST(Norm1h, ContinuousFunctionWithoutBoundaryJumps) {
  // Sigma covers the whole boundary, so only interior jumps count and those vanish.
  BoundingBox box;
  box.hi = Point(1, 1);
  const PointPredicate all = [](const Point&) { return true; };
  auto d = std::make_shared<const Domain>(make_domain(generate_union_jack(3, 3, box), all, all));
  const DGSpace W(d, 1);
  const FEFunction x = project_element(W, [](const Point& p) { return 2.0 * p.x() + p.y(); });
  EXPECT_NEAR(norm_1h(W, x, 1), std::sqrt(5.0), 1e-12);
}

TEST(ResidualReport, ExactDiscreteDataGivesTinyResidual) {
  // u = x on (0,pi) x (0,1): u in V, grad u in RT0, f = 0, psi = -du/dy = 0.
  auto d = testing::hadamard_domain(6, 2);
  const Discretization disc(d, SpaceConfig::make(Variant::InfSup, 1, 0.0));
  ProblemSpec p;
  p.g = [](const Point& x) { return x.x(); };
  const ExactSolution exact{[](const Point& x) { return x.x(); }, [](const Point&) { return Eigen::Vector2d(1.0, 0.0); }};
  const DiscreteSolution sol = solve_full(disc, assemble_full(disc, p));
  const ResidualReport r = residual_report(disc, p, exact, sol);
  EXPECT_EQ(r.zeta, 1);
  EXPECT_LT(r.total, 1e-9);
  EXPECT_LT(r.max_conservation, 1e-12);
  EXPECT_LT(r.flux_sigma, 1e-12);
}

TEST(LocalElements, BottomHalf) {
  auto d = testing::hadamard_domain(4, 4);
  const auto inside = local_elements(*d, 0.5);
  int count = 0;
  for (char c : inside) count += c;
  EXPECT_EQ(count, d->mesh.num_triangles() / 2);
  EXPECT_THROW(local_elements(*d, 1.5), ConfigError);
}

}  // namespace
}  // namespace cauchy
