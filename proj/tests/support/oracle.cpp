#include "oracle.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "cauchy/element.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy::testing {

namespace {

std::vector<FEFunction> unit_functions(SpaceKind kind, int order, int size) {
  std::vector<FEFunction> out;
  out.reserve(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    FEFunction f{kind, order, Eigen::VectorXd::Zero(size)};
    f.coeffs(i) = 1.0;
    out.push_back(std::move(f));
  }
  return out;
}

// Pseudo-inverse keeps the projections well defined when a Gram block is
// restricted to functions that vanish on the element.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& g) { return g.completeOrthogonalDecomposition().pseudoInverse(); }

}  // namespace

std::shared_ptr<const Domain> small_domain(int nx, int ny, double width) {
  BoundingBox box;
  box.hi = Point(width, 1.0);
  const PointPredicate bottom = on_line_y(box, 0.0);
  const PointPredicate left = on_line_x(box, 0.0);
  return std::make_shared<const Domain>(make_domain(generate_union_jack(nx, ny, box), bottom,
                                                    [=](const Point& p) { return bottom(p) || left(p); }));
}

std::shared_ptr<const Domain> hadamard_domain(int nx, int ny) {
  BoundingBox box;
  box.hi = Point(std::numbers::pi, 1.0);
  const PointPredicate bottom = on_line_y(box, 0.0);
  const PointPredicate left = on_line_x(box, 0.0);
  const PointPredicate right = on_line_x(box, std::numbers::pi);
  return std::make_shared<const Domain>(make_domain(
      generate_union_jack(nx, ny, box), bottom, [=](const Point& p) { return bottom(p) || left(p) || right(p); }));
}

DenseForms dense_forms(const Discretization& disc, const ProblemSpec& problem) {
  const Domain& domain = *disc.domain;
  const SpaceConfig& cfg = disc.config;
  const int nv = disc.V.dofs().size, nd = disc.D.dofs().size, nw = disc.W.dofs().size;
  const auto ev = unit_functions(SpaceKind::Lagrange, disc.V.order(), nv);
  const auto ed = unit_functions(SpaceKind::RaviartThomas, disc.D.order(), nd);
  const auto ew = unit_functions(SpaceKind::Discontinuous, disc.W.order(), nw);
  // P_{l-1} space for the projection in the well-balanced dual stabilizer.
  const DGSpace low(disc.domain, cfg.l - 1);
  const int nl = low.dofs().size;
  const auto el = unit_functions(SpaceKind::Discontinuous, cfg.l - 1, nl);

  const bool reduced = cfg.variant == Variant::Reduced;
  const double h = domain.h, mu = problem.mu;
  const double grad_weight = (reduced ? 0.5 : 1.0) * cfg.gamma_T * std::pow(h, 2 * cfg.k);
  const double mass_weight = reduced ? 0.0 : 0.5 * mu * mu * h * h;

  DenseForms F;
  F.suu.setZero(nv, nv);
  F.sup.setZero(nv, nd);
  F.spp.setZero(nd, nd);
  F.bu.setZero(nw, nv);
  F.bp.setZero(nw, nd);
  F.sstar.setZero(nw, nw);
  F.ruu.setZero(nv, nv);
  F.rup.setZero(nv, nd);
  F.rpp.setZero(nd, nd);
  F.load_w.setZero(nw);
  F.load_u.setZero(nv);
  F.load_p.setZero(nd);

  const TriangleRule& rule = triangle_rule(2 * std::max(cfg.k, cfg.l + 1) + 6);
  Eigen::VectorXd phi(nv), div(nd), wv(nw), lv(nl);
  Eigen::MatrixXd gphi(nv, 2), q(nd, 2), gw(nw, 2);
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    Eigen::MatrixXd Mvv = Eigen::MatrixXd::Zero(nv, nv), Gw = Eigen::MatrixXd::Zero(nw, nw),
                    Cwv = Eigen::MatrixXd::Zero(nw, nv);
    Eigen::MatrixXd Ggg = Eigen::MatrixXd::Zero(nw, nw), Gl = Eigen::MatrixXd::Zero(nl, nl),
                    Cx = Eigen::MatrixXd::Zero(nl, nw), Cy = Eigen::MatrixXd::Zero(nl, nw);
    for (int i = 0; i < rule.size(); ++i) {
      const Point x = geo.map(rule.points[i]);
      const double w = rule.weights[i] * 2.0 * geo.area;
      for (int a = 0; a < nv; ++a) {
        phi(a) = evaluate_in_element(disc.V, ev[a], t, x);
        gphi.row(a) = gradient_in_element(disc.V, ev[a], t, x).transpose();
      }
      for (int a = 0; a < nd; ++a) {
        q.row(a) = evaluate_in_element(disc.D, ed[a], t, x).transpose();
        div(a) = divergence_in_element(disc.D, ed[a], t, x);
      }
      for (int a = 0; a < nw; ++a) {
        wv(a) = evaluate_in_element(disc.W, ew[a], t, x);
        gw.row(a) = gradient_in_element(disc.W, ew[a], t, x).transpose();
      }
      for (int a = 0; a < nl; ++a) lv(a) = evaluate_in_element(low, el[a], t, x);

      const Eigen::MatrixXd agrad = gphi * problem.A.transpose();
      F.suu += w * (0.5 * agrad * agrad.transpose() + grad_weight * gphi * gphi.transpose());
      F.sup -= 0.5 * w * agrad * q.transpose();
      F.spp += 0.5 * w * q * q.transpose();
      Mvv += w * phi * phi.transpose();
      Gw += w * wv * wv.transpose();
      Cwv += w * wv * phi.transpose();

      F.bu += w * mu * wv * phi.transpose();
      F.bp += w * wv * div.transpose();

      Ggg += w * gw * gw.transpose();
      Gl += w * lv * lv.transpose();
      Cx += w * lv * gw.col(0).transpose();
      Cy += w * lv * gw.col(1).transpose();

      const Eigen::VectorXd rv = mu * phi;
      F.ruu += w * rv * rv.transpose();
      F.rup += w * rv * div.transpose();
      F.rpp += w * div * div.transpose();

      const double f = problem.source(x);
      F.load_w += w * f * wv;
      F.load_u += w * f * rv;
      F.load_p += w * f * div;
    }
    // ((1 - pi_W) u, (1 - pi_W) v)_K = (u, v)_K - C^T G^+ C.
    if (mass_weight != 0.0) F.suu += mass_weight * (Mvv - Cwv.transpose() * pinv(Gw) * Cwv);
    switch (cfg.variant) {
      case Variant::WellBalanced: {
        Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(nw, nw);
        if (nl > 0) {
          const Eigen::MatrixXd gi = pinv(Gl);
          proj = Cx.transpose() * gi * Cx + Cy.transpose() * gi * Cy;
        }
        F.sstar += 0.5 * cfg.gamma_star * (Ggg - proj);
        break;
      }
      case Variant::Reduced: F.sstar += Gw; break;
      default: break;
    }
  }
  return F;
}

namespace {

Eigen::MatrixXd restrict(const Eigen::MatrixXd& m, const DofMap& rows, const DofMap& cols) {
  Eigen::MatrixXd out(rows.num_free(), cols.num_free());
  for (int i = 0; i < rows.num_free(); ++i) {
    for (int j = 0; j < cols.num_free(); ++j) out(i, j) = m(rows.free_dofs[i], cols.free_dofs[j]);
  }
  return out;
}

Eigen::MatrixXd restrict_cols(const Eigen::MatrixXd& m, const DofMap& cols) {
  Eigen::MatrixXd out(m.rows(), cols.num_free());
  for (int j = 0; j < cols.num_free(); ++j) out.col(j) = m.col(cols.free_dofs[j]);
  return out;
}

Eigen::VectorXd restrict(const Eigen::VectorXd& v, const DofMap& dofs) {
  Eigen::VectorXd out(dofs.num_free());
  for (int i = 0; i < dofs.num_free(); ++i) out(i) = v(dofs.free_dofs[i]);
  return out;
}

}  // namespace

DenseSystem dense_full(const Discretization& disc, const ProblemSpec& problem) {
  const DenseForms F = dense_forms(disc, problem);
  const DofMap& V = disc.V.dofs();
  const DofMap& D = disc.D.dofs();
  const int nu = V.num_free(), np = D.num_free(), nz = disc.W.dofs().size;
  const Eigen::VectorXd gu = dirichlet_lifting(disc.V, problem).coeffs;
  const Eigen::VectorXd gp = neumann_lifting(disc.D, disc.V, problem).coeffs;

  DenseSystem sys;
  sys.matrix.setZero(nu + np + nz, nu + np + nz);
  sys.matrix.block(0, 0, nu, nu) = restrict(F.suu, V, V);
  sys.matrix.block(0, nu, nu, np) = restrict(F.sup, V, D);
  sys.matrix.block(nu, 0, np, nu) = restrict(F.sup, V, D).transpose();
  sys.matrix.block(nu, nu, np, np) = restrict(F.spp, D, D);
  const Eigen::MatrixXd Bu = restrict_cols(F.bu, V), Bp = restrict_cols(F.bp, D);
  sys.matrix.block(nu + np, 0, nz, nu) = Bu;
  sys.matrix.block(nu + np, nu, nz, np) = Bp;
  sys.matrix.block(0, nu + np, nu, nz) = Bu.transpose();
  sys.matrix.block(nu, nu + np, np, nz) = Bp.transpose();
  sys.matrix.block(nu + np, nu + np, nz, nz) = -F.sstar;

  // Lifted data move to the right-hand side.
  const Eigen::VectorXd su = F.suu * gu + F.sup * gp;
  const Eigen::VectorXd sp = F.sup.transpose() * gu + F.spp * gp;
  sys.rhs.setZero(nu + np + nz);
  sys.rhs.head(nu) = -restrict(su, V);
  sys.rhs.segment(nu, np) = -restrict(sp, D);
  sys.rhs.tail(nz) = F.load_w - F.bu * gu - F.bp * gp;
  return sys;
}

DenseSystem dense_reduced(const Discretization& disc, const ProblemSpec& problem) {
  const DenseForms F = dense_forms(disc, problem);
  const DofMap& V = disc.V.dofs();
  const DofMap& D = disc.D.dofs();
  const int nu = V.num_free(), np = D.num_free();
  const Eigen::VectorXd gu = dirichlet_lifting(disc.V, problem).coeffs;
  const Eigen::VectorXd gp = neumann_lifting(disc.D, disc.V, problem).coeffs;

  const Eigen::MatrixXd Kuu = F.suu + F.ruu, Kup = F.sup + F.rup, Kpp = F.spp + F.rpp;
  DenseSystem sys;
  sys.matrix.setZero(nu + np, nu + np);
  sys.matrix.block(0, 0, nu, nu) = restrict(Kuu, V, V);
  sys.matrix.block(0, nu, nu, np) = restrict(Kup, V, D);
  sys.matrix.block(nu, 0, np, nu) = restrict(Kup, V, D).transpose();
  sys.matrix.block(nu, nu, np, np) = restrict(Kpp, D, D);
  const Eigen::VectorXd ku = Kuu * gu + Kup * gp;
  const Eigen::VectorXd kp = Kup.transpose() * gu + Kpp * gp;
  sys.rhs.setZero(nu + np);
  sys.rhs.head(nu) = restrict(Eigen::VectorXd(F.load_u - ku), V);
  sys.rhs.tail(np) = restrict(Eigen::VectorXd(F.load_p - kp), D);
  return sys;
}

double relative_difference(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  if (a.size() == 0) return 0.0;
  const double scale = b.cwiseAbs().maxCoeff();
  const double diff = (a - b).cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

namespace {

// Legendre coefficients of h_F^{-1} pi_{F,l}[x] scaled so that sum c_j^2 / (2j + 1) is the squared norm,
// and the raw moments <[x], P_j>_F / h_F that the face dofs of eta_h reproduce.
struct FaceJump {
  std::vector<double> moments;
  double norm2 = 0.0;
};

FaceJump face_jump(const DGSpace& W, const FEFunction& x, int f, int l) {
  const Domain& domain = W.domain();
  const Face& face = domain.faces.faces[f];
  const LineRule& line = gauss_legendre(W.order() + l + 4);
  FaceJump out;
  for (int j = 0; j <= l; ++j) {
    double m = 0.0;
    for (int i = 0; i < line.size(); ++i) {
      const double s = line.points[i];
      const Point p = face.at(domain.mesh, s);
      double jump = evaluate_in_element(W, x, face.left, p);
      if (!face.is_boundary()) jump -= evaluate_in_element(W, x, face.right, p);
      m += line.weights[i] * face.length * jump * legendre01(j, s);
    }
    m /= face.length;  // h_F = |F|
    out.moments.push_back(m);
    // pi_{F,l}[x] = sum_j (2j + 1) <[x], P_j>/|F| P_j, and h_F^{-1}||.||^2 = sum_j (2j + 1) (<[x], P_j>/|F|)^2.
    out.norm2 += (2 * j + 1) * m * m;
  }
  return out;
}

}  // namespace

double eta_stability_ratio(const DGSpace& W, const FEFunction& x, const RTSpace& D) {
  const Domain& domain = D.domain();
  const int l = D.order();
  const FEFunction eta = gradient_reconstruction(W, x, D);
  const TriangleRule& rule = triangle_rule(2 * std::max(W.order(), l + 1) + 4);
  double eta2 = 0.0, grad2 = 0.0;
  LocalVector phi;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    const OrthonormalBasis basis(geo, l - 1);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis.size(), 2);
    for (int i = 0; i < rule.size(); ++i) {
      const Point p = geo.map(rule.points[i]);
      const double w = rule.weights[i] * 2.0 * geo.area;
      eta2 += w * evaluate_in_element(D, eta, t, p).squaredNorm();
      if (basis.size() == 0) continue;
      basis.eval(geo, p, phi);
      c += w * phi.head(basis.size()) * gradient_in_element(W, x, t, p).transpose();
    }
    grad2 += c.squaredNorm();
  }
  double jump2 = 0.0;
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    if (!domain.tags.sigma(f)) jump2 += face_jump(W, x, f, l).norm2;
  }
  return std::sqrt(eta2 / (grad2 + jump2));
}

double eta_dof_defect(const DGSpace& W, const FEFunction& x, const RTSpace& D) {
  const Domain& domain = D.domain();
  const int l = D.order();
  const FEFunction eta = gradient_reconstruction(W, x, D);
  double worst = 0.0, scale = 0.0;

  const LineRule& line = gauss_legendre(l + 4);
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    const Face& face = domain.faces.faces[f];
    std::vector<double> target(static_cast<std::size_t>(l + 1), 0.0);
    if (!domain.tags.sigma(f)) target = face_jump(W, x, f, l).moments;
    for (int j = 0; j <= l; ++j) {
      double m = 0.0;
      for (int i = 0; i < line.size(); ++i) {
        const double s = line.points[i];
        m += line.weights[i] * face.length * evaluate_in_element(D, eta, face.left, face.at(domain.mesh, s)).dot(face.normal) *
             legendre01(j, s);
      }
      worst = std::max(worst, std::abs(m - target[j]));
      scale = std::max(scale, std::abs(target[j]));
    }
  }
  if (l >= 1) {
    const TriangleRule& rule = triangle_rule(2 * std::max(W.order(), l + 1) + 4);
    LocalVector phi;
    for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
      const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
      const OrthonormalBasis basis(geo, l - 1);
      Eigen::MatrixXd got = Eigen::MatrixXd::Zero(basis.size(), 2), want = got;
      for (int i = 0; i < rule.size(); ++i) {
        const Point p = geo.map(rule.points[i]);
        const double w = rule.weights[i] * 2.0 * geo.area;
        basis.eval(geo, p, phi);
        got += w * phi.head(basis.size()) * evaluate_in_element(D, eta, t, p).transpose();
        want -= w * phi.head(basis.size()) * gradient_in_element(W, x, t, p).transpose();
      }
      worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
      scale = std::max(scale, want.cwiseAbs().maxCoeff());
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

}  // namespace cauchy::testing
