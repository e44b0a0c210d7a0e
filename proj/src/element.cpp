#include "cauchy/element.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "cauchy/error.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy {

namespace {

// Position of xi1^a xi2^b in the graded monomial ordering.
int monomial_index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }

}  // namespace

ElementGeometry ElementGeometry::of(const Mesh& mesh, int t) {
  ElementGeometry geo;
  const auto& tri = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) geo.x[i] = mesh.vertices[tri[i]];
  geo.jacobian.col(0) = geo.x[1] - geo.x[0];
  geo.jacobian.col(1) = geo.x[2] - geo.x[0];
  geo.area = 0.5 * geo.jacobian.determinant();
  geo.centroid = (geo.x[0] + geo.x[1] + geo.x[2]) / 3.0;
  geo.h = mesh.diameter(t);
  const Eigen::Matrix2d inv = geo.jacobian.inverse();
  geo.grad_lambda.row(1) = inv.row(0);
  geo.grad_lambda.row(2) = inv.row(1);
  geo.grad_lambda.row(0) = -(inv.row(0) + inv.row(1));
  return geo;
}

Eigen::Vector3d ElementGeometry::barycentric(const Point& p) const {
  const Eigen::Vector2d ref = jacobian.inverse() * (p - x[0]);
  return {1.0 - ref.x() - ref.y(), ref.x(), ref.y()};
}

void eval_monomials(int degree, const ElementGeometry& geo, const Point& p, LocalVector& values,
                    LocalGradients& grads) {
  const int n = num_polynomials(degree);
  values.resize(n);
  grads.resize(n, 2);
  const Eigen::Vector2d xi = geo.scaled(p);
  // Powers up to `degree` of each scaled coordinate.
  std::array<double, 8> px{}, py{};
  px[0] = py[0] = 1.0;
  for (int d = 1; d <= degree; ++d) {
    px[d] = px[d - 1] * xi.x();
    py[d] = py[d - 1] * xi.y();
  }
  const double inv_h = 1.0 / geo.h;
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      const int i = monomial_index(a, b);
      values(i) = px[a] * py[b];
      grads(i, 0) = a > 0 ? a * px[a - 1] * py[b] * inv_h : 0.0;
      grads(i, 1) = b > 0 ? b * px[a] * py[b - 1] * inv_h : 0.0;
    }
  }
}

double legendre01(int j, double s) {
  const double x = 2.0 * s - 1.0;
  double p0 = 1.0;
  if (j == 0) return p0;
  double p1 = x;
  for (int n = 2; n <= j; ++n) {
    const double p2 = ((2.0 * n - 1.0) * x * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

OrthonormalBasis::OrthonormalBasis(const ElementGeometry& geo, int degree) : degree_(degree) {
  const int n = num_polynomials(degree);
  coeffs_.setZero(n, n);
  if (n == 0) return;
  const TriangleRule& rule = triangle_rule(2 * degree);
  LocalMatrix gram = LocalMatrix::Zero(n, n);
  LocalVector m;
  LocalGradients g;
  for (int q = 0; q < rule.size(); ++q) {
    const Point p = geo.map(rule.points[q]);
    eval_monomials(degree, geo, p, m, g);
    gram.noalias() += (rule.weights[q] * 2.0 * geo.area) * m * m.transpose();
  }
  const Eigen::LLT<LocalMatrix> llt(gram);
  if (llt.info() != Eigen::Success) throw Error("monomial Gram matrix is not positive definite");
  const LocalMatrix lower = llt.matrixL();
  coeffs_ = lower.triangularView<Eigen::Lower>().solve(LocalMatrix::Identity(n, n));
}

void OrthonormalBasis::eval(const ElementGeometry& geo, const Point& p, LocalVector& values) const {
  LocalGradients grads;
  eval(geo, p, values, grads);
}

void OrthonormalBasis::eval(const ElementGeometry& geo, const Point& p, LocalVector& values,
                            LocalGradients& grads) const {
  if (degree_ < 0) {
    values.resize(0);
    grads.resize(0, 2);
    return;
  }
  LocalVector m;
  LocalGradients g;
  eval_monomials(degree_, geo, p, m, g);
  values.noalias() = coeffs_ * m;
  grads.noalias() = coeffs_ * g;
}

void eval_lagrange(int k, const ElementGeometry& geo, const Point& p, LocalVector& values, LocalGradients& grads) {
  const Eigen::Vector3d lambda = geo.barycentric(p);
  const auto& gl = geo.grad_lambda;
  if (k == 1) {
    values.resize(3);
    grads.resize(3, 2);
    values = lambda;
    grads = gl;
    return;
  }
  if (k != 2) throw ConfigError("Lagrange order must be 1 or 2");
  values.resize(6);
  grads.resize(6, 2);
  for (int i = 0; i < 3; ++i) {
    values(i) = lambda(i) * (2.0 * lambda(i) - 1.0);
    grads.row(i) = (4.0 * lambda(i) - 1.0) * gl.row(i);
    const int a = (i + 1) % 3, b = (i + 2) % 3;
    values(3 + i) = 4.0 * lambda(a) * lambda(b);
    grads.row(3 + i) = 4.0 * (lambda(a) * gl.row(b) + lambda(b) * gl.row(a));
  }
}

RTElementBasis::RTElementBasis(const Mesh& mesh, const FaceTable& faces, int t, int l) : l_(l) {
  if (l < 0 || l > 2) throw ConfigError("Raviart-Thomas order must be 0, 1 or 2");
  const ElementGeometry geo = ElementGeometry::of(mesh, t);
  const int nm = num_polynomials(l + 1);
  const int n = rt_local_size(l);

  // Prime basis: [P_l]^2 followed by xi * (homogeneous degree-l monomials).
  LocalMatrix prime_x = LocalMatrix::Zero(nm, n);
  LocalMatrix prime_y = LocalMatrix::Zero(nm, n);
  int col = 0;
  for (int i = 0; i < num_polynomials(l); ++i) prime_x(i, col++) = 1.0;
  for (int i = 0; i < num_polynomials(l); ++i) prime_y(i, col++) = 1.0;
  for (int b = 0; b <= l; ++b) {
    const int a = l - b;
    prime_x(monomial_index(a + 1, b), col) = 1.0;
    prime_y(monomial_index(a, b + 1), col) = 1.0;
    ++col;
  }

  // dofs(i, j) = functional i applied to prime function j.
  LocalMatrix dofs = LocalMatrix::Zero(n, n);
  LocalVector m;
  LocalGradients g;
  const LineRule& line = line_rule(2 * l + 2);
  for (int e = 0; e < 3; ++e) {
    const Face& face = faces.faces[faces.element_faces[t][e]];
    for (int q = 0; q < line.size(); ++q) {
      const double s = line.points[q];
      const Point p = face.at(mesh, s);
      eval_monomials(l + 1, geo, p, m, g);
      const Eigen::RowVectorXd flux =
          face.normal.x() * (m.transpose() * prime_x) + face.normal.y() * (m.transpose() * prime_y);
      for (int j = 0; j <= l; ++j) {
        dofs.row(e * (l + 1) + j) += (line.weights[q] * face.length * legendre01(j, s)) * flux;
      }
    }
  }
  if (l >= 1) {
    const OrthonormalBasis interior(geo, l - 1);
    const int ni = interior.size();
    const TriangleRule& rule = triangle_rule(2 * l + 1);
    LocalVector phi;
    for (int q = 0; q < rule.size(); ++q) {
      const Point p = geo.map(rule.points[q]);
      const double w = rule.weights[q] * 2.0 * geo.area;
      eval_monomials(l + 1, geo, p, m, g);
      interior.eval(geo, p, phi);
      const Eigen::RowVectorXd vx = m.transpose() * prime_x;
      const Eigen::RowVectorXd vy = m.transpose() * prime_y;
      for (int r = 0; r < ni; ++r) {
        dofs.row(3 * (l + 1) + r) += (w * phi(r)) * vx;
        dofs.row(3 * (l + 1) + ni + r) += (w * phi(r)) * vy;
      }
    }
  }
  const Eigen::FullPivLU<LocalMatrix> lu(dofs);
  if (!lu.isInvertible()) throw Error("Raviart-Thomas degrees of freedom are not unisolvent on element " + std::to_string(t));
  const LocalMatrix dual = lu.inverse();
  coeffs_x_ = prime_x * dual;
  coeffs_y_ = prime_y * dual;
}

void RTElementBasis::eval(const ElementGeometry& geo, const Point& p, LocalGradients& values,
                          LocalVector& divergence) const {
  LocalVector m;
  LocalGradients g;
  eval_monomials(l_ + 1, geo, p, m, g);
  const int n = size();
  values.resize(n, 2);
  values.col(0).noalias() = coeffs_x_.transpose() * m;
  values.col(1).noalias() = coeffs_y_.transpose() * m;
  divergence.noalias() = coeffs_x_.transpose() * g.col(0) + coeffs_y_.transpose() * g.col(1);
}

}  // namespace cauchy
