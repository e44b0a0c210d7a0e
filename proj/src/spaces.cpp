#include "cauchy/spaces.hpp"

#include <algorithm>
#include <cmath>

#include "cauchy/error.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy {

namespace {

void finalize(DofMap& dofs) {
  dofs.free_index.assign(static_cast<std::size_t>(dofs.size), -1);
  dofs.free_dofs.clear();
  for (int i = 0; i < dofs.size; ++i) {
    if (!dofs.constrained[static_cast<std::size_t>(i)]) {
      dofs.free_index[static_cast<std::size_t>(i)] = dofs.num_free();
      dofs.free_dofs.push_back(i);
    }
  }
}

// Rule used for projecting non-polynomial data onto faces.
const LineRule& data_line_rule() {
  static const LineRule rule = gauss_legendre(12);
  return rule;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::InfSup: return "infsup";
    case Variant::WellBalanced: return "wellbalanced";
    case Variant::WellBalancedNoDual: return "wellbalanced-nodual";
    case Variant::Reduced: return "reduced";
  }
  return "unknown";
}

Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::InfSup, Variant::WellBalanced, Variant::WellBalancedNoDual, Variant::Reduced}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

SpaceConfig SpaceConfig::make(Variant variant, int k, double gamma_T, double gamma_star, std::optional<int> l,
                              double mu) {
  SpaceConfig c;
  c.k = k;
  c.variant = variant;
  c.gamma_T = gamma_T;
  c.gamma_star = gamma_star;
  switch (variant) {
    case Variant::InfSup: c.l = c.m = k; break;
    case Variant::WellBalanced: c.l = k - 1, c.m = k; break;
    case Variant::WellBalancedNoDual: c.l = c.m = k - 1; break;
    case Variant::Reduced:
      c.l = l.value_or(k - 1);
      c.m = mu == 0.0 ? c.l : k;
      break;
  }
  if (l && variant != Variant::Reduced && *l != c.l) {
    throw ConfigError("variant " + to_string(variant) + " fixes the flux order to " + std::to_string(c.l));
  }
  c.validate();
  return c;
}

void SpaceConfig::validate() const {
  if (k < 1 || k > 2) throw ConfigError("Lagrange order k must be 1 or 2");
  if (l < k - 1 || l > k) throw ConfigError("flux order must satisfy k-1 <= l <= k");
  if (m < l || m > k) throw ConfigError("multiplier order must satisfy l <= m <= k");
  if (!(gamma_T >= 0.0)) throw ConfigError("gamma_T must be non-negative");
  switch (variant) {
    case Variant::InfSup:
      if (l != k || m != k) throw ConfigError("infsup variant needs l = m = k");
      break;
    case Variant::WellBalanced:
      if (l != k - 1 || m != k) throw ConfigError("wellbalanced variant needs l = k-1, m = k");
      if (!(gamma_star > 0.0)) throw ConfigError("wellbalanced variant needs gamma_star > 0");
      break;
    case Variant::WellBalancedNoDual:
      if (l != k - 1 || m != k - 1) throw ConfigError("wellbalanced-nodual variant needs l = m = k-1");
      break;
    case Variant::Reduced: break;
  }
}

// ---------------------------------------------------------------------------

LagrangeSpace::LagrangeSpace(std::shared_ptr<const Domain> domain, int k) : domain_(std::move(domain)), k_(k) {
  if (k < 1 || k > 2) throw ConfigError("Lagrange order must be 1 or 2");
  const Mesh& mesh = domain_->mesh;
  const FaceTable& faces = domain_->faces;
  const int nv = mesh.num_vertices();
  const int nf = faces.num_faces();
  dofs_.kind = SpaceKind::Lagrange;
  dofs_.order = k;
  dofs_.size = nv + (k == 2 ? nf : 0);
  dofs_.local_size = lagrange_local_size(k);
  dofs_.element_dofs.reserve(static_cast<std::size_t>(mesh.num_triangles() * dofs_.local_size));
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    for (int v : mesh.triangles[t]) dofs_.element_dofs.push_back(v);
    if (k == 2) {
      for (int f : faces.element_faces[t]) dofs_.element_dofs.push_back(nv + f);
    }
  }
  for (int v = 0; v < nv; ++v) dofs_.entity.push_back({EntityKind::Vertex, v});
  if (k == 2) {
    for (int f = 0; f < nf; ++f) dofs_.entity.push_back({EntityKind::Face, f});
  }
  dofs_.constrained.assign(static_cast<std::size_t>(dofs_.size), 0);
  for (int f = 0; f < nf; ++f) {
    if (!domain_->tags.dirichlet(f)) continue;
    for (int v : faces.faces[f].vertices) dofs_.constrained[static_cast<std::size_t>(v)] = 1;
    if (k == 2) dofs_.constrained[static_cast<std::size_t>(nv + f)] = 1;
  }
  finalize(dofs_);
}

Point LagrangeSpace::node(int dof) const {
  const Entity& e = dofs_.entity[static_cast<std::size_t>(dof)];
  if (e.kind == EntityKind::Vertex) return domain_->mesh.vertices[e.index];
  return domain_->faces.faces[e.index].midpoint;
}

RTSpace::RTSpace(std::shared_ptr<const Domain> domain, int l) : domain_(std::move(domain)), l_(l) {
  if (l < 0 || l > 2) throw ConfigError("Raviart-Thomas order must be 0, 1 or 2");
  const Mesh& mesh = domain_->mesh;
  const FaceTable& faces = domain_->faces;
  const int nf = faces.num_faces();
  const int nt = mesh.num_triangles();
  const int per_face = l + 1;
  const int per_cell = l * (l + 1);
  dofs_.kind = SpaceKind::RaviartThomas;
  dofs_.order = l;
  dofs_.size = nf * per_face + nt * per_cell;
  dofs_.local_size = rt_local_size(l);
  dofs_.element_dofs.reserve(static_cast<std::size_t>(nt * dofs_.local_size));
  for (int t = 0; t < nt; ++t) {
    for (int f : faces.element_faces[t]) {
      for (int j = 0; j < per_face; ++j) dofs_.element_dofs.push_back(face_dof(f, j));
    }
    for (int r = 0; r < per_cell; ++r) dofs_.element_dofs.push_back(interior_dof(t, r));
  }
  for (int f = 0; f < nf; ++f) {
    for (int j = 0; j < per_face; ++j) dofs_.entity.push_back({EntityKind::Face, f});
  }
  for (int t = 0; t < nt; ++t) {
    for (int r = 0; r < per_cell; ++r) dofs_.entity.push_back({EntityKind::Cell, t});
  }
  dofs_.constrained.assign(static_cast<std::size_t>(dofs_.size), 0);
  for (int f = 0; f < nf; ++f) {
    if (!domain_->tags.sigma(f)) continue;
    for (int j = 0; j < per_face; ++j) dofs_.constrained[static_cast<std::size_t>(face_dof(f, j))] = 1;
  }
  finalize(dofs_);

  bases_.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) bases_.emplace_back(mesh, faces, t, l);
}

DGSpace::DGSpace(std::shared_ptr<const Domain> domain, int m) : domain_(std::move(domain)), m_(m) {
  if (m < -1 || m > 2) throw ConfigError("discontinuous space order must be in [-1, 2]");
  const Mesh& mesh = domain_->mesh;
  const int nt = mesh.num_triangles();
  dofs_.kind = SpaceKind::Discontinuous;
  dofs_.order = m;
  dofs_.local_size = num_polynomials(m);
  dofs_.size = nt * dofs_.local_size;
  dofs_.element_dofs.resize(static_cast<std::size_t>(dofs_.size));
  for (int i = 0; i < dofs_.size; ++i) {
    dofs_.element_dofs[static_cast<std::size_t>(i)] = i;
    dofs_.entity.push_back({EntityKind::Cell, i / dofs_.local_size});
  }
  dofs_.constrained.assign(static_cast<std::size_t>(dofs_.size), 0);
  finalize(dofs_);
  bases_.reserve(static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) bases_.emplace_back(ElementGeometry::of(mesh, t), m);
}

Discretization::Discretization(std::shared_ptr<const Domain> domain_in, const SpaceConfig& config_in)
    : domain((config_in.validate(), std::move(domain_in))),
      config(config_in),
      V(domain, config.k),
      D(domain, config.l),
      W(domain, config.m) {}

// ---------------------------------------------------------------------------

void check_function(const DofMap& dofs, const FEFunction& fe, const char* what) {
  if (fe.kind != dofs.kind || fe.order != dofs.order || fe.coeffs.size() != dofs.size) {
    throw ConfigError(std::string(what) + ": function does not belong to this space");
  }
}

FEFunction nodal_interpolant(const LagrangeSpace& V, const ScalarField& v) {
  FEFunction u = V.zero();
  for (int i = 0; i < V.dofs().size; ++i) u.coeffs(i) = v(V.node(i));
  return u;
}

FEFunction rt_interpolant(const RTSpace& D, const VectorField& q) {
  const Domain& domain = D.domain();
  const int l = D.order();
  FEFunction out = D.zero();
  const LineRule& line = data_line_rule();
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    const Face& face = domain.faces.faces[f];
    for (int i = 0; i < line.size(); ++i) {
      const double s = line.points[i];
      const double flux = q(face.at(domain.mesh, s)).dot(face.normal) * line.weights[i] * face.length;
      for (int j = 0; j <= l; ++j) out.coeffs(D.face_dof(f, j)) += flux * legendre01(j, s);
    }
  }
  if (l >= 1) {
    const TriangleRule& rule = triangle_rule(2 * l + 8);
    LocalVector phi;
    for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
      const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
      const OrthonormalBasis basis(geo, l - 1);
      const int ni = basis.size();
      for (int i = 0; i < rule.size(); ++i) {
        const Point p = geo.map(rule.points[i]);
        const Eigen::Vector2d value = q(p) * (rule.weights[i] * 2.0 * geo.area);
        basis.eval(geo, p, phi);
        for (int r = 0; r < ni; ++r) {
          out.coeffs(D.interior_dof(t, r)) += value.x() * phi(r);
          out.coeffs(D.interior_dof(t, ni + r)) += value.y() * phi(r);
        }
      }
    }
  }
  return out;
}

double FacePolynomial::operator()(double s) const {
  double v = 0.0;
  for (std::size_t j = 0; j < legendre.size(); ++j) v += legendre[j] * legendre01(static_cast<int>(j), s);
  return v;
}

FacePolynomial project_face(const std::function<double(double)>& phi, int l) {
  if (l < 0) throw ConfigError("face projection order must be non-negative");
  FacePolynomial out;
  out.legendre.assign(static_cast<std::size_t>(l + 1), 0.0);
  const LineRule& line = data_line_rule();
  for (int i = 0; i < line.size(); ++i) {
    const double value = phi(line.points[i]) * line.weights[i];
    for (int j = 0; j <= l; ++j) out.legendre[static_cast<std::size_t>(j)] += (2 * j + 1) * value * legendre01(j, line.points[i]);
  }
  return out;
}

FacePolynomial project_face(const Domain& domain, int f, const ScalarField& phi, int l) {
  const Face& face = domain.faces.faces[f];
  return project_face([&](double s) { return phi(face.at(domain.mesh, s)); }, l);
}

FEFunction project_element(const DGSpace& X, const ScalarField& y) {
  const Domain& domain = X.domain();
  FEFunction out = X.zero();
  if (X.order() < 0) return out;
  const TriangleRule& rule = triangle_rule(2 * X.order() + 8);
  LocalVector phi;
  LocalGradients grad;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    const auto dofs = X.dofs().element(t);
    for (int i = 0; i < rule.size(); ++i) {
      const Point p = geo.map(rule.points[i]);
      X.eval(t, geo, p, phi, grad);
      const double w = y(p) * rule.weights[i] * 2.0 * geo.area;
      for (int r = 0; r < phi.size(); ++r) out.coeffs(dofs[static_cast<std::size_t>(r)]) += w * phi(r);
    }
  }
  return out;
}

std::pair<FEFunction, FEFunction> project_element(const DGSpace& X, const VectorField& y) {
  return {project_element(X, [&](const Point& p) { return y(p).x(); }),
          project_element(X, [&](const Point& p) { return y(p).y(); })};
}

FEFunction gradient_reconstruction(const DGSpace& W, const FEFunction& x, const RTSpace& D) {
  check_function(W.dofs(), x, "gradient_reconstruction");
  if (&W.domain() != &D.domain()) throw ConfigError("gradient_reconstruction: spaces live on different meshes");
  const Domain& domain = D.domain();
  const int l = D.order();
  FEFunction eta = D.zero();
  if (W.order() < 0) return eta;

  const LineRule& line = line_rule(W.order() + l + 1);
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    if (domain.tags.sigma(f)) continue;
    const Face& face = domain.faces.faces[f];
    for (int i = 0; i < line.size(); ++i) {
      const double s = line.points[i];
      const Point p = face.at(domain.mesh, s);
      double jump = evaluate_in_element(W, x, face.left, p);
      if (!face.is_boundary()) jump -= evaluate_in_element(W, x, face.right, p);
      // h_F^{-1} |F| cancels for a straight face: the diameter is the length.
      const double w = jump * line.weights[i];
      for (int j = 0; j <= l; ++j) eta.coeffs(D.face_dof(f, j)) += w * legendre01(j, s);
    }
  }
  if (l >= 1) {
    const TriangleRule& rule = triangle_rule(W.order() + l + 2);
    LocalVector phi;
    for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
      const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
      const OrthonormalBasis basis(geo, l - 1);
      const int ni = basis.size();
      for (int i = 0; i < rule.size(); ++i) {
        const Point p = geo.map(rule.points[i]);
        const Eigen::Vector2d g = gradient_in_element(W, x, t, p) * (rule.weights[i] * 2.0 * geo.area);
        basis.eval(geo, p, phi);
        for (int r = 0; r < ni; ++r) {
          eta.coeffs(D.interior_dof(t, r)) -= g.x() * phi(r);
          eta.coeffs(D.interior_dof(t, ni + r)) -= g.y() * phi(r);
        }
      }
    }
  }
  return eta;
}

FEFunction neumann_corrector(const RTSpace& D, const ScalarField& delta_psi, std::span<const int> faces) {
  const Domain& domain = D.domain();
  std::vector<int> sigma_faces;
  if (faces.empty()) {
    for (int f = 0; f < domain.faces.num_faces(); ++f) {
      if (domain.tags.sigma(f)) sigma_faces.push_back(f);
    }
    faces = sigma_faces;
  }
  FEFunction dp = D.zero();
  const LineRule& line = data_line_rule();
  for (int f : faces) {
    if (f < 0 || f >= domain.faces.num_faces() || !domain.tags.sigma(f)) {
      throw ConfigError("neumann_corrector: face " + std::to_string(f) + " is not on Sigma");
    }
    const Face& face = domain.faces.faces[f];
    for (int i = 0; i < line.size(); ++i) {
      const double s = line.points[i];
      const double w = delta_psi(face.at(domain.mesh, s)) * line.weights[i] * face.length;
      for (int j = 0; j <= D.order(); ++j) dp.coeffs(D.face_dof(f, j)) += w * legendre01(j, s);
    }
  }
  return dp;
}

// ---------------------------------------------------------------------------

std::vector<int> locate_points(const Domain& domain, std::span<const Point> points) {
  const Mesh& mesh = domain.mesh;
  const int nt = mesh.num_triangles();
  BoundingBox box{mesh.vertices.front(), mesh.vertices.front()};
  for (const Point& p : mesh.vertices) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  const int nb = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(nt))));
  const double bw = box.width() / nb, bh = box.height() / nb;
  auto bucket = [&](double v, double lo, double size) {
    return size > 0 ? std::clamp(static_cast<int>((v - lo) / size), 0, nb - 1) : 0;
  };
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(nb * nb));
  for (int t = 0; t < nt; ++t) {
    Point lo = mesh.vertices[mesh.triangles[t][0]], hi = lo;
    for (int v : mesh.triangles[t]) {
      lo = lo.cwiseMin(mesh.vertices[v]);
      hi = hi.cwiseMax(mesh.vertices[v]);
    }
    for (int j = bucket(lo.y(), box.lo.y(), bh); j <= bucket(hi.y(), box.lo.y(), bh); ++j) {
      for (int i = bucket(lo.x(), box.lo.x(), bw); i <= bucket(hi.x(), box.lo.x(), bw); ++i) {
        buckets[static_cast<std::size_t>(j * nb + i)].push_back(t);
      }
    }
  }
  std::vector<int> owner;
  owner.reserve(points.size());
  for (const Point& p : points) {
    const int i = bucket(p.x(), box.lo.x(), bw), j = bucket(p.y(), box.lo.y(), bh);
    int found = -1;
    for (int t : buckets[static_cast<std::size_t>(j * nb + i)]) {
      const Eigen::Vector3d lambda = ElementGeometry::of(mesh, t).barycentric(p);
      if (lambda.minCoeff() >= -1e-12) {
        found = t;
        break;
      }
    }
    if (found < 0) throw ConfigError("point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) + ") is outside the mesh");
    owner.push_back(found);
  }
  return owner;
}

namespace {

template <typename Space>
LocalVector gather(const Space& space, const FEFunction& fe, int t) {
  const auto dofs = space.dofs().element(t);
  LocalVector c(static_cast<int>(dofs.size()));
  for (std::size_t i = 0; i < dofs.size(); ++i) c(static_cast<int>(i)) = fe.coeffs(dofs[i]);
  return c;
}

}  // namespace

double evaluate_in_element(const LagrangeSpace& V, const FEFunction& u, int t, const Point& p) {
  const ElementGeometry geo = ElementGeometry::of(V.domain().mesh, t);
  LocalVector phi;
  LocalGradients grad;
  V.eval(geo, p, phi, grad);
  return phi.dot(gather(V, u, t));
}

Eigen::Vector2d gradient_in_element(const LagrangeSpace& V, const FEFunction& u, int t, const Point& p) {
  const ElementGeometry geo = ElementGeometry::of(V.domain().mesh, t);
  LocalVector phi;
  LocalGradients grad;
  V.eval(geo, p, phi, grad);
  return grad.transpose() * gather(V, u, t);
}

double evaluate_in_element(const DGSpace& W, const FEFunction& x, int t, const Point& p) {
  if (W.order() < 0) return 0.0;
  const ElementGeometry geo = ElementGeometry::of(W.domain().mesh, t);
  LocalVector phi;
  LocalGradients grad;
  W.eval(t, geo, p, phi, grad);
  return phi.dot(gather(W, x, t));
}

Eigen::Vector2d gradient_in_element(const DGSpace& W, const FEFunction& x, int t, const Point& p) {
  if (W.order() < 0) return Eigen::Vector2d::Zero();
  const ElementGeometry geo = ElementGeometry::of(W.domain().mesh, t);
  LocalVector phi;
  LocalGradients grad;
  W.eval(t, geo, p, phi, grad);
  return grad.transpose() * gather(W, x, t);
}

Eigen::Vector2d evaluate_in_element(const RTSpace& D, const FEFunction& q, int t, const Point& p) {
  const ElementGeometry geo = ElementGeometry::of(D.domain().mesh, t);
  LocalGradients values;
  LocalVector div;
  D.eval(t, geo, p, values, div);
  return values.transpose() * gather(D, q, t);
}

double divergence_in_element(const RTSpace& D, const FEFunction& q, int t, const Point& p) {
  const ElementGeometry geo = ElementGeometry::of(D.domain().mesh, t);
  LocalGradients values;
  LocalVector div;
  D.eval(t, geo, p, values, div);
  return div.dot(gather(D, q, t));
}

Eigen::VectorXd evaluate(const LagrangeSpace& V, const FEFunction& u, std::span<const Point> points) {
  check_function(V.dofs(), u, "evaluate");
  const auto owner = locate_points(V.domain(), points);
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate_in_element(V, u, owner[i], points[i]);
  return out;
}

Eigen::VectorXd evaluate(const DGSpace& W, const FEFunction& x, std::span<const Point> points) {
  check_function(W.dofs(), x, "evaluate");
  const auto owner = locate_points(W.domain(), points);
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = evaluate_in_element(W, x, owner[i], points[i]);
  return out;
}

Eigen::MatrixX2d evaluate(const RTSpace& D, const FEFunction& q, std::span<const Point> points) {
  check_function(D.dofs(), q, "evaluate");
  const auto owner = locate_points(D.domain(), points);
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = evaluate_in_element(D, q, owner[i], points[i]).transpose();
  }
  return out;
}

Eigen::MatrixX2d evaluate_gradient(const LagrangeSpace& V, const FEFunction& u, std::span<const Point> points) {
  check_function(V.dofs(), u, "evaluate_gradient");
  const auto owner = locate_points(V.domain(), points);
  Eigen::MatrixX2d out(static_cast<Eigen::Index>(points.size()), 2);
  for (std::size_t i = 0; i < points.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = gradient_in_element(V, u, owner[i], points[i]).transpose();
  }
  return out;
}

Eigen::VectorXd evaluate_divergence(const RTSpace& D, const FEFunction& q, std::span<const Point> points) {
  check_function(D.dofs(), q, "evaluate_divergence");
  const auto owner = locate_points(D.domain(), points);
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = divergence_in_element(D, q, owner[i], points[i]);
  return out;
}

}  // namespace cauchy
