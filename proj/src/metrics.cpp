#include "cauchy/metrics.hpp"

#include <cmath>

#include <Eigen/QR>

#include "cauchy/assembly.hpp"
#include "cauchy/error.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy {

namespace {

// Values of a (v, q) pair at a point of element t.
struct PairSample {
  double v = 0.0;
  Eigen::Vector2d grad_v = Eigen::Vector2d::Zero();
  Eigen::Vector2d q = Eigen::Vector2d::Zero();
  double div_q = 0.0;
};

// s[(v,q),(v,q)] + ||h^zeta (div q + mu v)||^2 for any pair that can be sampled pointwise.
template <class Sampler>
double triple_norm_squared(const Discretization& disc, const ProblemSpec& problem, int zeta, int degree,
                           Sampler&& sample) {
  if (zeta != 0 && zeta != 1) throw ConfigError("zeta must be 0 or 1");
  problem.validate();
  const Domain& domain = *disc.domain;
  const SpaceConfig& cfg = disc.config;
  const double h = domain.h;
  const double mu = problem.mu;
  const bool ls = cfg.variant == Variant::Reduced;
  const double grad_weight = (ls ? 0.5 : 1.0) * cfg.gamma_T * std::pow(h, 2 * cfg.k);
  const double mass_weight = (!ls && mu != 0.0) ? 0.5 * mu * mu * h * h : 0.0;
  const double div_weight = zeta == 1 ? h * h : 1.0;

  const TriangleRule& rule = triangle_rule(degree);
  double total = 0.0;
  LocalVector wv;
  LocalGradients gw;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    double flux_mismatch = 0.0, grad2 = 0.0, div2 = 0.0, mass = 0.0;
    Eigen::VectorXd proj = Eigen::VectorXd::Zero(disc.W.dofs().local_size);
    for (int i = 0; i < rule.size(); ++i) {
      const Point x = geo.map(rule.points[i]);
      const double w = rule.weights[i] * 2.0 * geo.area;
      const PairSample s = sample(t, geo, x);
      flux_mismatch += w * (problem.A * s.grad_v - s.q).squaredNorm();
      grad2 += w * s.grad_v.squaredNorm();
      const double d = s.div_q + mu * s.v;
      div2 += w * d * d;
      if (mass_weight != 0.0) {
        mass += w * s.v * s.v;
        disc.W.eval(t, geo, x, wv, gw);
        for (int r = 0; r < wv.size(); ++r) proj(r) += w * s.v * wv(r);
      }
    }
    total += 0.5 * flux_mismatch + grad_weight * grad2 + div_weight * div2;
    if (mass_weight != 0.0) total += mass_weight * std::max(0.0, mass - proj.squaredNorm());
  }
  return total;
}

int fe_degree(const Discretization& disc) { return 2 * std::max(disc.config.k, disc.config.l + 1) + 2; }

}  // namespace

std::vector<char> local_elements(const Domain& domain, double sigma) {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("sigma must lie in (0, 1]");
  const Mesh& mesh = domain.mesh;
  const double limit = mesh.bbox.lo.y() + sigma * mesh.bbox.height();
  const double tol = 1e-12 * mesh.bbox.diameter();
  std::vector<char> inside(static_cast<std::size_t>(mesh.num_triangles()), 0);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    bool all = true;
    for (int v : mesh.triangles[static_cast<std::size_t>(t)]) all = all && mesh.vertices[static_cast<std::size_t>(v)].y() <= limit + tol;
    inside[static_cast<std::size_t>(t)] = all;
  }
  return inside;
}

ErrorReport error_norms(const LagrangeSpace& V, const FEFunction& u_h, const ExactSolution& exact, double sigma) {
  check_function(V.dofs(), u_h, "error_norms");
  const Domain& domain = V.domain();
  const std::vector<char> local = local_elements(domain, sigma);
  const TriangleRule& rule = triangle_rule(2 * V.order() + 4);
  double e0g = 0, e0l = 0, e1g = 0, e1l = 0, u0g = 0, u0l = 0, u1g = 0, u1l = 0;
  LocalVector phi;
  LocalGradients gphi;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    const auto dofs = V.dofs().element(t);
    double e0 = 0, e1 = 0, u0 = 0, u1 = 0;
    for (int i = 0; i < rule.size(); ++i) {
      const Point x = geo.map(rule.points[i]);
      const double w = rule.weights[i] * 2.0 * geo.area;
      V.eval(geo, x, phi, gphi);
      double uh = 0.0;
      Eigen::Vector2d guh = Eigen::Vector2d::Zero();
      for (int j = 0; j < phi.size(); ++j) {
        const double c = u_h.coeffs(dofs[static_cast<std::size_t>(j)]);
        uh += c * phi(j);
        guh += c * gphi.row(j).transpose();
      }
      const double ue = exact.u(x);
      const Eigen::Vector2d ge = exact.grad_u(x);
      e0 += w * (ue - uh) * (ue - uh);
      e1 += w * (ge - guh).squaredNorm();
      u0 += w * ue * ue;
      u1 += w * ge.squaredNorm();
    }
    e0g += e0, e1g += e1, u0g += u0, u1g += u1;
    if (local[static_cast<std::size_t>(t)]) e0l += e0, e1l += e1, u0l += u0, u1l += u1;
  }
  ErrorReport r;
  r.abs_l2_global = std::sqrt(e0g);
  r.abs_l2_local = std::sqrt(e0l);
  r.abs_h1s_global = std::sqrt(e1g);
  r.abs_h1s_local = std::sqrt(e1l);
  r.zero_exact = u0g == 0.0;
  auto rel = [&](double e, double ref) { return ref > 0.0 ? e / std::sqrt(ref) : e; };
  r.l2_global = r.zero_exact ? r.abs_l2_global : rel(r.abs_l2_global, u0g);
  r.l2_local = r.zero_exact ? r.abs_l2_local : rel(r.abs_l2_local, u0l);
  r.h1s_global = r.zero_exact ? r.abs_h1s_global : rel(r.abs_h1s_global, u1g);
  r.h1s_local = r.zero_exact ? r.abs_h1s_local : rel(r.abs_h1s_local, u1l);
  return r;
}

double triple_norm(const Discretization& disc, const ProblemSpec& problem, const FEFunction& v, const FEFunction& q,
                   int zeta) {
  check_function(disc.V.dofs(), v, "triple_norm");
  check_function(disc.D.dofs(), q, "triple_norm");
  LocalVector phi, div;
  LocalGradients gphi, psi;
  const double sq = triple_norm_squared(disc, problem, zeta, fe_degree(disc), [&](int t, const ElementGeometry& geo,
                                                                                  const Point& x) {
    PairSample s;
    disc.V.eval(geo, x, phi, gphi);
    disc.D.eval(t, geo, x, psi, div);
    const auto vd = disc.V.dofs().element(t);
    const auto dd = disc.D.dofs().element(t);
    for (int j = 0; j < phi.size(); ++j) {
      const double c = v.coeffs(vd[static_cast<std::size_t>(j)]);
      s.v += c * phi(j);
      s.grad_v += c * gphi.row(j).transpose();
    }
    for (int j = 0; j < div.size(); ++j) {
      const double c = q.coeffs(dd[static_cast<std::size_t>(j)]);
      s.q += c * psi.row(j).transpose();
      s.div_q += c * div(j);
    }
    return s;
  });
  return std::sqrt(sq);
}

double triple_norm_error(const Discretization& disc, const ProblemSpec& problem, const ExactSolution& exact,
                         const FEFunction& u_h, const FEFunction& p_h, int zeta) {
  check_function(disc.V.dofs(), u_h, "triple_norm_error");
  check_function(disc.D.dofs(), p_h, "triple_norm_error");
  LocalVector phi, div;
  LocalGradients gphi, psi;
  // The exact flux A grad u satisfies div p + mu u = f, so the divergence error is f - div p_h - mu u_h.
  const double sq = triple_norm_squared(disc, problem, zeta, fe_degree(disc) + 6, [&](int t, const ElementGeometry& geo,
                                                                                       const Point& x) {
    PairSample s;
    disc.V.eval(geo, x, phi, gphi);
    disc.D.eval(t, geo, x, psi, div);
    const auto vd = disc.V.dofs().element(t);
    const auto dd = disc.D.dofs().element(t);
    s.v = exact.u(x);
    s.grad_v = exact.grad_u(x);
    s.q = problem.A * s.grad_v;
    s.div_q = (problem.f ? problem.f(x) : 0.0) - problem.mu * s.v;
    for (int j = 0; j < phi.size(); ++j) {
      const double c = u_h.coeffs(vd[static_cast<std::size_t>(j)]);
      s.v -= c * phi(j);
      s.grad_v -= c * gphi.row(j).transpose();
    }
    for (int j = 0; j < div.size(); ++j) {
      const double c = p_h.coeffs(dd[static_cast<std::size_t>(j)]);
      s.q -= c * psi.row(j).transpose();
      s.div_q -= c * div(j);
    }
    return s;
  });
  return std::sqrt(sq);
}

double norm_1h(const DGSpace& W, const FEFunction& x, int l) {
  check_function(W.dofs(), x, "norm_1h");
  const Domain& domain = W.domain();
  const TriangleRule& rule = triangle_rule(std::max(0, 2 * W.order()));
  double total = 0.0;
  LocalVector wv;
  LocalGradients gw;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    const auto dofs = W.dofs().element(t);
    for (int i = 0; i < rule.size(); ++i) {
      const Point p = geo.map(rule.points[i]);
      W.eval(t, geo, p, wv, gw);
      Eigen::Vector2d g = Eigen::Vector2d::Zero();
      for (int r = 0; r < wv.size(); ++r) g += x.coeffs(dofs[static_cast<std::size_t>(r)]) * gw.row(r).transpose();
      total += rule.weights[i] * 2.0 * geo.area * g.squaredNorm();
    }
  }
  // With h_F = |F|, h_F^{-1} ||pi_l j||_F^2 = sum_j c_j^2 / (2j + 1) for Legendre coefficients c_j.
  const LineRule& line = line_rule(W.order() + l);
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    if (domain.tags.sigma(f)) continue;
    const Face& face = domain.faces.faces[static_cast<std::size_t>(f)];
    for (int j = 0; j <= l; ++j) {
      double c = 0.0;
      for (int i = 0; i < line.size(); ++i) {
        const double s = line.points[i];
        const Point p = face.at(domain.mesh, s);
        double jump = evaluate_in_element(W, x, face.left, p);
        if (!face.is_boundary()) jump -= evaluate_in_element(W, x, face.right, p);
        c += line.weights[i] * jump * legendre01(j, s);
      }
      c *= 2 * j + 1;
      total += c * c / (2 * j + 1);
    }
  }
  return std::sqrt(total);
}

ResidualReport residual_report(const Discretization& disc, const ProblemSpec& problem, const ExactSolution& exact,
                               const DiscreteSolution& sol) {
  ResidualReport r;
  r.zeta = sol.z ? 1 : 0;
  r.triple = triple_norm_error(disc, problem, exact, sol.u, sol.p, r.zeta);
  if (sol.z) r.z_norm_1h = norm_1h(disc.W, *sol.z, disc.config.l);
  r.total = r.triple + r.zeta * r.z_norm_1h;
  r.max_conservation = conservation_residual(disc, sol.u, sol.p, problem).cwiseAbs().maxCoeff();

  const Domain& domain = *disc.domain;
  const TriangleRule& rule = triangle_rule(fe_degree(disc));
  double f2 = 0.0, u2 = 0.0, p2 = 0.0;
  for (int t = 0; t < domain.mesh.num_triangles(); ++t) {
    const ElementGeometry geo = ElementGeometry::of(domain.mesh, t);
    for (int i = 0; i < rule.size(); ++i) {
      const Point x = geo.map(rule.points[i]);
      const double w = rule.weights[i] * 2.0 * geo.area;
      const double f = problem.source(x);
      const double u = evaluate_in_element(disc.V, sol.u, t, x);
      f2 += w * f * f;
      u2 += w * u * u;
      p2 += w * evaluate_in_element(disc.D, sol.p, t, x).squaredNorm();
    }
  }
  r.conservation_scale = std::sqrt(f2) + std::abs(problem.mu) * std::sqrt(u2) + std::sqrt(p2);

  const LineRule& line = gauss_legendre(12);
  double flux = 0.0;
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    if (!domain.tags.sigma(f)) continue;
    const Face& face = domain.faces.faces[static_cast<std::size_t>(f)];
    for (int i = 0; i < line.size(); ++i) {
      const Point p = face.at(domain.mesh, line.points[i]);
      const double psi = problem.psi ? problem.psi(p) : 0.0;
      const double d = psi - evaluate_in_element(disc.D, sol.p, face.left, p).dot(face.normal);
      flux += line.weights[i] * face.length * d * d;
    }
  }
  r.flux_sigma = std::sqrt(flux);
  return r;
}

void RateTable::add_row(double h_row, const std::map<std::string, double>& values) {
  h.push_back(h_row);
  for (const auto& [name, value] : values) columns[name].push_back(value);
  validate();
}

void RateTable::validate() const {
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (!(h[i] < h[i - 1])) throw ConfigError("rate table: h must decrease strictly down the rows");
  }
  for (const auto& [name, values] : columns) {
    if (values.size() != h.size()) throw ConfigError("rate table: column '" + name + "' has the wrong length");
  }
}

double fit_rate(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2) throw ConfigError("fit_rate needs at least two matching points");
  const int n = static_cast<int>(h.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = std::log(h[static_cast<std::size_t>(i)]);
    y(i) = std::log(e[static_cast<std::size_t>(i)]);
  }
  return X.colPivHouseholderQr().solve(y)(1);
}

std::map<std::string, double> fit_rates(const RateTable& table, int window) {
  table.validate();
  if (window < 2) throw ConfigError("rate window must be at least 2");
  if (static_cast<int>(table.h.size()) < window) throw ConfigError("rate table has fewer rows than the window");
  const auto first = table.h.end() - window;
  const std::vector<double> h(first, table.h.end());
  std::map<std::string, double> rates;
  for (const auto& [name, values] : table.columns) {
    rates[name] = fit_rate(h, std::vector<double>(values.end() - window, values.end()));
  }
  return rates;
}

}  // namespace cauchy
