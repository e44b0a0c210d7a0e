#include "cauchy/problem.hpp"

#include <Eigen/Eigenvalues>

#include "cauchy/error.hpp"
#include "cauchy/quadrature.hpp"

namespace cauchy {

void ProblemSpec::validate() const {
  if (A(0, 1) != A(1, 0)) throw ConfigError("diffusivity A must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(A);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) throw ConfigError("diffusivity A must be positive definite");
  if (!(perturbation.amplitude >= 0.0)) throw ConfigError("perturbation amplitude must be non-negative");
}

double ProblemSpec::source(const Point& p) const {
  double v = f ? f(p) : 0.0;
  if (perturbation.delta_f) v += perturbation.delta_f(p);
  return v;
}

FEFunction random_field(const LagrangeSpace& V, std::uint64_t seed) {
  UniformStream stream(seed);
  FEFunction u = V.zero();
  for (int i = 0; i < V.dofs().size; ++i) u.coeffs(i) = stream.next();
  return u;
}

FEFunction dirichlet_lifting(const LagrangeSpace& V, const ProblemSpec& problem) {
  FEFunction u = V.zero();
  if (!problem.g) return u;
  for (int i = 0; i < V.dofs().size; ++i) {
    if (V.dofs().constrained[static_cast<std::size_t>(i)]) u.coeffs(i) = problem.g(V.node(i));
  }
  return u;
}

FEFunction neumann_lifting(const RTSpace& D, const LagrangeSpace& V, const ProblemSpec& problem) {
  FEFunction p = D.zero();
  const Perturbation& noise = problem.perturbation;
  if (!problem.psi && !noise.delta_psi) return p;
  const Domain& domain = D.domain();
  FEFunction u_rand;
  if (noise.amplitude > 0.0) u_rand = random_field(V, noise.seed);

  static const LineRule line = gauss_legendre(12);
  for (int f = 0; f < domain.faces.num_faces(); ++f) {
    if (!domain.tags.sigma(f)) continue;
    const Face& face = domain.faces.faces[f];
    for (int i = 0; i < line.size(); ++i) {
      const double s = line.points[i];
      const Point x = face.at(domain.mesh, s);
      double value = 0.0;
      if (problem.psi) {
        double factor = 1.0;
        if (noise.amplitude > 0.0) factor += noise.amplitude * evaluate_in_element(V, u_rand, face.left, x);
        value = factor * problem.psi(x);
      }
      if (noise.delta_psi) value += noise.delta_psi(x);
      const double w = value * line.weights[i] * face.length;
      for (int j = 0; j <= D.order(); ++j) p.coeffs(D.face_dof(f, j)) += w * legendre01(j, s);
    }
  }
  return p;
}

}  // namespace cauchy
