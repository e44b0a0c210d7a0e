#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "cauchy/spaces.hpp"

namespace cauchy {

/// Data perturbations. The Neumann datum on Sigma becomes
///   psi~ = (1 + amplitude * u_rand) psi + delta_psi,
/// with u_rand a P_k Lagrange function whose coefficients are independent
/// uniform draws in [0, 1); the source becomes f~ = f + delta_f.
struct Perturbation {
  double amplitude = 0.0;
  std::uint64_t seed = 42;
  ScalarField delta_psi;  ///< optional additive Neumann noise
  ScalarField delta_f;    ///< optional additive volume noise
};

/// Continuous Cauchy problem  div(A grad u) + mu u = f,  u = g and (A grad u).nu = psi on Sigma.
/// Unset fields are zero.
struct ProblemSpec {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  double mu = 0.0;
  ScalarField f;
  ScalarField g;
  ScalarField psi;
  Perturbation perturbation;

  /// Throws ConfigError unless A is symmetric positive definite.
  void validate() const;
  double source(const Point& p) const;  ///< f~ at p
};

/// Uniform draws in [0, 1) built from the raw mt19937_64 stream (whose output
/// is fixed by the standard) so results do not depend on the library's distributions.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// u_rand: V-space function with independent uniform [0, 1) coefficients.
FEFunction random_field(const LagrangeSpace& V, std::uint64_t seed);

/// Constrained values of the primal variable: nodal interpolant g_h at Dirichlet dofs, zero elsewhere.
FEFunction dirichlet_lifting(const LagrangeSpace& V, const ProblemSpec& problem);

/// Constrained values of the flux: moments of psi~ against P_l(F) on Sigma faces, zero elsewhere.
FEFunction neumann_lifting(const RTSpace& D, const LagrangeSpace& V, const ProblemSpec& problem);

}  // namespace cauchy
