#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "cauchy/element.hpp"
#include "cauchy/mesh.hpp"

namespace cauchy {

using ScalarField = std::function<double(const Point&)>;
using VectorField = std::function<Eigen::Vector2d(const Point&)>;

/// Choice of (l, m) and stabilizers.
///   InfSup             l = m = k,       s* = 0
///   WellBalanced       l = k-1, m = k,  s* = gamma*/2 ||(1 - pi_{l-1}) grad y||^2
///   WellBalancedNoDual l = m = k-1,     s* = 0
///   Reduced            multiplier eliminated through s* = L2 mass; m is the
///                      smallest order with div D + mu V inside W
enum class Variant { InfSup, WellBalanced, WellBalancedNoDual, Reduced };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

struct SpaceConfig {
  int k = 1;  ///< Lagrange order of the primal variable
  int l = 1;  ///< Raviart-Thomas order of the flux
  int m = 1;  ///< order of the discontinuous multiplier space
  Variant variant = Variant::InfSup;
  double gamma_T = 1e-4;    ///< Tikhonov weight
  double gamma_star = 0.1;  ///< dual stabilizer weight (WellBalanced only)

  /// Derives (l, m) from the variant. For Reduced, `l` may be given
  /// explicitly (k-1 <= l <= k); the default is l = k - 1.
  static SpaceConfig make(Variant variant, int k, double gamma_T = 1e-4, double gamma_star = 0.1,
                          std::optional<int> l = std::nullopt, double mu = 0.0);

  /// Throws ConfigError unless 1 <= k <= 2, k-1 <= l <= k, l <= m <= k and the
  /// orders agree with the variant.
  void validate() const;
};

enum class SpaceKind { Lagrange, RaviartThomas, Discontinuous };

enum class EntityKind { Vertex, Face, Cell };

struct Entity {
  EntityKind kind;
  int index;
};

/// Global numbering of one discrete space, with the Dirichlet (V) or Sigma (D)
/// constrained dofs marked and a compressed numbering of the free ones.
struct DofMap {
  SpaceKind kind = SpaceKind::Lagrange;
  int order = 0;
  int size = 0;
  int local_size = 0;
  std::vector<int> element_dofs;  ///< num_triangles * local_size
  std::vector<Entity> entity;     ///< owning mesh entity of each dof
  std::vector<char> constrained;
  std::vector<int> free_index;    ///< -1 for constrained dofs
  std::vector<int> free_dofs;     ///< free position -> global dof

  int num_free() const { return static_cast<int>(free_dofs.size()); }
  std::span<const int> element(int t) const {
    return {element_dofs.data() + static_cast<std::ptrdiff_t>(t) * local_size, static_cast<std::size_t>(local_size)};
  }
};

/// Coefficient vector of a function in one of the discrete spaces.
struct FEFunction {
  SpaceKind kind = SpaceKind::Lagrange;
  int order = 0;
  Eigen::VectorXd coeffs;
};

/// Continuous P_k Lagrange space (k = 1, 2). Dofs: vertices first, then one
/// midpoint per face for k = 2. Dofs on Dirichlet-tagged faces are constrained.
class LagrangeSpace {
 public:
  LagrangeSpace(std::shared_ptr<const Domain> domain, int k);

  const Domain& domain() const { return *domain_; }
  int order() const { return k_; }
  const DofMap& dofs() const { return dofs_; }
  FEFunction zero() const { return {SpaceKind::Lagrange, k_, Eigen::VectorXd::Zero(dofs_.size)}; }
  /// Nodal point of a dof.
  Point node(int dof) const;
  void eval(const ElementGeometry& geo, const Point& p, LocalVector& values, LocalGradients& grads) const {
    eval_lagrange(k_, geo, p, values, grads);
  }

 private:
  std::shared_ptr<const Domain> domain_;
  int k_;
  DofMap dofs_;
};

/// Raviart-Thomas space RT^l. Dofs: l+1 face moments per face (faces in
/// order), then l(l+1) interior moments per element. Dofs on Sigma faces are
/// constrained.
class RTSpace {
 public:
  RTSpace(std::shared_ptr<const Domain> domain, int l);

  const Domain& domain() const { return *domain_; }
  int order() const { return l_; }
  const DofMap& dofs() const { return dofs_; }
  FEFunction zero() const { return {SpaceKind::RaviartThomas, l_, Eigen::VectorXd::Zero(dofs_.size)}; }
  int face_dof(int f, int j) const { return f * (l_ + 1) + j; }
  int interior_dof(int t, int r) const { return domain_->faces.num_faces() * (l_ + 1) + t * l_ * (l_ + 1) + r; }
  void eval(int t, const ElementGeometry& geo, const Point& p, LocalGradients& values, LocalVector& div) const {
    bases_[static_cast<std::size_t>(t)].eval(geo, p, values, div);
  }

 private:
  std::shared_ptr<const Domain> domain_;
  int l_;
  DofMap dofs_;
  std::vector<RTElementBasis> bases_;
};

/// Discontinuous P_m space with an L2-orthonormal basis on every element.
/// Order -1 is the zero space.
class DGSpace {
 public:
  DGSpace(std::shared_ptr<const Domain> domain, int m);

  const Domain& domain() const { return *domain_; }
  int order() const { return m_; }
  const DofMap& dofs() const { return dofs_; }
  FEFunction zero() const { return {SpaceKind::Discontinuous, m_, Eigen::VectorXd::Zero(dofs_.size)}; }
  const OrthonormalBasis& basis(int t) const { return bases_[static_cast<std::size_t>(t)]; }
  void eval(int t, const ElementGeometry& geo, const Point& p, LocalVector& values, LocalGradients& grads) const {
    bases_[static_cast<std::size_t>(t)].eval(geo, p, values, grads);
  }

 private:
  std::shared_ptr<const Domain> domain_;
  int m_;
  DofMap dofs_;
  std::vector<OrthonormalBasis> bases_;
};

/// The three spaces for one configuration on one mesh.
struct Discretization {
  Discretization(std::shared_ptr<const Domain> domain, const SpaceConfig& config);

  std::shared_ptr<const Domain> domain;
  SpaceConfig config;
  LagrangeSpace V;
  RTSpace D;
  DGSpace W;
};

// ---------------------------------------------------------------------------
// Interpolants and projections

/// Nodal interpolant i_h.
FEFunction nodal_interpolant(const LagrangeSpace& V, const ScalarField& v);

/// Raviart-Thomas interpolant R_h (face and interior moments of q).
FEFunction rt_interpolant(const RTSpace& D, const VectorField& q);

/// L2 projection onto P_l of a face, in the shifted Legendre basis.
struct FacePolynomial {
  std::vector<double> legendre;  ///< coefficients of P_j(2s - 1)
  double operator()(double s) const;
};

/// Projection of phi(s), s in [0, 1], parametrizing a face of the given length.
FacePolynomial project_face(const std::function<double(double)>& phi, int l);

/// Projection onto P_l(F) of a field restricted to face f.
FacePolynomial project_face(const Domain& domain, int f, const ScalarField& phi, int l);

/// Elementwise L2 projection pi_{X,k}; order -1 gives the zero function.
FEFunction project_element(const DGSpace& X, const ScalarField& y);
std::pair<FEFunction, FEFunction> project_element(const DGSpace& X, const VectorField& y);

/// Gradient reconstruction eta_h in D_0: face moments h_F^{-1} [x_h] on all
/// non-Sigma faces (the trace itself on Sigma' faces), interior moments
/// -(grad x_h, q) for l >= 1, zero normal trace on Sigma.
FEFunction gradient_reconstruction(const DGSpace& W, const FEFunction& x, const RTSpace& D);

/// Lifting of a Neumann perturbation: Sigma face moments of delta_psi, all
/// other dofs zero. `faces` defaults to every Sigma face; listing a non-Sigma
/// face is an error.
FEFunction neumann_corrector(const RTSpace& D, const ScalarField& delta_psi, std::span<const int> faces = {});

// ---------------------------------------------------------------------------
// Evaluation

/// Element containing each point (first match for points on shared edges).
/// Throws ConfigError for points outside the mesh.
std::vector<int> locate_points(const Domain& domain, std::span<const Point> points);

/// Value of a P_k / P_m function, or of an RT function, at point p inside element t.
double evaluate_in_element(const LagrangeSpace& V, const FEFunction& u, int t, const Point& p);
double evaluate_in_element(const DGSpace& W, const FEFunction& x, int t, const Point& p);
Eigen::Vector2d evaluate_in_element(const RTSpace& D, const FEFunction& q, int t, const Point& p);
Eigen::Vector2d gradient_in_element(const LagrangeSpace& V, const FEFunction& u, int t, const Point& p);
Eigen::Vector2d gradient_in_element(const DGSpace& W, const FEFunction& x, int t, const Point& p);
double divergence_in_element(const RTSpace& D, const FEFunction& q, int t, const Point& p);

Eigen::VectorXd evaluate(const LagrangeSpace& V, const FEFunction& u, std::span<const Point> points);
Eigen::VectorXd evaluate(const DGSpace& W, const FEFunction& x, std::span<const Point> points);
Eigen::MatrixX2d evaluate(const RTSpace& D, const FEFunction& q, std::span<const Point> points);
Eigen::MatrixX2d evaluate_gradient(const LagrangeSpace& V, const FEFunction& u, std::span<const Point> points);
Eigen::VectorXd evaluate_divergence(const RTSpace& D, const FEFunction& q, std::span<const Point> points);

/// Throws ConfigError unless fe belongs to a space of this kind/order/size.
void check_function(const DofMap& dofs, const FEFunction& fe, const char* what);

}  // namespace cauchy
