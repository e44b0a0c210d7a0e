#pragma once

#include <array>

#include <Eigen/Core>

#include "cauchy/mesh.hpp"

namespace cauchy {

/// Fixed-capacity local vectors; the largest local space (RT with l = 2) has 15 functions.
constexpr int kMaxLocal = 16;
using LocalVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxLocal, 1>;
using LocalGradients = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, kMaxLocal, 2>;
using LocalMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxLocal, kMaxLocal>;

inline int num_polynomials(int degree) { return degree < 0 ? 0 : (degree + 1) * (degree + 2) / 2; }

/// Affine triangle: x = x0 + J xhat on the reference triangle.
struct ElementGeometry {
  std::array<Point, 3> x;
  Eigen::Matrix2d jacobian;
  double area = 0.0;
  Point centroid;
  double h = 0.0;                          ///< element diameter
  Eigen::Matrix<double, 3, 2> grad_lambda;  ///< row i is the gradient of barycentric coordinate i

  static ElementGeometry of(const Mesh& mesh, int t);

  Point map(const Eigen::Vector2d& ref) const { return x[0] + jacobian * ref; }
  Eigen::Vector3d barycentric(const Point& p) const;
  /// Centred and scaled coordinates used by all polynomial bases on this element.
  Eigen::Vector2d scaled(const Point& p) const { return (p - centroid) / h; }
};

/// Monomials xi1^a xi2^b, a + b <= degree, in the element's scaled coordinates,
/// with gradients taken with respect to physical coordinates.
void eval_monomials(int degree, const ElementGeometry& geo, const Point& p, LocalVector& values,
                    LocalGradients& grads);

/// Shifted Legendre polynomial P_j(2s - 1) on [0, 1]; P_0 = 1, <P_i, P_j> = delta_ij / (2j + 1).
double legendre01(int j, double s);

/// L2-orthonormal basis of P_degree(K); degree -1 gives the empty basis.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;
  OrthonormalBasis(const ElementGeometry& geo, int degree);

  int size() const { return static_cast<int>(coeffs_.rows()); }
  int degree() const { return degree_; }
  void eval(const ElementGeometry& geo, const Point& p, LocalVector& values) const;
  void eval(const ElementGeometry& geo, const Point& p, LocalVector& values, LocalGradients& grads) const;

 private:
  int degree_ = -1;
  LocalMatrix coeffs_;  ///< row i: monomial coefficients of basis function i
};

/// Nodal P1/P2 Lagrange basis. Local order: vertices 0..2, then (k = 2) the
/// midpoint of the edge opposite vertex 0, 1, 2.
void eval_lagrange(int k, const ElementGeometry& geo, const Point& p, LocalVector& values, LocalGradients& grads);
inline int lagrange_local_size(int k) { return num_polynomials(k); }

inline int rt_local_size(int l) { return (l + 1) * (l + 3); }

/// Local Raviart-Thomas basis dual to the degrees of freedom
///   face i, j = 0..l : <q . n_F, P_j(s)>_F  (n_F and s follow the global face orientation)
///   interior (l >= 1): (q, e_c phi_r)_K, c = 0, 1, phi_r orthonormal in P_{l-1}(K).
class RTElementBasis {
 public:
  RTElementBasis() = default;
  RTElementBasis(const Mesh& mesh, const FaceTable& faces, int t, int l);

  int size() const { return rt_local_size(l_); }
  void eval(const ElementGeometry& geo, const Point& p, LocalGradients& values, LocalVector& divergence) const;

 private:
  int l_ = 0;
  LocalMatrix coeffs_x_;  ///< monomial (degree l+1) coefficients of the x-components, one column per basis function
  LocalMatrix coeffs_y_;
};

}  // namespace cauchy
