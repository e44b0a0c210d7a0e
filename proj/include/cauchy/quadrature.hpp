#pragma once

#include <vector>

#include <Eigen/Core>

namespace cauchy {

/// Gauss-Legendre rule on [0, 1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
  int size() const { return static_cast<int>(points.size()); }
};

/// Rule on the reference triangle {(0,0), (1,0), (0,1)}; weights sum to 1/2.
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
  int degree = 0;
  int size() const { return static_cast<int>(points.size()); }
};

LineRule gauss_legendre(int n);

/// Gauss-Legendre rule exact for polynomials of the given degree.
const LineRule& line_rule(int degree);

/// Collapsed (Duffy) tensor Gauss rule exact for polynomials of the given degree.
const TriangleRule& triangle_rule(int degree);

}  // namespace cauchy
