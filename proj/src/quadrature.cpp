#include "cauchy/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "cauchy/error.hpp"

namespace cauchy {

namespace {

constexpr int kMaxDegree = 30;

}  // namespace

LineRule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("Gauss-Legendre rule needs at least one point");
  // P_n(x) and P_n'(x) on [-1, 1] by the three-term recurrence.
  auto legendre = [n](double x) {
    double p0 = 1.0, p1 = x;
    for (int j = 2; j <= n; ++j) {
      const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, n * (x * p1 - p0) / (x * x - 1.0)};
  };

  LineRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.points[lo] = 0.5 * (1.0 - x);
    rule.points[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = rule.weights[hi] = w;
  }
  return rule;
}

const LineRule& line_rule(int degree) {
  static const std::vector<LineRule> rules = [] {
    std::vector<LineRule> r;
    for (int d = 0; d <= kMaxDegree; ++d) r.push_back(gauss_legendre(d / 2 + 1));
    return r;
  }();
  if (degree < 0 || degree > kMaxDegree) throw ConfigError("line rule degree out of range");
  return rules[static_cast<std::size_t>(degree)];
}

const TriangleRule& triangle_rule(int degree) {
  static const std::vector<TriangleRule> rules = [] {
    std::vector<TriangleRule> r;
    for (int d = 0; d <= kMaxDegree; ++d) {
      // x = u, y = v (1 - u): the Jacobian (1 - u) raises the degree in u by one.
      const LineRule gu = gauss_legendre((d + 1) / 2 + 1);
      const LineRule gv = gauss_legendre(d / 2 + 1);
      TriangleRule rule;
      rule.degree = d;
      for (int i = 0; i < gu.size(); ++i) {
        for (int j = 0; j < gv.size(); ++j) {
          const double u = gu.points[static_cast<std::size_t>(i)];
          const double v = gv.points[static_cast<std::size_t>(j)];
          rule.points.emplace_back(u, v * (1.0 - u));
          rule.weights.push_back(gu.weights[static_cast<std::size_t>(i)] * gv.weights[static_cast<std::size_t>(j)] * (1.0 - u));
        }
      }
      r.push_back(std::move(rule));
    }
    return r;
  }();
  if (degree < 0 || degree > kMaxDegree) throw ConfigError("triangle rule degree out of range");
  return rules[static_cast<std::size_t>(degree)];
}

}  // namespace cauchy
