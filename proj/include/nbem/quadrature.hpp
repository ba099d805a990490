#pragma once

#include <vector>

#include "nbem/geometry.hpp"

namespace nbem {

enum class RuleKind { Segment, Triangle };

/// Quadrature rule on a reference element.
///
/// Segment rules live on [0,1] (only nodes[k].x() is used) with weights summing
/// to 1. Triangle rules live on the reference triangle (0,0),(1,0),(0,1) with
/// weights summing to 1/2. `degree` is the polynomial exactness degree.
struct QuadratureRule {
  RuleKind kind = RuleKind::Segment;
  int degree = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
};

inline constexpr int kMaxSegmentDegree = 21;
inline constexpr int kMaxTriangleDegree = 10;

/// Returns a rule that integrates polynomials up to `order` exactly.
/// Segments: Gauss-Legendre (degree <= 21). Triangles: symmetric rules for
/// degree <= 5, collapsed Gauss-Jacobi x Gauss-Legendre products above (<= 10).
/// Rules are built once and cached; the returned reference stays valid.
const QuadratureRule& quadrature_rule(RuleKind kind, int order);

/// n-point Gauss-Legendre rule on [0,1] (any n in [1, 64]); cached.
const QuadratureRule& gauss_legendre(int n);

/// n-point Gauss-Jacobi rule on [0,1] for weight (1-x)^alpha, alpha in {0,1}.
QuadratureRule gauss_jacobi(int n, int alpha);

}  // namespace nbem
