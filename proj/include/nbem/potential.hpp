#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

#include "nbem/geometry.hpp"

namespace nbem {

/// Single layer potential of a unit density on a plane triangle, evaluated at
/// points of the same plane:
///
///   N_T(x) = 1/(4 pi) * int_T |x - y|^{-1} dS_y.
///
/// Each edge contributes h * [asinh(s_b/|h|) - asinh(s_a/|h|)], where h is the
/// signed distance from x to the edge line (positive on the inner side) and
/// s_a, s_b are the edge endpoints measured from the foot of x.
class NewtonPotential {
 public:
  explicit NewtonPotential(const Triangle& t);
  double operator()(const Point& x) const;
  const Triangle& triangle() const { return tri_; }

 private:
  struct Edge {
    Point a;
    Point tangent;
    Point normal;  // outward
    double length;
  };
  Triangle tri_;
  std::array<Edge, 3> edges_;
};

/// Convenience wrapper around NewtonPotential.
double newton_potential_triangle(const Triangle& t, const Point& x);

enum class PairClass { Identical, EdgeAdjacent, VertexAdjacent, IrregularContact, DisjointNear, DisjointFar };

std::string_view to_string(PairClass c);

struct PairClassification {
  PairClass kind = PairClass::DisjointFar;
  /// dist(T, T') / max(h_T, h_T').
  double separation_ratio = 0.0;
  /// Shared corners as (index in first, index in second).
  std::vector<std::pair<int, int>> shared;
};

/// Geometric classification; symmetric in its arguments apart from the order
/// of the indices in `shared`.
PairClassification classify_pair(const Triangle& a, const Triangle& b);

/// Outer-rule selection for pair and edge integrals.
struct QuadConfig {
  /// Disjoint cells with dist/diam below this are subdivided.
  double near_ratio = 1.0;
  /// Separation ratio above which a pair counts as far.
  double far_ratio = 1.0;
  /// (minimum dist/diam ratio, triangle rule degree), sorted by decreasing ratio.
  std::vector<std::pair<double, int>> triangle_orders;
  /// (minimum dist/length ratio, Gauss-Legendre points) for segment pieces.
  std::vector<std::pair<double, int>> segment_points;
  /// Points per direction of the graded rules used for touching pairs.
  int graded_points = 12;
  /// Points of the graded 1D rule toward singular segment endpoints.
  int graded_segment_points = 16;
  /// Subdivision depth for irregular (non-matching) contact.
  int contact_depth = 7;
  /// Relative self-consistency required of singular integrals.
  double tolerance = 1e-6;
  /// Recompute singular pair integrals with a richer rule and compare.
  bool verify = false;

  static QuadConfig fast();
  static QuadConfig accurate();
  static QuadConfig from_profile(std::string_view name);
};

/// Precomputed data for repeated pair evaluations.
struct ElementGeometry {
  explicit ElementGeometry(const Triangle& t);
  Triangle tri;
  Point centroid;
  double radius;    // max distance from centroid to a corner
  double diameter;  // longest edge
  NewtonPotential potential;
};

/// G(T,T') = 1/(4 pi) int_T int_T' |x-y|^{-1}. The pair is put in a canonical
/// order first so that G(T,T') == G(T',T) bit for bit.
double pair_potential(const Triangle& a, const Triangle& b, const QuadConfig& cfg);
double pair_potential(const ElementGeometry& a, const ElementGeometry& b, const QuadConfig& cfg);

/// int_e N_T(x) lambda_k(x) ds for the two affine hat functions of the segment
/// e = [p0, p1] (lambda_0(p0) = 1, lambda_1(p1) = 1).
std::array<double, 2> edge_potential_moments(const Point& p0, const Point& p1, const ElementGeometry& t,
                                             const QuadConfig& cfg);

/// int_e N_T(x) p(x) ds for the affine weight with p(p0) = w0, p(p1) = w1.
double edge_potential_integral(const Point& p0, const Point& p1, const Triangle& t, double w0, double w1,
                               const QuadConfig& cfg);

}  // namespace nbem
