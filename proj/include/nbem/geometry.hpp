#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace nbem {

using Point = Eigen::Vector2d;

/// Raised for malformed geometric or configuration input.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine cannot reach its accuracy contract
/// (quadrature tolerance, singular matrix, broken identity).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Lexicographic order on points (x first, then y).
inline bool lex_less(const Point& a, const Point& b) {
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

double point_segment_distance(const Point& p, const Point& a, const Point& b);
double segment_segment_distance(const Point& a0, const Point& a1, const Point& b0, const Point& b1);

/// A plane triangle given by its three corners (counterclockwise for mesh elements).
struct Triangle {
  std::array<Point, 3> v;

  double signed_area() const { return 0.5 * cross(v[1] - v[0], v[2] - v[0]); }
  double area() const { return std::abs(signed_area()); }
  Point centroid() const { return (v[0] + v[1] + v[2]) / 3.0; }
  /// Longest edge length.
  double diameter() const;
  double min_angle() const;
  /// Maps reference coordinates (xi, eta) of (0,0),(1,0),(0,1) into the triangle.
  Point map(double xi, double eta) const { return v[0] + xi * (v[1] - v[0]) + eta * (v[2] - v[0]); }
  /// Barycentric coordinates of p (may be negative outside).
  std::array<double, 3> barycentric(const Point& p) const;
  bool contains(const Point& p, double tol) const;
};

/// Euclidean distance between two closed triangles; zero when they touch or overlap.
double triangle_distance(const Triangle& a, const Triangle& b);

/// Distance from a closed segment to a closed triangle.
double segment_triangle_distance(const Point& a, const Point& b, const Triangle& t);

}  // namespace nbem
