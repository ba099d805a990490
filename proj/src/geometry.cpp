#include "nbem/geometry.hpp"

#include <algorithm>
#include <limits>

namespace nbem {

double point_segment_distance(const Point& p, const Point& a, const Point& b) {
  const Point d = b - a;
  const double len2 = d.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(d) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * d)).norm();
}

namespace {

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
         std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
}

bool segments_intersect(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
  const int o1 = orientation(a0, a1, b0);
  const int o2 = orientation(a0, a1, b1);
  const int o3 = orientation(b0, b1, a0);
  const int o4 = orientation(b0, b1, a1);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a0, a1, b0)) return true;
  if (o2 == 0 && on_segment(a0, a1, b1)) return true;
  if (o3 == 0 && on_segment(b0, b1, a0)) return true;
  if (o4 == 0 && on_segment(b0, b1, a1)) return true;
  return false;
}

}  // namespace

double segment_segment_distance(const Point& a0, const Point& a1, const Point& b0, const Point& b1) {
  if (segments_intersect(a0, a1, b0, b1)) return 0.0;
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

double Triangle::diameter() const {
  return std::max({(v[1] - v[0]).norm(), (v[2] - v[1]).norm(), (v[0] - v[2]).norm()});
}

double Triangle::min_angle() const {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const Point e1 = v[(k + 1) % 3] - v[k];
    const Point e2 = v[(k + 2) % 3] - v[k];
    best = std::min(best, std::atan2(std::abs(cross(e1, e2)), e1.dot(e2)));
  }
  return best;
}

std::array<double, 3> Triangle::barycentric(const Point& p) const {
  const double twice = cross(v[1] - v[0], v[2] - v[0]);
  const double l1 = cross(p - v[0], v[2] - v[0]) / twice;
  const double l2 = cross(v[1] - v[0], p - v[0]) / twice;
  return {1.0 - l1 - l2, l1, l2};
}

bool Triangle::contains(const Point& p, double tol) const {
  const auto l = barycentric(p);
  return l[0] >= -tol && l[1] >= -tol && l[2] >= -tol;
}

double triangle_distance(const Triangle& a, const Triangle& b) {
  for (const auto& p : a.v)
    if (b.contains(p, 0.0)) return 0.0;
  for (const auto& p : b.v)
    if (a.contains(p, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      best = std::min(best, segment_segment_distance(a.v[i], a.v[(i + 1) % 3], b.v[j], b.v[(j + 1) % 3]));
  return best;
}

double segment_triangle_distance(const Point& a, const Point& b, const Triangle& t) {
  if (t.contains(a, 0.0) || t.contains(b, 0.0)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 3; ++j) best = std::min(best, segment_segment_distance(a, b, t.v[j], t.v[(j + 1) % 3]));
  return best;
}

}  // namespace nbem
