#include "nbem/potential.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nbem/quadrature.hpp"

namespace nbem {

namespace {

constexpr double kInvFourPi = 0.25 / std::numbers::pi;
constexpr int kMaxDisjointDepth = 24;

}  // namespace

NewtonPotential::NewtonPotential(const Triangle& t) : tri_(t) {
  const double diam = t.diameter();
  if (!(t.area() > 1e-14 * diam * diam)) throw InputError("degenerate triangle in Newton potential");
  if (tri_.signed_area() < 0.0) std::swap(tri_.v[1], tri_.v[2]);
  for (int k = 0; k < 3; ++k) {
    const Point a = tri_.v[k];
    const Point b = tri_.v[(k + 1) % 3];
    const double len = (b - a).norm();
    const Point tau = (b - a) / len;
    edges_[k] = Edge{a, tau, Point(tau.y(), -tau.x()), len};
  }
}

double NewtonPotential::operator()(const Point& x) const {
  double sum = 0.0;
  for (const Edge& e : edges_) {
    const Point d = e.a - x;
    const double h = d.dot(e.normal);
    if (std::abs(h) <= 1e-15 * e.length) continue;
    const double sa = d.dot(e.tangent);
    const double sb = sa + e.length;
    const double h2 = h * h;
    const double ra = std::sqrt(sa * sa + h2);
    const double rb = std::sqrt(sb * sb + h2);
    // s + r evaluated without cancellation for s < 0
    const double ga = sa >= 0.0 ? sa + ra : h2 / (ra - sa);
    const double gb = sb >= 0.0 ? sb + rb : h2 / (rb - sb);
    sum += h * std::log(gb / ga);
  }
  return kInvFourPi * sum;
}

double newton_potential_triangle(const Triangle& t, const Point& x) { return NewtonPotential(t)(x); }

std::string_view to_string(PairClass c) {
  switch (c) {
    case PairClass::Identical: return "identical";
    case PairClass::EdgeAdjacent: return "edge-adjacent";
    case PairClass::VertexAdjacent: return "vertex-adjacent";
    case PairClass::IrregularContact: return "irregular-contact";
    case PairClass::DisjointNear: return "disjoint-near";
    case PairClass::DisjointFar: return "disjoint-far";
  }
  return "unknown";
}

PairClassification classify_pair(const Triangle& a, const Triangle& b) {
  constexpr double kFarRatio = 1.0;
  const double hmax = std::max(a.diameter(), b.diameter());
  const double tol = 1e-12 * hmax;
  PairClassification out;
  std::array<bool, 3> a_shared{}, b_shared{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if ((a.v[i] - b.v[j]).norm() <= tol) {
        out.shared.emplace_back(i, j);
        a_shared[i] = b_shared[j] = true;
      }
  auto on_boundary = [tol](const Point& p, const Triangle& t) {
    for (int k = 0; k < 3; ++k)
      if (point_segment_distance(p, t.v[k], t.v[(k + 1) % 3]) <= tol) return true;
    return false;
  };
  bool other_contact = false;
  for (int i = 0; i < 3; ++i) {
    if (!a_shared[i] && on_boundary(a.v[i], b)) other_contact = true;
    if (!b_shared[i] && on_boundary(b.v[i], a)) other_contact = true;
  }
  const std::size_t k = out.shared.size();
  if (k >= 3) {
    out.kind = PairClass::Identical;
  } else if (k == 2) {
    out.kind = PairClass::EdgeAdjacent;
  } else if (k == 1) {
    out.kind = other_contact ? PairClass::IrregularContact : PairClass::VertexAdjacent;
  } else {
    const double d = triangle_distance(a, b);
    out.separation_ratio = d / hmax;
    if (other_contact || d <= tol)
      out.kind = PairClass::IrregularContact;
    else
      out.kind = out.separation_ratio >= kFarRatio ? PairClass::DisjointFar : PairClass::DisjointNear;
  }
  return out;
}

QuadConfig QuadConfig::accurate() {
  QuadConfig c;
  c.near_ratio = 1.0;
  c.far_ratio = 1.0;
  c.triangle_orders = {{24.0, 4}, {12.0, 5}, {4.0, 6}, {1.5, 8}, {0.0, 10}};
  c.segment_points = {{8.0, 4}, {3.0, 5}, {1.5, 7}, {0.0, 8}};
  c.graded_points = 12;
  c.graded_segment_points = 20;
  c.contact_depth = 8;
  c.tolerance = 1e-8;
  c.verify = true;
  return c;
}

QuadConfig QuadConfig::fast() {
  QuadConfig c;
  c.near_ratio = 1.0;
  c.far_ratio = 1.0;
  c.triangle_orders = {{32.0, 2}, {6.0, 4}, {3.0, 5}, {1.5, 6}, {0.0, 8}};
  c.segment_points = {{6.0, 3}, {1.5, 5}, {0.0, 6}};
  c.graded_points = 8;
  c.graded_segment_points = 14;
  c.contact_depth = 6;
  c.tolerance = 1e-6;
  c.verify = false;
  return c;
}

QuadConfig QuadConfig::from_profile(std::string_view name) {
  if (name == "fast") return fast();
  if (name == "accurate") return accurate();
  throw InputError("unknown quadrature profile '" + std::string(name) + "' (expected fast|accurate)");
}

ElementGeometry::ElementGeometry(const Triangle& t)
    : tri(t),
      centroid(t.centroid()),
      radius(std::max({(t.v[0] - centroid).norm(), (t.v[1] - centroid).norm(), (t.v[2] - centroid).norm()})),
      diameter(t.diameter()),
      potential(t) {}

namespace {

int triangle_degree_for(double ratio, const QuadConfig& cfg) {
  for (const auto& [min_ratio, degree] : cfg.triangle_orders)
    if (ratio >= min_ratio) return degree;
  return cfg.triangle_orders.empty() ? kMaxTriangleDegree : cfg.triangle_orders.back().second;
}

int segment_points_for(double ratio, const QuadConfig& cfg) {
  for (const auto& [min_ratio, points] : cfg.segment_points)
    if (ratio >= min_ratio) return points;
  return cfg.segment_points.empty() ? 11 : cfg.segment_points.back().second;
}

double apply_rule(const Triangle& cell, const NewtonPotential& pot, int degree) {
  const QuadratureRule& rule = quadrature_rule(RuleKind::Triangle, degree);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) sum += rule.weights[q] * pot(cell.map(rule.nodes[q].x(), rule.nodes[q].y()));
  return 2.0 * cell.area() * sum;
}

std::array<Triangle, 4> red_children(const Triangle& t) {
  const Point m01 = 0.5 * (t.v[0] + t.v[1]);
  const Point m12 = 0.5 * (t.v[1] + t.v[2]);
  const Point m20 = 0.5 * (t.v[2] + t.v[0]);
  return {Triangle{{t.v[0], m01, m20}}, Triangle{{m01, t.v[1], m12}}, Triangle{{m20, m12, t.v[2]}},
          Triangle{{m12, m20, m01}}};
}

double integrate_disjoint(const Triangle& cell, const ElementGeometry& inner, const QuadConfig& cfg, int depth) {
  const double diam = cell.diameter();
  const double ratio = triangle_distance(cell, inner.tri) / diam;
  if (ratio >= cfg.near_ratio || depth >= kMaxDisjointDepth)
    return apply_rule(cell, inner.potential, triangle_degree_for(ratio, cfg));
  double sum = 0.0;
  for (const Triangle& child : red_children(cell)) sum += integrate_disjoint(child, inner, cfg, depth + 1);
  return sum;
}

double graded_at_zero(double u, double& jac) {
  // t = u^3
  jac = 3.0 * u * u;
  return u * u * u;
}

double graded_both_ends(double v, double& jac) {
  const double a = v * v, b = (1.0 - v) * (1.0 - v);
  const double den = a + b;
  jac = 2.0 * v * (1.0 - v) / (den * den);
  return a / den;
}

/// Integrates over the triangle (v, m, c) in polar coordinates around v, with
/// nodes clustered toward v and toward the side v-m, where the potential has a
/// logarithmic derivative singularity.
double integrate_corner_graded(const Point& v, const Point& m, const Point& c, const NewtonPotential& pot, int n) {
  const QuadratureRule& gl = gauss_legendre(n);
  const double twice_area = std::abs(cross(m - v, c - v));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = gl.nodes[i].x();
    const double r = u * u;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      double js = 0.0;
      const double s = graded_at_zero(gl.nodes[j].x(), js);
      row += gl.weights[j] * js * pot(v + r * ((1.0 - s) * (m - v) + s * (c - v)));
    }
    sum += gl.weights[i] * 2.0 * u * r * row;
  }
  return twice_area * sum;
}

/// Triangle (apex, b0, b1) whose side b0-b1 lies on the boundary of the source
/// triangle: split at the midpoint of that side into two corner-graded pieces.
double integrate_base_graded(const Point& apex, const Point& b0, const Point& b1, const NewtonPotential& pot, int n) {
  const Point m = 0.5 * (b0 + b1);
  return integrate_corner_graded(b0, m, apex, pot, n) + integrate_corner_graded(b1, m, apex, pot, n);
}

/// Integrates over the triangle (apex, b0, b1) with nodes clustered toward the apex.
double integrate_apex_graded(const Point& apex, const Point& b0, const Point& b1, const NewtonPotential& pot, int n) {
  const QuadratureRule& gl = gauss_legendre(n);
  const double twice_area = std::abs(cross(b0 - apex, b1 - apex));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = gl.nodes[i].x();
    const double r = u * u;
    const double jr = 2.0 * u;
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double s = gl.nodes[j].x();
      const Point x = apex + r * ((1.0 - s) * (b0 - apex) + s * (b1 - apex));
      row += gl.weights[j] * pot(x);
    }
    sum += gl.weights[i] * jr * r * row;
  }
  return twice_area * sum;
}

double integrate_identical(const Triangle& t, const NewtonPotential& pot, int n) {
  const Point c = t.centroid();
  double sum = 0.0;
  for (int k = 0; k < 3; ++k) sum += integrate_base_graded(c, t.v[k], t.v[(k + 1) % 3], pot, n);
  return sum;
}

double integrate_touching(const Triangle& cell, const PairClassification& cls, const NewtonPotential& pot, int n) {
  switch (cls.kind) {
    case PairClass::Identical:
      return integrate_identical(cell, pot, n);
    case PairClass::EdgeAdjacent: {
      const int i0 = cls.shared[0].first, i1 = cls.shared[1].first;
      const int apex = 3 - i0 - i1;
      return integrate_base_graded(cell.v[apex], cell.v[i0], cell.v[i1], pot, n);
    }
    case PairClass::VertexAdjacent: {
      const int a = cls.shared[0].first;
      return integrate_apex_graded(cell.v[a], cell.v[(a + 1) % 3], cell.v[(a + 2) % 3], pot, n);
    }
    default:
      throw NumericalError("integrate_touching called for a non-touching pair");
  }
}

double integrate_contact(const Triangle& cell, const ElementGeometry& inner, const QuadConfig& cfg, int depth,
                         int max_depth) {
  const PairClassification cls = classify_pair(cell, inner.tri);
  switch (cls.kind) {
    case PairClass::Identical:
    case PairClass::EdgeAdjacent:
    case PairClass::VertexAdjacent:
      return integrate_touching(cell, cls, inner.potential, cfg.graded_points);
    case PairClass::DisjointNear:
    case PairClass::DisjointFar:
      return integrate_disjoint(cell, inner, cfg, 0);
    case PairClass::IrregularContact:
      break;
  }
  if (depth >= max_depth) return apply_rule(cell, inner.potential, 5);
  double sum = 0.0;
  for (const Triangle& child : red_children(cell)) sum += integrate_contact(child, inner, cfg, depth + 1, max_depth);
  return sum;
}

void check_consistency(double coarse, double fine, double tol, const char* what) {
  if (std::abs(coarse - fine) > tol * std::abs(fine))
    throw NumericalError(std::string(what) + ": refinement tolerance not met (" + std::to_string(coarse) + " vs " +
                         std::to_string(fine) + ")");
}

/// Sorted corners, used as the canonical ordering key of a pair.
std::array<Point, 3> sorted_corners(const Triangle& t) {
  std::array<Point, 3> v = t.v;
  std::sort(v.begin(), v.end(), lex_less);
  return v;
}

bool canonical_less(const Triangle& a, const Triangle& b) {
  const auto ka = sorted_corners(a), kb = sorted_corners(b);
  for (int i = 0; i < 3; ++i) {
    if (lex_less(ka[i], kb[i])) return true;
    if (lex_less(kb[i], ka[i])) return false;
  }
  return false;
}

double pair_ordered(const ElementGeometry& outer, const ElementGeometry& inner, const QuadConfig& cfg) {
  const double lower = (outer.centroid - inner.centroid).norm() - outer.radius - inner.radius;
  if (lower >= cfg.near_ratio * outer.diameter)
    return apply_rule(outer.tri, inner.potential, triangle_degree_for(lower / outer.diameter, cfg));
  const PairClassification cls = classify_pair(outer.tri, inner.tri);
  switch (cls.kind) {
    case PairClass::DisjointNear:
    case PairClass::DisjointFar:
      return integrate_disjoint(outer.tri, inner, cfg, 0);
    case PairClass::Identical:
    case PairClass::EdgeAdjacent:
    case PairClass::VertexAdjacent: {
      const double value = integrate_touching(outer.tri, cls, inner.potential, cfg.graded_points);
      if (!cfg.verify) return value;
      const double richer = integrate_touching(outer.tri, cls, inner.potential, cfg.graded_points + 4);
      check_consistency(value, richer, cfg.tolerance, "pair_potential");
      return richer;
    }
    case PairClass::IrregularContact: {
      const double value = integrate_contact(outer.tri, inner, cfg, 0, cfg.contact_depth);
      if (!cfg.verify) return value;
      const double richer = integrate_contact(outer.tri, inner, cfg, 0, cfg.contact_depth + 1);
      check_consistency(value, richer, std::max(cfg.tolerance, 1e-6), "pair_potential (contact)");
      return richer;
    }
  }
  return 0.0;
}

}  // namespace

double pair_potential(const ElementGeometry& a, const ElementGeometry& b, const QuadConfig& cfg) {
  if (canonical_less(b.tri, a.tri)) return pair_ordered(b, a, cfg);
  return pair_ordered(a, b, cfg);
}

double pair_potential(const Triangle& a, const Triangle& b, const QuadConfig& cfg) {
  return pair_potential(ElementGeometry(a), ElementGeometry(b), cfg);
}

namespace {

/// Parameters in [0,1] along p0->p1 where the segment meets the triangle boundary.
std::vector<double> contact_parameters(const Point& p0, const Point& p1, const Triangle& t) {
  const Point d = p1 - p0;
  const double len = d.norm();
  const double tol = 1e-12 * std::max(len, t.diameter());
  std::vector<double> out;
  auto push_if_on = [&](const Point& q) {
    if (point_segment_distance(q, p0, p1) <= tol) out.push_back(std::clamp((q - p0).dot(d) / (len * len), 0.0, 1.0));
  };
  for (int k = 0; k < 3; ++k) push_if_on(t.v[k]);
  for (int k = 0; k < 3; ++k) {
    const Point q0 = t.v[k], q1 = t.v[(k + 1) % 3];
    const Point e = q1 - q0;
    const double den = cross(d, e);
    if (std::abs(den) <= 1e-14 * len * e.norm()) continue;  // parallel: vertices already handled
    const double alpha = cross(q0 - p0, e) / den;
    const double beta = cross(q0 - p0, d) / den;
    if (alpha >= -1e-12 && alpha <= 1 + 1e-12 && beta >= -1e-12 && beta <= 1 + 1e-12)
      out.push_back(std::clamp(alpha, 0.0, 1.0));
  }
  // segment endpoints lying on the triangle boundary
  for (const Point& p : {p0, p1})
    for (int k = 0; k < 3; ++k)
      if (point_segment_distance(p, t.v[k], t.v[(k + 1) % 3]) <= tol) out.push_back(p == p0 ? 0.0 : 1.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
            out.end());
  return out;
}

struct SegmentPiece {
  double a, b;
  bool singular_a, singular_b;
};

std::array<double, 2> integrate_piece_graded(const Point& p0, const Point& p1, const SegmentPiece& piece,
                                             const NewtonPotential& pot, int n) {
  const QuadratureRule& gl = gauss_legendre(n);
  const double len = (p1 - p0).norm();
  std::array<double, 2> m{0.0, 0.0};
  for (int q = 0; q < n; ++q) {
    const double u = gl.nodes[q].x();
    double s = 0.0, js = 0.0;
    if (piece.singular_a && piece.singular_b) {
      s = graded_both_ends(u, js);
    } else if (piece.singular_a) {
      s = graded_at_zero(u, js);
    } else {
      s = 1.0 - graded_at_zero(1.0 - u, js);
    }
    const double alpha = piece.a + (piece.b - piece.a) * s;
    const double w = gl.weights[q] * js * (piece.b - piece.a) * len * pot(p0 + alpha * (p1 - p0));
    m[0] += w * (1.0 - alpha);
    m[1] += w * alpha;
  }
  return m;
}

void integrate_piece_regular(const Point& p0, const Point& p1, double a, double b, const ElementGeometry& t,
                             const QuadConfig& cfg, int depth, std::array<double, 2>& m) {
  const Point d = p1 - p0;
  const Point qa = p0 + a * d, qb = p0 + b * d;
  const double plen = (b - a) * d.norm();
  const double ratio = segment_triangle_distance(qa, qb, t.tri) / plen;
  if (ratio < cfg.near_ratio && depth < kMaxDisjointDepth) {
    const double mid = 0.5 * (a + b);
    integrate_piece_regular(p0, p1, a, mid, t, cfg, depth + 1, m);
    integrate_piece_regular(p0, p1, mid, b, t, cfg, depth + 1, m);
    return;
  }
  const QuadratureRule& gl = gauss_legendre(segment_points_for(ratio, cfg));
  for (std::size_t q = 0; q < gl.size(); ++q) {
    const double alpha = a + (b - a) * gl.nodes[q].x();
    const double w = gl.weights[q] * plen * t.potential(p0 + alpha * d);
    m[0] += w * (1.0 - alpha);
    m[1] += w * alpha;
  }
}

}  // namespace

std::array<double, 2> edge_potential_moments(const Point& p0, const Point& p1, const ElementGeometry& t,
                                             const QuadConfig& cfg) {
  const std::vector<double> contacts = contact_parameters(p0, p1, t.tri);
  std::vector<double> cuts = contacts;
  cuts.push_back(0.0);
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
             cuts.end());
  auto is_contact = [&](double s) {
    return std::any_of(contacts.begin(), contacts.end(), [s](double c) { return std::abs(c - s) <= 1e-12; });
  };
  std::array<double, 2> m{0.0, 0.0};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const SegmentPiece piece{cuts[k], cuts[k + 1], is_contact(cuts[k]), is_contact(cuts[k + 1])};
    if (piece.singular_a || piece.singular_b) {
      auto value = integrate_piece_graded(p0, p1, piece, t.potential, cfg.graded_segment_points);
      auto richer = integrate_piece_graded(p0, p1, piece, t.potential, cfg.graded_segment_points + 8);
      const double scale = std::abs(richer[0]) + std::abs(richer[1]);
      if (std::abs(value[0] - richer[0]) + std::abs(value[1] - richer[1]) > cfg.tolerance * scale)
        throw NumericalError("edge_potential_integral: refinement tolerance not met");
      m[0] += richer[0];
      m[1] += richer[1];
    } else {
      integrate_piece_regular(p0, p1, piece.a, piece.b, t, cfg, 0, m);
    }
  }
  return m;
}

double edge_potential_integral(const Point& p0, const Point& p1, const Triangle& t, double w0, double w1,
                               const QuadConfig& cfg) {
  const auto m = edge_potential_moments(p0, p1, ElementGeometry(t), cfg);
  return w0 * m[0] + w1 * m[1];
}

}  // namespace nbem
