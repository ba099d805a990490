#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "nbem/geometry.hpp"

namespace nbem {

using Polygon = std::vector<Point>;

/// A straight interface between sub-domains i < j, oriented from the
/// lexicographically smaller endpoint a to the larger endpoint b.
struct Interface {
  Point a;
  Point b;
  int i = 0;
  int j = 0;

  double length() const { return (b - a).norm(); }
  Point direction() const { return (b - a) / length(); }
};

/// Polygonal sub-domains of a plane screen together with their interfaces.
class Decomposition {
 public:
  /// Validates the polygons and either checks `interfaces` or, when empty,
  /// detects them from shared edges. `domain` (optional, may be empty) is the
  /// outline of the whole screen and enables the gap check.
  static Decomposition build(std::vector<Polygon> subdomains, std::vector<Interface> interfaces = {},
                             Polygon domain = {});

  /// (-1/2,1/2)^2 split into four squares by the coordinate axes (SW, SE, NE, NW).
  static Decomposition four_square();
  /// (-1/2,1/2)^2 as a single sub-domain.
  static Decomposition single_square();
  /// Text format, one item per line ('#' starts a comment):
  ///   domain x0 y0 x1 y1 ...        (optional)
  ///   subdomain x0 y0 x1 y1 ...     (counterclockwise)
  ///   interface ax ay bx by i j     (optional, 0-based i < j)
  static Decomposition parse(std::istream& in);
  static Decomposition from_file(const std::string& path);
  /// "four-square" | "single" | "file=<path>".
  static Decomposition from_description(std::string_view desc);

  int num_subdomains() const { return static_cast<int>(subdomains_.size()); }
  int num_interfaces() const { return static_cast<int>(interfaces_.size()); }
  const Polygon& subdomain(int i) const { return subdomains_[i]; }
  const std::vector<Interface>& interfaces() const { return interfaces_; }
  const Interface& interface(int k) const { return interfaces_[k]; }
  double area() const { return area_; }
  double subdomain_area(int i) const;
  double skeleton_length() const;

  /// Parts of the boundary of sub-domain i not covered by interfaces.
  const std::vector<std::array<Point, 2>>& exterior_pieces(int i) const { return exterior_[i]; }
  /// True if p lies (within tol) on the exterior boundary part of sub-domain i.
  bool on_exterior_boundary(int i, const Point& p, double tol = 1e-10) const;
  /// True if p lies on the boundary of the whole screen.
  bool on_screen_boundary(const Point& p, double tol = 1e-10) const;

  /// Unit tangent used by the coupling term on interface k: sub-domain j lies
  /// to its left, so it is +direction() or -direction().
  Point coupling_tangent(int k) const { return tangent_[k]; }

 private:
  std::vector<Polygon> subdomains_;
  std::vector<Interface> interfaces_;
  std::vector<std::vector<std::array<Point, 2>>> exterior_;
  std::vector<Point> tangent_;
  double area_ = 0.0;
};

double polygon_signed_area(const Polygon& p);

/// Triangle of a sub-domain mesh. v[0]-v[1] is the refinement edge and v[2]
/// the newest vertex; corners are counterclockwise.
struct Element {
  std::array<int, 3> v;
  int subdomain = 0;
};

/// Per-sub-domain triangulations. Vertices are never shared between
/// sub-domains, so interface points appear once per adjacent side.
class Mesh {
 public:
  /// Criss-cross triangulation with n0 x n0 cells per rectangular sub-domain;
  /// each cell is cut along the diagonal pointing toward the sub-domain center.
  static Mesh initial(const Decomposition& d, int n0);
  /// Per-sub-domain densities; unequal values give non-matching interfaces.
  static Mesh initial(const Decomposition& d, const std::vector<int>& n0);

  /// Red refinement. Fine vertices start with copies of the coarse ones (same
  /// index) followed by edge midpoints; children of element e are 4e..4e+3.
  Mesh refine_uniform() const;

  /// Newest-vertex bisection of the marked elements plus conforming closure
  /// inside each sub-domain. An empty set returns a copy and sets *unchanged.
  Mesh refine_adaptive(const std::vector<int>& marked, bool* unchanged = nullptr) const;

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(elements_.size()); }
  int num_subdomains() const { return num_subdomains_; }
  const Point& vertex(int k) const { return vertices_[k]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  int vertex_subdomain(int k) const { return vertex_subdomain_[k]; }
  const Element& element(int e) const { return elements_[e]; }
  const std::vector<Element>& elements() const { return elements_; }
  Triangle triangle(int e) const;

  /// Parent element in the previous mesh (-1 for an initial mesh).
  int parent(int e) const { return parent_[e]; }
  bool has_genealogy() const { return !parent_.empty() && parent_[0] >= 0; }
  /// For each vertex, the two previous-mesh vertices it interpolates
  /// (equal indices for a copied vertex); empty for an initial mesh.
  const std::vector<std::array<int, 2>>& vertex_origin() const { return vertex_origin_; }

  double h(int e) const;
  double h_max() const;
  double h_min() const;
  double h_subdomain(int i) const;
  double min_angle() const;
  double area() const;
  /// Content hash of the mesh, used to tag exported data.
  std::uint64_t id() const;

  /// One line per vertex (id x y), then one line per triangle (id v0 v1 v2 subdomain).
  void write_snapshot(std::ostream& out) const;

  /// Boundary edges of the sub-domain meshes as (element, local edge k),
  /// where edge k joins v[k] and v[(k+1)%3].
  std::vector<std::array<int, 2>> boundary_edges() const;

 private:
  std::vector<Point> vertices_;
  std::vector<int> vertex_subdomain_;
  std::vector<Element> elements_;
  std::vector<int> parent_;
  std::vector<std::array<int, 2>> vertex_origin_;
  int num_subdomains_ = 0;
};

/// Piece of an interface on which both one-sided traces are affine.
struct SkeletonSegment {
  int interface = 0;
  double s0 = 0.0, s1 = 0.0;  // arclength from the interface start point
  Point p0, p1;
  int elem_i = -1, edge_i = -1;
  int elem_j = -1, edge_j = -1;

  double length() const { return s1 - s0; }
};

struct SkeletonPartition {
  std::vector<SkeletonSegment> segments;
  /// Merged breakpoints (arclength) per interface.
  std::vector<std::vector<double>> breakpoints;
  /// Coupling tangent per interface.
  std::vector<Point> tangent;

  double total_length() const;
};

SkeletonPartition build_skeleton_partition(const Mesh& m, const Decomposition& d);

}  // namespace nbem
