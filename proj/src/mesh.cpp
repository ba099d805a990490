#include "nbem/mesh.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace nbem {

double polygon_signed_area(const Polygon& p) {
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += cross(p[k], p[(k + 1) % p.size()]);
  return 0.5 * s;
}

namespace {

double polygon_extent(const Polygon& p) {
  double e = 0.0;
  for (const Point& a : p)
    for (const Point& b : p) e = std::max(e, (a - b).norm());
  return e;
}

bool on_polygon_boundary(const Polygon& poly, const Point& x, double tol) {
  for (std::size_t k = 0; k < poly.size(); ++k)
    if (point_segment_distance(x, poly[k], poly[(k + 1) % poly.size()]) <= tol) return true;
  return false;
}

/// Even-odd ray casting; callers exclude boundary points first.
bool inside_polygon(const Polygon& poly, const Point& x) {
  bool in = false;
  for (std::size_t k = 0, l = poly.size() - 1; k < poly.size(); l = k++) {
    const Point& a = poly[k];
    const Point& b = poly[l];
    if ((a.y() > x.y()) != (b.y() > x.y())) {
      const double xc = a.x() + (x.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (x.x() < xc) in = !in;
    }
  }
  return in;
}

bool strictly_inside(const Polygon& poly, const Point& x, double tol) {
  return !on_polygon_boundary(poly, x, tol) && inside_polygon(poly, x);
}

/// A point strictly inside a simple ccw polygon (centroid of an ear).
Point interior_sample(const Polygon& p) {
  const std::size_t n = p.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = p[(k + n - 1) % n];
    const Point& b = p[k];
    const Point& c = p[(k + 1) % n];
    if (cross(b - a, c - b) <= 0.0) continue;
    const Triangle t{{a, b, c}};
    bool ear = true;
    for (std::size_t l = 0; l < n && ear; ++l) {
      if (l == k || l == (k + 1) % n || l == (k + n - 1) % n) continue;
      if (t.contains(p[l], 1e-14)) ear = false;
    }
    if (ear) return t.centroid();
  }
  return p[0];
}

bool proper_crossing(const Point& a0, const Point& a1, const Point& b0, const Point& b1, double tol) {
  auto side = [tol](const Point& p, const Point& q, const Point& r) {
    const double len = (q - p).norm();
    const double v = cross(q - p, r - p) / len;
    return v > tol ? 1 : (v < -tol ? -1 : 0);
  };
  return side(a0, a1, b0) * side(a0, a1, b1) < 0 && side(b0, b1, a0) * side(b0, b1, a1) < 0;
}

void validate_polygon(const Polygon& p, const std::string& what) {
  if (p.size() < 3) throw InputError(what + " needs at least 3 vertices");
  const double ext = polygon_extent(p);
  const double area = polygon_signed_area(p);
  if (std::abs(area) <= 1e-14 * ext * ext) throw InputError(what + " is degenerate");
  if (area < 0.0) throw InputError(what + " is not counterclockwise");
  const std::size_t n = p.size();
  const double tol = 1e-12 * ext;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      const bool adjacent = l == k + 1 || (k == 0 && l == n - 1);
      if (adjacent) continue;
      if (segment_segment_distance(p[k], p[(k + 1) % n], p[l], p[(l + 1) % n]) <= tol)
        throw InputError(what + " is not simple");
    }
}

struct Overlap {
  double t0, t1;  // parameters on the first edge
};

/// Collinear overlap of edge (p,q) with edge (r,s); empty if shorter than tol.
bool collinear_overlap(const Point& p, const Point& q, const Point& r, const Point& s, double tol, Overlap& out,
                       bool& same_direction) {
  const Point d = q - p;
  const double len = d.norm();
  const Point u = d / len;
  const Point nrm(-u.y(), u.x());
  if (std::abs((r - p).dot(nrm)) > tol || std::abs((s - p).dot(nrm)) > tol) return false;
  const double tr = (r - p).dot(u), ts = (s - p).dot(u);
  const double lo = std::max(0.0, std::min(tr, ts));
  const double hi = std::min(len, std::max(tr, ts));
  if (hi - lo <= tol) return false;
  out = {lo, hi};
  same_direction = (s - r).dot(d) > 0.0;
  return true;
}

std::vector<std::array<Point, 2>> subtract_intervals(const Point& p, const Point& q,
                                                     std::vector<std::pair<double, double>> covered, double tol) {
  const double len = (q - p).norm();
  const Point u = (q - p) / len;
  std::sort(covered.begin(), covered.end());
  std::vector<std::array<Point, 2>> out;
  double cur = 0.0;
  for (const auto& [lo, hi] : covered) {
    if (lo - cur > tol) out.push_back({p + cur * u, p + lo * u});
    cur = std::max(cur, hi);
  }
  if (len - cur > tol) out.push_back({p + cur * u, q});
  return out;
}

}  // namespace

Decomposition Decomposition::build(std::vector<Polygon> subdomains, std::vector<Interface> interfaces,
                                   Polygon domain) {
  if (subdomains.empty()) throw InputError("decomposition has no sub-domains");
  for (std::size_t i = 0; i < subdomains.size(); ++i) validate_polygon(subdomains[i], "sub-domain " + std::to_string(i));
  for (const Interface& f : interfaces)
    if (f.i >= f.j) throw InputError("interface ordering violation: expected i < j, got " + std::to_string(f.i) + " >= " + std::to_string(f.j));

  double ext = 0.0;
  for (const Polygon& p : subdomains)
    for (const Point& a : p)
      for (const Point& b : subdomains[0]) ext = std::max(ext, (a - b).norm());
  const double tol = 1e-10 * ext;
  const int K = static_cast<int>(subdomains.size());

  // Pairwise interior-disjointness.
  for (int i = 0; i < K; ++i)
    for (int k = i + 1; k < K; ++k) {
      const Polygon& P = subdomains[i];
      const Polygon& Q = subdomains[k];
      bool overlap = false;
      for (std::size_t a = 0; a < P.size() && !overlap; ++a)
        for (std::size_t b = 0; b < Q.size() && !overlap; ++b)
          overlap = proper_crossing(P[a], P[(a + 1) % P.size()], Q[b], Q[(b + 1) % Q.size()], tol);
      for (const Point& x : P) overlap = overlap || strictly_inside(Q, x, tol);
      for (const Point& x : Q) overlap = overlap || strictly_inside(P, x, tol);
      overlap = overlap || strictly_inside(Q, interior_sample(P), tol) || strictly_inside(P, interior_sample(Q), tol);
      if (overlap) throw InputError("sub-domains " + std::to_string(i) + " and " + std::to_string(k) + " overlap");
    }

  // Shared edges.
  std::vector<Interface> detected;
  std::vector<Point> tangents;
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j) {
      const Polygon& P = subdomains[i];
      const Polygon& Q = subdomains[j];
      for (std::size_t a = 0; a < P.size(); ++a) {
        const Point p = P[a], q = P[(a + 1) % P.size()];
        for (std::size_t b = 0; b < Q.size(); ++b) {
          const Point r = Q[b], s = Q[(b + 1) % Q.size()];
          Overlap ov;
          bool same = false;
          if (!collinear_overlap(p, q, r, s, tol, ov, same)) continue;
          if (same)
            throw InputError("sub-domains " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
          const double lp = (q - p).norm();
          const Point u = (q - p) / lp;
          const Point x0 = p + ov.t0 * u, x1 = p + ov.t1 * u;
          const bool whole_first = ov.t0 <= tol && ov.t1 >= lp - tol;
          const bool whole_second = (x0 - s).norm() <= tol && (x1 - r).norm() <= tol;
          if (!whole_first && !whole_second)
            throw InputError("interface between sub-domains " + std::to_string(i) + " and " + std::to_string(j) +
                             " is a proper subset of both adjacent edges");
          Interface f;
          f.a = lex_less(x0, x1) ? x0 : x1;
          f.b = lex_less(x0, x1) ? x1 : x0;
          f.i = i;
          f.j = j;
          // Sub-domain j runs along its edge r->s counterclockwise, so it lies
          // on the left of s - r.
          const Point dir = f.direction();
          tangents.push_back((s - r).dot(dir) > 0.0 ? dir : Point(-dir));
          detected.push_back(f);
        }
      }
    }

  if (!interfaces.empty()) {
    std::vector<bool> used(detected.size(), false);
    for (const Interface& f : interfaces) {
      bool found = false;
      for (std::size_t k = 0; k < detected.size() && !found; ++k) {
        const Interface& g = detected[k];
        const bool same_ends = ((f.a - g.a).norm() <= tol && (f.b - g.b).norm() <= tol) ||
                               ((f.a - g.b).norm() <= tol && (f.b - g.a).norm() <= tol);
        if (same_ends && f.i == g.i && f.j == g.j && !used[k]) used[k] = found = true;
      }
      if (!found) throw InputError("interface is not a shared edge of its sub-domains");
    }
    if (std::find(used.begin(), used.end(), false) != used.end())
      throw InputError("interface list misses a shared edge");
  }

  Decomposition d;
  d.subdomains_ = std::move(subdomains);
  d.interfaces_ = std::move(detected);
  d.tangent_ = std::move(tangents);
  d.area_ = 0.0;
  for (const Polygon& p : d.subdomains_) d.area_ += polygon_signed_area(p);

  d.exterior_.resize(K);
  for (int i = 0; i < K; ++i) {
    const Polygon& P = d.subdomains_[i];
    for (std::size_t a = 0; a < P.size(); ++a) {
      const Point p = P[a], q = P[(a + 1) % P.size()];
      std::vector<std::pair<double, double>> covered;
      for (const Interface& f : d.interfaces_) {
        if (f.i != i && f.j != i) continue;
        Overlap ov;
        bool same = false;
        if (collinear_overlap(p, q, f.a, f.b, tol, ov, same)) covered.emplace_back(ov.t0, ov.t1);
      }
      for (const auto& piece : subtract_intervals(p, q, covered, tol)) d.exterior_[i].push_back(piece);
    }
  }

  // Holes show up as clockwise loops of exterior pieces.
  {
    std::vector<std::array<Point, 2>> pieces;
    for (const auto& v : d.exterior_) pieces.insert(pieces.end(), v.begin(), v.end());
    std::vector<bool> done(pieces.size(), false);
    for (std::size_t s = 0; s < pieces.size(); ++s) {
      if (done[s]) continue;
      double loop_area = 0.0;
      std::size_t cur = s;
      while (true) {
        done[cur] = true;
        loop_area += 0.5 * cross(pieces[cur][0], pieces[cur][1]);
        std::size_t next = pieces.size();
        for (std::size_t k = 0; k < pieces.size(); ++k)
          if (!done[k] && (pieces[k][0] - pieces[cur][1]).norm() <= tol) {
            next = k;
            break;
          }
        if (next == pieces.size()) break;
        cur = next;
      }
      if (loop_area < -tol * ext) throw InputError("gap between sub-domains (enclosed hole)");
    }
  }

  if (!domain.empty()) {
    validate_polygon(domain, "domain");
    const double dom_area = polygon_signed_area(domain);
    for (const Polygon& p : d.subdomains_)
      for (const Point& x : p)
        if (!on_polygon_boundary(domain, x, tol) && !inside_polygon(domain, x))
          throw InputError("sub-domain extends outside the domain");
    if (std::abs(dom_area - d.area_) > 1e-12 * dom_area)
      throw InputError("gap between sub-domains: they cover area " + std::to_string(d.area_) + " of " +
                       std::to_string(dom_area));
  }
  return d;
}

Decomposition Decomposition::four_square() {
  const Polygon dom{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  std::vector<Polygon> s{
      {{-0.5, -0.5}, {0.0, -0.5}, {0.0, 0.0}, {-0.5, 0.0}},
      {{0.0, -0.5}, {0.5, -0.5}, {0.5, 0.0}, {0.0, 0.0}},
      {{0.0, 0.0}, {0.5, 0.0}, {0.5, 0.5}, {0.0, 0.5}},
      {{-0.5, 0.0}, {0.0, 0.0}, {0.0, 0.5}, {-0.5, 0.5}},
  };
  return build(std::move(s), {}, dom);
}

Decomposition Decomposition::single_square() {
  const Polygon dom{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}};
  return build({dom}, {}, dom);
}

Decomposition Decomposition::parse(std::istream& in) {
  std::vector<Polygon> subs;
  std::vector<Interface> ifaces;
  Polygon domain;
  std::string line;
  int lineno = 0;
  auto read_loop = [&](std::istringstream& ls) {
    Polygon p;
    double x, y;
    while (ls >> x) {
      if (!(ls >> y)) throw InputError("line " + std::to_string(lineno) + ": odd number of coordinates");
      p.emplace_back(x, y);
    }
    if (!ls.eof()) throw InputError("line " + std::to_string(lineno) + ": malformed number");
    return p;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    if (kw == "domain") {
      domain = read_loop(ls);
    } else if (kw == "subdomain") {
      subs.push_back(read_loop(ls));
    } else if (kw == "interface") {
      Interface f;
      double ax, ay, bx, by;
      if (!(ls >> ax >> ay >> bx >> by >> f.i >> f.j))
        throw InputError("line " + std::to_string(lineno) + ": interface needs ax ay bx by i j");
      f.a = Point(ax, ay);
      f.b = Point(bx, by);
      ifaces.push_back(f);
    } else {
      throw InputError("line " + std::to_string(lineno) + ": unknown keyword '" + kw + "'");
    }
  }
  return build(std::move(subs), std::move(ifaces), std::move(domain));
}

Decomposition Decomposition::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open decomposition file '" + path + "'");
  return parse(in);
}

Decomposition Decomposition::from_description(std::string_view desc) {
  if (desc == "four-square") return four_square();
  if (desc == "single") return single_square();
  if (desc.rfind("file=", 0) == 0) return from_file(std::string(desc.substr(5)));
  throw InputError("unknown decomposition '" + std::string(desc) + "' (expected four-square|single|file=<path>)");
}

double Decomposition::subdomain_area(int i) const { return polygon_signed_area(subdomains_[i]); }

double Decomposition::skeleton_length() const {
  double s = 0.0;
  for (const Interface& f : interfaces_) s += f.length();
  return s;
}

bool Decomposition::on_exterior_boundary(int i, const Point& p, double tol) const {
  const double scale = std::sqrt(area_);
  for (const auto& piece : exterior_[i])
    if (point_segment_distance(p, piece[0], piece[1]) <= tol * scale) return true;
  return false;
}

bool Decomposition::on_screen_boundary(const Point& p, double tol) const {
  for (int i = 0; i < num_subdomains(); ++i)
    if (on_exterior_boundary(i, p, tol)) return true;
  return false;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

Mesh Mesh::initial(const Decomposition& d, int n0) {
  return initial(d, std::vector<int>(d.num_subdomains(), n0));
}

Mesh Mesh::initial(const Decomposition& d, const std::vector<int>& n0s) {
  if (static_cast<int>(n0s.size()) != d.num_subdomains())
    throw InputError("need one mesh density per sub-domain");
  for (int n : n0s)
    if (n < 1) throw InputError("n0 must be at least 1");
  Mesh m;
  m.num_subdomains_ = d.num_subdomains();
  for (int s = 0; s < d.num_subdomains(); ++s) {
    const Polygon& p = d.subdomain(s);
    const int n0 = n0s[s];
    bool rect = p.size() == 4;
    for (std::size_t k = 0; k < p.size() && rect; ++k) {
      const Point e = p[(k + 1) % 4] - p[k];
      rect = std::abs(e.x()) == 0.0 || std::abs(e.y()) == 0.0;
    }
    if (!rect)
      throw InputError("structured mesh generator needs axis-aligned rectangular sub-domains (sub-domain " +
                       std::to_string(s) + ")");
    double x0 = p[0].x(), x1 = p[0].x(), y0 = p[0].y(), y1 = p[0].y();
    for (const Point& q : p) {
      x0 = std::min(x0, q.x());
      x1 = std::max(x1, q.x());
      y0 = std::min(y0, q.y());
      y1 = std::max(y1, q.y());
    }
    const Point center(0.5 * (x0 + x1), 0.5 * (y0 + y1));
    const int base = m.num_vertices();
    for (int r = 0; r <= n0; ++r)
      for (int c = 0; c <= n0; ++c) {
        const double x = c == n0 ? x1 : x0 + (x1 - x0) * c / n0;
        const double y = r == n0 ? y1 : y0 + (y1 - y0) * r / n0;
        m.vertices_.emplace_back(x, y);
        m.vertex_subdomain_.push_back(s);
      }
    auto id = [&](int r, int c) { return base + r * (n0 + 1) + c; };
    for (int r = 0; r < n0; ++r)
      for (int c = 0; c < n0; ++c) {
        const int p00 = id(r, c), p10 = id(r, c + 1), p01 = id(r + 1, c), p11 = id(r + 1, c + 1);
        const Point cc = 0.5 * (m.vertices_[p00] + m.vertices_[p11]);
        const Point dir = center - cc;
        const bool main_diagonal = dir.x() * dir.y() >= 0.0;
        // hypotenuse first, so it is the refinement edge
        if (main_diagonal) {
          m.elements_.push_back({{p11, p00, p10}, s});
          m.elements_.push_back({{p00, p11, p01}, s});
        } else {
          m.elements_.push_back({{p10, p01, p00}, s});
          m.elements_.push_back({{p01, p10, p11}, s});
        }
      }
  }
  m.parent_.assign(m.elements_.size(), -1);
  return m;
}

Mesh Mesh::refine_uniform() const {
  Mesh f;
  f.num_subdomains_ = num_subdomains_;
  f.vertices_ = vertices_;
  f.vertex_subdomain_ = vertex_subdomain_;
  f.vertex_origin_.resize(vertices_.size());
  for (int k = 0; k < num_vertices(); ++k) f.vertex_origin_[k] = {k, k};
  std::unordered_map<std::uint64_t, int> mid;
  mid.reserve(3 * elements_.size());
  auto midpoint = [&](int a, int b) {
    const auto [it, inserted] = mid.try_emplace(edge_key(a, b), static_cast<int>(f.vertices_.size()));
    if (inserted) {
      f.vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
      f.vertex_subdomain_.push_back(vertex_subdomain_[a]);
      f.vertex_origin_.push_back({std::min(a, b), std::max(a, b)});
    }
    return it->second;
  };
  f.elements_.reserve(4 * elements_.size());
  f.parent_.reserve(4 * elements_.size());
  for (int e = 0; e < num_elements(); ++e) {
    const auto [v0, v1, v2] = elements_[e].v;
    const int m01 = midpoint(v0, v1), m12 = midpoint(v1, v2), m20 = midpoint(v2, v0);
    const int s = elements_[e].subdomain;
    f.elements_.push_back({{v0, m01, m20}, s});
    f.elements_.push_back({{m01, v1, m12}, s});
    f.elements_.push_back({{m20, m12, v2}, s});
    f.elements_.push_back({{m12, m20, m01}, s});
    for (int c = 0; c < 4; ++c) f.parent_.push_back(e);
  }
  return f;
}

Mesh Mesh::refine_adaptive(const std::vector<int>& marked, bool* unchanged) const {
  if (unchanged) *unchanged = marked.empty();
  std::unordered_map<std::uint64_t, int> edge_mark;  // key -> midpoint id (-1 until created)
  for (int e : marked) {
    if (e < 0 || e >= num_elements()) throw InputError("marked element id out of range");
    edge_mark.emplace(edge_key(elements_[e].v[0], elements_[e].v[1]), -1);
  }
  if (marked.empty()) {
    Mesh copy = *this;
    copy.parent_.resize(elements_.size());
    for (int e = 0; e < num_elements(); ++e) copy.parent_[e] = e;
    copy.vertex_origin_.resize(vertices_.size());
    for (int k = 0; k < num_vertices(); ++k) copy.vertex_origin_[k] = {k, k};
    return copy;
  }
  // closure: an element with any marked edge gets its refinement edge marked
  for (bool changed = true; changed;) {
    changed = false;
    for (const Element& el : elements_) {
      const auto& v = el.v;
      const std::uint64_t ref = edge_key(v[0], v[1]);
      if (edge_mark.count(ref)) continue;
      if (edge_mark.count(edge_key(v[1], v[2])) || edge_mark.count(edge_key(v[2], v[0]))) {
        edge_mark.emplace(ref, -1);
        changed = true;
      }
    }
  }
  Mesh f;
  f.num_subdomains_ = num_subdomains_;
  f.vertices_ = vertices_;
  f.vertex_subdomain_ = vertex_subdomain_;
  f.vertex_origin_.resize(vertices_.size());
  for (int k = 0; k < num_vertices(); ++k) f.vertex_origin_[k] = {k, k};
  // midpoints in element order for reproducible numbering
  for (const Element& el : elements_)
    for (int k = 0; k < 3; ++k) {
      const int a = el.v[k], b = el.v[(k + 1) % 3];
      auto it = edge_mark.find(edge_key(a, b));
      if (it == edge_mark.end() || it->second >= 0) continue;
      it->second = static_cast<int>(f.vertices_.size());
      f.vertices_.push_back(0.5 * (vertices_[a] + vertices_[b]));
      f.vertex_subdomain_.push_back(vertex_subdomain_[a]);
      f.vertex_origin_.push_back({std::min(a, b), std::max(a, b)});
    }
  auto bisect = [&](auto&& self, const std::array<int, 3>& v, int sub, int parent) -> void {
    auto it = edge_mark.find(edge_key(v[0], v[1]));
    if (it == edge_mark.end()) {
      f.elements_.push_back({v, sub});
      f.parent_.push_back(parent);
      return;
    }
    const int m = it->second;
    self(self, {v[2], v[0], m}, sub, parent);
    self(self, {v[1], v[2], m}, sub, parent);
  };
  for (int e = 0; e < num_elements(); ++e) bisect(bisect, elements_[e].v, elements_[e].subdomain, e);
  return f;
}

Triangle Mesh::triangle(int e) const {
  const auto& v = elements_[e].v;
  return Triangle{{vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]}};
}

double Mesh::h(int e) const { return triangle(e).diameter(); }

double Mesh::h_max() const {
  double h = 0.0;
  for (int e = 0; e < num_elements(); ++e) h = std::max(h, this->h(e));
  return h;
}

double Mesh::h_min() const {
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < num_subdomains_; ++s) best = std::min(best, h_subdomain(s));
  return best;
}

double Mesh::h_subdomain(int i) const {
  double h = 0.0;
  for (int e = 0; e < num_elements(); ++e)
    if (elements_[e].subdomain == i) h = std::max(h, this->h(e));
  return h;
}

double Mesh::min_angle() const {
  double best = std::numeric_limits<double>::infinity();
  for (int e = 0; e < num_elements(); ++e) best = std::min(best, triangle(e).min_angle());
  return best;
}

double Mesh::area() const {
  double a = 0.0;
  for (int e = 0; e < num_elements(); ++e) a += triangle(e).area();
  return a;
}

std::uint64_t Mesh::id() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < n; ++k) {
      h ^= p[k];
      h *= 1099511628211ull;
    }
  };
  for (const Point& p : vertices_) mix(p.data(), 2 * sizeof(double));
  for (const Element& el : elements_) {
    mix(el.v.data(), sizeof(el.v));
    mix(&el.subdomain, sizeof(int));
  }
  return h;
}

void Mesh::write_snapshot(std::ostream& out) const {
  out << std::setprecision(17);
  out << "vertices " << num_vertices() << '\n';
  for (int k = 0; k < num_vertices(); ++k) out << k << ' ' << vertices_[k].x() << ' ' << vertices_[k].y() << '\n';
  out << "triangles " << num_elements() << '\n';
  for (int e = 0; e < num_elements(); ++e) {
    const auto& v = elements_[e].v;
    out << e << ' ' << v[0] << ' ' << v[1] << ' ' << v[2] << ' ' << elements_[e].subdomain << '\n';
  }
}

std::vector<std::array<int, 2>> Mesh::boundary_edges() const {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(3 * elements_.size());
  for (const Element& el : elements_)
    for (int k = 0; k < 3; ++k) ++count[edge_key(el.v[k], el.v[(k + 1) % 3])];
  std::vector<std::array<int, 2>> out;
  for (int e = 0; e < num_elements(); ++e)
    for (int k = 0; k < 3; ++k)
      if (count[edge_key(elements_[e].v[k], elements_[e].v[(k + 1) % 3])] == 1) out.push_back({e, k});
  return out;
}

// ---------------------------------------------------------------------------

double SkeletonPartition::total_length() const {
  double s = 0.0;
  for (const SkeletonSegment& g : segments) s += g.length();
  return s;
}

namespace {

struct SideEdge {
  double s0, s1;
  int elem, edge;
};

std::vector<SideEdge> side_edges(const Mesh& m, const std::vector<std::array<int, 2>>& bnd, const Interface& f,
                                 int sub) {
  const double L = f.length();
  const Point u = f.direction();
  const Point nrm(-u.y(), u.x());
  const double tol = 1e-10 * L;
  auto param = [&](const Point& x, double& s, double& dist) {
    const Point r = x - f.a;
    s = r.dot(u);
    dist = std::abs(r.dot(nrm));
    if (s < 0.0) dist = std::max(dist, -s);
    if (s > L) dist = std::max(dist, s - L);
  };
  for (int k = 0; k < m.num_vertices(); ++k) {
    if (m.vertex_subdomain(k) != sub) continue;
    double s, dist;
    param(m.vertex(k), s, dist);
    if (dist > tol && dist <= 1e-6 * L)
      throw InputError("mesh vertex lies " + std::to_string(dist) + " off interface " + "(tolerance breach)");
  }
  std::vector<SideEdge> out;
  for (const auto& [e, k] : bnd) {
    const Element& el = m.element(e);
    if (el.subdomain != sub) continue;
    double sa, da, sb, db;
    param(m.vertex(el.v[k]), sa, da);
    param(m.vertex(el.v[(k + 1) % 3]), sb, db);
    if (da > tol || db > tol) continue;
    out.push_back({std::min(sa, sb), std::max(sa, sb), e, k});
  }
  std::sort(out.begin(), out.end(), [](const SideEdge& x, const SideEdge& y) { return x.s0 < y.s0; });
  double cur = 0.0;
  for (const SideEdge& se : out) {
    if (std::abs(se.s0 - cur) > tol) throw InputError("mesh edges of sub-domain " + std::to_string(sub) + " do not tile an interface");
    cur = se.s1;
  }
  if (out.empty() || std::abs(cur - L) > tol)
    throw InputError("mesh edges of sub-domain " + std::to_string(sub) + " do not tile an interface");
  return out;
}

}  // namespace

SkeletonPartition build_skeleton_partition(const Mesh& m, const Decomposition& d) {
  SkeletonPartition sp;
  const auto bnd = m.boundary_edges();
  for (int k = 0; k < d.num_interfaces(); ++k) {
    const Interface& f = d.interface(k);
    const double L = f.length();
    const double tol = 1e-10 * L;
    const auto ei = side_edges(m, bnd, f, f.i);
    const auto ej = side_edges(m, bnd, f, f.j);
    std::vector<double> bp;
    for (const SideEdge& se : ei) bp.push_back(se.s0);
    for (const SideEdge& se : ej) bp.push_back(se.s0);
    std::sort(bp.begin(), bp.end());
    std::vector<double> merged;
    for (double s : bp)
      if (merged.empty() || s - merged.back() > tol) merged.push_back(s);
    merged.front() = 0.0;
    merged.push_back(L);
    std::size_t a = 0, b = 0;
    const Point u = f.direction();
    for (std::size_t q = 0; q + 1 < merged.size(); ++q) {
      const double s0 = merged[q], s1 = merged[q + 1];
      const double mid = 0.5 * (s0 + s1);
      while (ei[a].s1 < mid) ++a;
      while (ej[b].s1 < mid) ++b;
      SkeletonSegment g;
      g.interface = k;
      g.s0 = s0;
      g.s1 = s1;
      g.p0 = q == 0 ? f.a : Point(f.a + s0 * u);
      g.p1 = q + 2 == merged.size() ? f.b : Point(f.a + s1 * u);
      g.elem_i = ei[a].elem;
      g.edge_i = ei[a].edge;
      g.elem_j = ej[b].elem;
      g.edge_j = ej[b].edge;
      sp.segments.push_back(g);
    }
    sp.breakpoints.push_back(std::move(merged));
    sp.tangent.push_back(d.coupling_tangent(k));
  }
  return sp;
}

}  // namespace nbem
