#include "nbem/assembly.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

#include "nbem/quadrature.hpp"

namespace nbem {

DofMap::DofMap(const Mesh& m, const Decomposition& d) {
  dof_of_.assign(m.num_vertices(), -1);
  for (int v = 0; v < m.num_vertices(); ++v) {
    if (d.on_exterior_boundary(m.vertex_subdomain(v), m.vertex(v))) continue;
    dof_of_[v] = static_cast<int>(vertex_of_.size());
    vertex_of_.push_back(v);
  }
}

DofMap DofMap::all_vertices(const Mesh& m) {
  DofMap d;
  d.dof_of_.resize(m.num_vertices());
  d.vertex_of_.resize(m.num_vertices());
  for (int v = 0; v < m.num_vertices(); ++v) d.dof_of_[v] = d.vertex_of_[v] = v;
  return d;
}

Density Density::uniform(double c) {
  Density d;
  d.constant = true;
  d.value = c;
  return d;
}

Density Density::function(std::function<double(const Point&)> g) {
  Density d;
  d.f = std::move(g);
  return d;
}

double DiscreteFunction::vertex_value(int v) const {
  const int k = dofs->dof(v);
  return k < 0 ? 0.0 : coeffs[k];
}

double DiscreteFunction::value(int e, const Point& x) const {
  const auto l = mesh->triangle(e).barycentric(x);
  const auto& v = mesh->element(e).v;
  return l[0] * vertex_value(v[0]) + l[1] * vertex_value(v[1]) + l[2] * vertex_value(v[2]);
}

Point DiscreteFunction::curl(int e) const {
  Point c = Point::Zero();
  for (int k = 0; k < 3; ++k) c += vertex_value(mesh->element(e).v[k]) * element_curl(*mesh, e, k);
  return c;
}

Point element_curl(const Mesh& m, int e, int local) {
  const Triangle t = m.triangle(e);
  const Point& a = t.v[(local + 1) % 3];
  const Point& b = t.v[(local + 2) % 3];
  const double twice = 2.0 * t.signed_area();
  // grad lambda = (a_y - b_y, b_x - a_x) / 2|T|; curl = (d2, -d1)
  const Point grad((a.y() - b.y()) / twice, (b.x() - a.x()) / twice);
  return Point(grad.y(), -grad.x());
}

namespace {

struct ElementData {
  std::vector<ElementGeometry> geo;
  std::vector<std::array<Point, 3>> curl;
  std::vector<std::array<int, 3>> dof;
  std::vector<bool> active;  // has at least one dof
};

ElementData element_data(const Mesh& m, const DofMap& d) {
  ElementData out;
  const int E = m.num_elements();
  out.geo.reserve(E);
  out.curl.resize(E);
  out.dof.resize(E);
  out.active.resize(E);
  for (int e = 0; e < E; ++e) {
    out.geo.emplace_back(m.triangle(e));
    bool any = false;
    for (int k = 0; k < 3; ++k) {
      out.curl[e][k] = element_curl(m, e, k);
      out.dof[e][k] = d.dof(m.element(e).v[k]);
      any = any || out.dof[e][k] >= 0;
    }
    out.active[e] = any;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd assemble_vcurl_block(const Mesh& m, const DofMap& d, const QuadConfig& cfg) {
  const int N = d.size();
  const int E = m.num_elements();
  const ElementData ed = element_data(m, d);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
  for (int s = 0; s < E; ++s) {
    if (!ed.active[s]) continue;
    for (int t = s; t < E; ++t) {
      if (!ed.active[t]) continue;
      const double G = pair_potential(ed.geo[s], ed.geo[t], cfg);
      for (int a = 0; a < 3; ++a) {
        const int da = ed.dof[s][a];
        if (da < 0) continue;
        for (int b = 0; b < 3; ++b) {
          const int db = ed.dof[t][b];
          if (db < 0) continue;
          const double val = ed.curl[s][a].dot(ed.curl[t][b]) * G;
          A(da, db) += val;
          if (s != t) A(db, da) += val;
        }
      }
    }
  }
  // exact symmetry regardless of summation order
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < j; ++i) {
      const double v = 0.5 * (A(i, j) + A(j, i));
      A(i, j) = A(j, i) = v;
    }
  return A;
}

TraceWeights jump_weights(const Mesh& m, const DofMap& d, const SkeletonSegment& g, const Point& x) {
  TraceWeights w;
  auto side = [&](int elem, int edge, double sign, int slot) {
    const auto& v = m.element(elem).v;
    const int va = v[edge], vb = v[(edge + 1) % 3];
    const Point A = m.vertex(va), B = m.vertex(vb);
    const double lb = (x - A).dot(B - A) / (B - A).squaredNorm();
    w.dof[slot] = d.dof(va);
    w.value[slot] = sign * (1.0 - lb);
    w.dof[slot + 1] = d.dof(vb);
    w.value[slot + 1] = sign * lb;
  };
  side(g.elem_j, g.edge_j, 1.0, 0);
  side(g.elem_i, g.edge_i, -1.0, 2);
  return w;
}

void assemble_nitsche_block(const Mesh& m, const DofMap& d, const SkeletonPartition& s, const QuadConfig& cfg,
                            std::vector<int>& trace_dofs, Eigen::MatrixXd& Bc) {
  const int N = d.size();
  std::vector<int> row(N, -1);
  trace_dofs.clear();
  for (const SkeletonSegment& g : s.segments) {
    const TraceWeights w = jump_weights(m, d, g, g.p0);
    for (int k = 0; k < 4; ++k)
      if (w.dof[k] >= 0 && row[w.dof[k]] < 0) {
        row[w.dof[k]] = static_cast<int>(trace_dofs.size());
        trace_dofs.push_back(w.dof[k]);
      }
  }
  Bc = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(trace_dofs.size()), N);
  if (s.segments.empty()) return;
  const ElementData ed = element_data(m, d);
  const int E = m.num_elements();
  for (const SkeletonSegment& g : s.segments) {
    const TraceWeights w0 = jump_weights(m, d, g, g.p0);
    const TraceWeights w1 = jump_weights(m, d, g, g.p1);
    const Point& t = s.tangent[g.interface];
    for (int e = 0; e < E; ++e) {
      if (!ed.active[e]) continue;
      const auto mom = edge_potential_moments(g.p0, g.p1, ed.geo[e], cfg);
      std::array<double, 3> tc;
      for (int k = 0; k < 3; ++k) tc[k] = t.dot(ed.curl[e][k]);
      for (int q = 0; q < 4; ++q) {
        if (w0.dof[q] < 0) continue;
        const double jw = w0.value[q] * mom[0] + w1.value[q] * mom[1];
        const int r = row[w0.dof[q]];
        for (int k = 0; k < 3; ++k)
          if (ed.dof[e][k] >= 0) Bc(r, ed.dof[e][k]) += tc[k] * jw;
      }
    }
  }
}

Eigen::MatrixXd assemble_nitsche_block(const Mesh& m, const DofMap& d, const SkeletonPartition& s,
                                       const QuadConfig& cfg) {
  SystemBlocks blk;
  assemble_nitsche_block(m, d, s, cfg, blk.trace_dofs, blk.Bc);
  blk.b = Eigen::VectorXd::Zero(d.size());
  return blk.B();
}

Eigen::SparseMatrix<double> assemble_jump_mass(const Mesh& m, const DofMap& d, const SkeletonPartition& s) {
  const QuadratureRule& gl = gauss_legendre(2);
  std::vector<Eigen::Triplet<double>> trip;
  for (const SkeletonSegment& g : s.segments) {
    const double len = (g.p1 - g.p0).norm();
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const Point x = g.p0 + gl.nodes[q].x() * (g.p1 - g.p0);
      const TraceWeights w = jump_weights(m, d, g, x);
      const double wq = gl.weights[q] * len;
      for (int a = 0; a < 4; ++a) {
        if (w.dof[a] < 0) continue;
        for (int b = 0; b < 4; ++b)
          if (w.dof[b] >= 0) trip.emplace_back(w.dof[a], w.dof[b], wq * w.value[a] * w.value[b]);
      }
    }
  }
  Eigen::SparseMatrix<double> M(d.size(), d.size());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd assemble_rhs(const Density& f, const Mesh& m, const DofMap& d) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(d.size());
  const QuadratureRule& rule = quadrature_rule(RuleKind::Triangle, 4);
  for (int e = 0; e < m.num_elements(); ++e) {
    const Triangle t = m.triangle(e);
    const auto& v = m.element(e).v;
    std::array<double, 3> loc{};
    if (f.constant) {
      loc.fill(f.value * t.area() / 3.0);
    } else {
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double xi = rule.nodes[q].x(), eta = rule.nodes[q].y();
        const double fx = f(t.map(xi, eta)) * rule.weights[q] * 2.0 * t.area();
        loc[0] += fx * (1.0 - xi - eta);
        loc[1] += fx * xi;
        loc[2] += fx * eta;
      }
    }
    for (int k = 0; k < 3; ++k)
      if (d.dof(v[k]) >= 0) b[d.dof(v[k])] += loc[k];
  }
  return b;
}

SystemBlocks assemble_blocks(const Mesh& m, const DofMap& d, const SkeletonPartition& s, const Density& f,
                             const QuadConfig& cfg) {
  SystemBlocks blk;
  blk.AV = assemble_vcurl_block(m, d, cfg);
  assemble_nitsche_block(m, d, s, cfg, blk.trace_dofs, blk.Bc);
  blk.M = assemble_jump_mass(m, d, s);
  blk.b = assemble_rhs(f, m, d);
  return blk;
}

Eigen::MatrixXd SystemBlocks::B() const {
  const int N = size();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, N);
  for (std::size_t r = 0; r < trace_dofs.size(); ++r) out.row(trace_dofs[r]) = Bc.row(static_cast<Eigen::Index>(r));
  return out;
}

Eigen::VectorXd SystemBlocks::skew_apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(size());
  if (trace_dofs.empty()) return y;
  const Eigen::VectorXd bx = Bc * x;  // B x on trace rows
  Eigen::VectorXd xt(static_cast<Eigen::Index>(trace_dofs.size()));
  for (std::size_t r = 0; r < trace_dofs.size(); ++r) {
    y[trace_dofs[r]] += bx[static_cast<Eigen::Index>(r)];
    xt[static_cast<Eigen::Index>(r)] = x[trace_dofs[r]];
  }
  y.noalias() -= Bc.transpose() * xt;
  return y;
}

Eigen::MatrixXd combine_blocks(const SystemBlocks& blocks, double nu) {
  if (!(nu >= 0.0)) throw InputError("penalty nu must be non-negative");
  Eigen::MatrixXd A = blocks.AV;
  for (std::size_t r = 0; r < blocks.trace_dofs.size(); ++r) {
    const int v = blocks.trace_dofs[r];
    A.row(v) += blocks.Bc.row(static_cast<Eigen::Index>(r));
    A.col(v) -= blocks.Bc.row(static_cast<Eigen::Index>(r)).transpose();
  }
  for (int k = 0; k < blocks.M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(blocks.M, k); it; ++it) A(it.row(), it.col()) += nu * it.value();
  return A;
}

Eigen::MatrixXd assemble_system(const SystemBlocks& blocks, double nu) {
  if (!(nu > 0.0)) throw InputError("penalty nu must be positive, got " + std::to_string(nu));
  return combine_blocks(blocks, nu);
}

void write_system(const std::string& path, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double nu,
                  std::uint64_t mesh_id) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  const std::int64_t n = A.rows();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(&nu), sizeof nu);
  out.write(reinterpret_cast<const char*>(&mesh_id), sizeof mesh_id);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = A;
  out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(sizeof(double) * rm.size()));
  out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size()));
  if (!out) throw InputError("write to '" + path + "' failed");
}

double jump_norm_squared(const DiscreteFunction& u, const SkeletonPartition& s) {
  const QuadratureRule& gl = gauss_legendre(2);
  double sum = 0.0;
  for (const SkeletonSegment& g : s.segments) {
    const double len = (g.p1 - g.p0).norm();
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const Point x = g.p0 + gl.nodes[q].x() * (g.p1 - g.p0);
      const TraceWeights w = jump_weights(*u.mesh, *u.dofs, g, x);
      double jump = 0.0;
      for (int a = 0; a < 4; ++a)
        if (w.dof[a] >= 0) jump += w.value[a] * u.coeffs[w.dof[a]];
      sum += gl.weights[q] * len * jump * jump;
    }
  }
  return sum;
}

}  // namespace nbem
