#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "nbem/mesh.hpp"
#include "nbem/potential.hpp"

namespace nbem {

/// Continuous P1 dofs per sub-domain. Vertices on the exterior boundary carry
/// no dof; interface points get one dof per side.
class DofMap {
 public:
  DofMap() = default;
  DofMap(const Mesh& m, const Decomposition& d);
  /// Every vertex gets a dof (no boundary condition).
  static DofMap all_vertices(const Mesh& m);

  int size() const { return static_cast<int>(vertex_of_.size()); }
  /// -1 for constrained vertices.
  int dof(int vertex) const { return dof_of_[vertex]; }
  int vertex(int dof) const { return vertex_of_[dof]; }

 private:
  std::vector<int> dof_of_;
  std::vector<int> vertex_of_;
};

/// Surface density f. `constant` enables exact integration of f = value.
struct Density {
  std::function<double(const Point&)> f;
  bool constant = false;
  double value = 0.0;

  static Density uniform(double c);
  static Density function(std::function<double(const Point&)> g);
  double operator()(const Point& x) const { return constant ? value : f(x); }
};

/// Coefficient vector together with the mesh and dofs it lives on.
struct DiscreteFunction {
  const Mesh* mesh = nullptr;
  const DofMap* dofs = nullptr;
  Eigen::VectorXd coeffs;

  double vertex_value(int v) const;
  /// Value at a point of element e (affine on e).
  double value(int e, const Point& x) const;
  Point curl(int e) const;
};

/// Constant surface curl (d2 phi, -d1 phi) of the local hat function `local` on element e.
Point element_curl(const Mesh& m, int e, int local);

/// The parts of the Galerkin matrix. B is kept with rows only for the dofs
/// that have a trace on the skeleton: B(v, u) = Bc(row_of(v), u).
struct SystemBlocks {
  Eigen::MatrixXd AV;
  std::vector<int> trace_dofs;
  Eigen::MatrixXd Bc;
  Eigen::SparseMatrix<double> M;
  Eigen::VectorXd b;

  int size() const { return static_cast<int>(b.size()); }
  Eigen::MatrixXd B() const;
  /// (B - B^T) x without forming B.
  Eigen::VectorXd skew_apply(const Eigen::VectorXd& x) const;
};

Eigen::MatrixXd assemble_vcurl_block(const Mesh& m, const DofMap& d, const QuadConfig& cfg);

/// Trace dofs and compact B rows; see SystemBlocks.
void assemble_nitsche_block(const Mesh& m, const DofMap& d, const SkeletonPartition& s, const QuadConfig& cfg,
                            std::vector<int>& trace_dofs, Eigen::MatrixXd& Bc);
Eigen::MatrixXd assemble_nitsche_block(const Mesh& m, const DofMap& d, const SkeletonPartition& s,
                                       const QuadConfig& cfg);

Eigen::SparseMatrix<double> assemble_jump_mass(const Mesh& m, const DofMap& d, const SkeletonPartition& s);

Eigen::VectorXd assemble_rhs(const Density& f, const Mesh& m, const DofMap& d);

SystemBlocks assemble_blocks(const Mesh& m, const DofMap& d, const SkeletonPartition& s, const Density& f,
                             const QuadConfig& cfg);

/// A = A_V + B - B^T + nu M. Requires nu > 0.
Eigen::MatrixXd assemble_system(const SystemBlocks& blocks, double nu);
/// Same combination with nu >= 0 (nu = 0 is useful for diagnostics only).
Eigen::MatrixXd combine_blocks(const SystemBlocks& blocks, double nu);

/// Binary dump: int64 N, float64 nu, uint64 mesh id, then A row-major and b.
void write_system(const std::string& path, const Eigen::MatrixXd& A, const Eigen::VectorXd& b, double nu,
                  std::uint64_t mesh_id);

/// Jump of the dof function at a point of skeleton segment g, as
/// (dof, value) pairs for the up to four dofs with a trace there.
struct TraceWeights {
  std::array<int, 4> dof;
  std::array<double, 4> value;
};
TraceWeights jump_weights(const Mesh& m, const DofMap& d, const SkeletonSegment& g, const Point& x);

/// ||[u]||^2 over the skeleton, computed segment by segment.
double jump_norm_squared(const DiscreteFunction& u, const SkeletonPartition& s);

}  // namespace nbem
