#pragma once

#include <iosfwd>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "nbem/assembly.hpp"

namespace nbem {

struct SolveDiagnostics {
  double relative_residual = 0.0;
  /// Reciprocal condition number estimate (1-norm).
  double rcond = 0.0;
  bool refined = false;
};

struct DenseSolution {
  Eigen::VectorXd x;
  SolveDiagnostics diag;
};

/// LU with partial pivoting. Throws NumericalError with the pivot index for a
/// matrix singular to working precision, or if the relative residual stays
/// above 1e-10 after one step of iterative refinement.
DenseSolution solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b);

/// Embedding of the coarse space into the space on a refinement of its mesh
/// (fine nodal values interpolate the coarse function).
Eigen::SparseMatrix<double> prolongation(const Mesh& coarse, const DofMap& coarse_dofs, const Mesh& fine,
                                         const DofMap& fine_dofs);
DiscreteFunction prolong(const DiscreteFunction& u, const Mesh& fine, const DofMap& fine_dofs);

/// One discretization level: mesh, space, skeleton, assembled system and solution.
struct Level {
  Mesh mesh;
  DofMap dofs;
  SkeletonPartition skeleton;
  SystemBlocks blocks;  // A_V is released once A is formed
  Eigen::MatrixXd A;
  Eigen::VectorXd u;
  SolveDiagnostics diag;
  double norm_A = 0.0;  // Frobenius norm of A
  double assembly_seconds = 0.0;
  double solve_seconds = 0.0;

  DiscreteFunction function() const { return DiscreteFunction{&mesh, &dofs, u}; }
  double energy() const { return blocks.b.dot(u); }
  /// ||[u_h]||^2 on the skeleton.
  double jump_squared() const;
  /// A x through the blocks (A itself may have been released).
  Eigen::VectorXd apply(const Eigen::VectorXd& x, double nu) const;
};

struct SolveSettings {
  double nu = 100.0;
  QuadConfig quad = QuadConfig::accurate();
  Density f = Density::uniform(1.0);
};

/// Assembles and solves on `mesh`; keeps A when keep_matrix is set.
std::unique_ptr<Level> solve_level(Mesh mesh, const Decomposition& d, const SolveSettings& s, bool keep_matrix);

/// Coarse solution u_h, fine solution u_{h/2} on the red refinement, and the
/// prolongation between them.
struct SolvePair {
  std::unique_ptr<Level> coarse;
  std::unique_ptr<Level> fine;
  Eigen::SparseMatrix<double> P;
  Eigen::VectorXd Pu;  // P u_h on the fine dofs
  /// max_w |(P^T A_fine (u_fine - P u_h))_w| / (||A_fine||_F ||u_fine||_2).
  double galerkin_defect = 0.0;
};

/// Solves on `coarse_mesh` (or reuses `coarse` if given) and on its red refinement.
SolvePair solve_pair(const Mesh& coarse_mesh, const Decomposition& d, const SolveSettings& s,
                     std::unique_ptr<Level> coarse = nullptr);

/// Text export: one line per dof (dof vertex subdomain x y value).
void write_solution(std::ostream& out, const Level& level);

}  // namespace nbem
