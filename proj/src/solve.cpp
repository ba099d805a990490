#include "nbem/solve.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include <Eigen/LU>

namespace nbem {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

DenseSolution solve_dense(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw InputError("solve_dense: dimension mismatch");
  DenseSolution out;
  const Eigen::Index n = A.rows();
  if (n == 0) return out;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double amax = A.cwiseAbs().maxCoeff();
  const double small = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * amax;
  for (Eigen::Index k = 0; k < n; ++k)
    if (!(std::abs(lu.matrixLU()(k, k)) > small))
      throw NumericalError("matrix is singular to working precision (pivot " + std::to_string(k) + ")");
  out.diag.rcond = lu.rcond();
  const double bn = b.norm();
  if (bn == 0.0) {
    out.x = Eigen::VectorXd::Zero(n);
    return out;
  }
  out.x = lu.solve(b);
  Eigen::VectorXd r = b - A * out.x;
  out.diag.relative_residual = r.norm() / bn;
  if (out.diag.relative_residual > 1e-10) {
    out.x += lu.solve(r);
    r = b - A * out.x;
    out.diag.relative_residual = r.norm() / bn;
    out.diag.refined = true;
    if (out.diag.relative_residual > 1e-10)
      throw NumericalError("linear solve residual " + std::to_string(out.diag.relative_residual) + " exceeds 1e-10");
  }
  return out;
}

Eigen::SparseMatrix<double> prolongation(const Mesh& coarse, const DofMap& coarse_dofs, const Mesh& fine,
                                         const DofMap& fine_dofs) {
  const auto& origin = fine.vertex_origin();
  if (origin.size() != static_cast<std::size_t>(fine.num_vertices()))
    throw InputError("prolongation: fine mesh has no genealogy");
  std::vector<Eigen::Triplet<double>> trip;
  for (int v = 0; v < fine.num_vertices(); ++v) {
    const int fd = fine_dofs.dof(v);
    if (fd < 0) continue;
    const auto [a, b] = origin[v];
    if (a < 0 || b < 0 || a >= coarse.num_vertices() || b >= coarse.num_vertices())
      throw InputError("prolongation: genealogy does not match the coarse mesh");
    if (a == b) {
      if (coarse_dofs.dof(a) >= 0) trip.emplace_back(fd, coarse_dofs.dof(a), 1.0);
    } else {
      if (coarse_dofs.dof(a) >= 0) trip.emplace_back(fd, coarse_dofs.dof(a), 0.5);
      if (coarse_dofs.dof(b) >= 0) trip.emplace_back(fd, coarse_dofs.dof(b), 0.5);
    }
  }
  Eigen::SparseMatrix<double> P(fine_dofs.size(), coarse_dofs.size());
  P.setFromTriplets(trip.begin(), trip.end());
  return P;
}

DiscreteFunction prolong(const DiscreteFunction& u, const Mesh& fine, const DofMap& fine_dofs) {
  const Eigen::SparseMatrix<double> P = prolongation(*u.mesh, *u.dofs, fine, fine_dofs);
  return DiscreteFunction{&fine, &fine_dofs, P * u.coeffs};
}

double Level::jump_squared() const { return u.dot(blocks.M * u); }

Eigen::VectorXd Level::apply(const Eigen::VectorXd& x, double nu) const {
  if (A.size() > 0) return A * x;
  if (blocks.AV.size() == 0) throw InputError("level matrix was released");
  return blocks.AV * x + blocks.skew_apply(x) + nu * (blocks.M * x);
}

std::unique_ptr<Level> solve_level(Mesh mesh, const Decomposition& d, const SolveSettings& s, bool keep_matrix) {
  auto level = std::make_unique<Level>();
  level->mesh = std::move(mesh);
  const auto t0 = std::chrono::steady_clock::now();
  level->dofs = DofMap(level->mesh, d);
  level->skeleton = build_skeleton_partition(level->mesh, d);
  level->blocks = assemble_blocks(level->mesh, level->dofs, level->skeleton, s.f, s.quad);
  level->A = assemble_system(level->blocks, s.nu);
  level->blocks.AV = Eigen::MatrixXd();
  level->norm_A = level->A.norm();
  level->assembly_seconds = seconds_since(t0);
  const auto t1 = std::chrono::steady_clock::now();
  DenseSolution sol = solve_dense(level->A, level->blocks.b);
  level->u = std::move(sol.x);
  level->diag = sol.diag;
  level->solve_seconds = seconds_since(t1);
  if (!keep_matrix) level->A = Eigen::MatrixXd();
  return level;
}

SolvePair solve_pair(const Mesh& coarse_mesh, const Decomposition& d, const SolveSettings& s,
                     std::unique_ptr<Level> coarse) {
  SolvePair p;
  p.coarse = coarse ? std::move(coarse) : solve_level(coarse_mesh, d, s, false);
  p.coarse->A = Eigen::MatrixXd();
  p.fine = solve_level(p.coarse->mesh.refine_uniform(), d, s, true);
  p.P = prolongation(p.coarse->mesh, p.coarse->dofs, p.fine->mesh, p.fine->dofs);
  p.Pu = p.P * p.coarse->u;
  const Eigen::VectorXd diff = p.fine->u - p.Pu;
  const Eigen::VectorXd r = p.P.transpose() * (p.fine->A * diff);
  const double scale = p.fine->norm_A * p.fine->u.norm();
  const double rmax = r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
  p.galerkin_defect = scale > 0.0 ? rmax / scale : rmax;
  return p;
}

void write_solution(std::ostream& out, const Level& level) {
  out << "# dof vertex subdomain x y value\n" << std::setprecision(17);
  for (int k = 0; k < level.dofs.size(); ++k) {
    const int v = level.dofs.vertex(k);
    const Point& x = level.mesh.vertex(v);
    out << k << ' ' << v << ' ' << level.mesh.vertex_subdomain(v) << ' ' << x.x() << ' ' << x.y() << ' '
        << level.u[k] << '\n';
  }
}

}  // namespace nbem
