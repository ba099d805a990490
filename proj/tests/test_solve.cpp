#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "nbem/solve.hpp"

using namespace nbem;

namespace {

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = g(rng);
  return v;
}

// Coarse function evaluated at a fine vertex through the coarse parent element.
double coarse_value_at(const DiscreteFunction& u, const Point& x, int subdomain) {
  const Mesh& m = *u.mesh;
  for (int e = 0; e < m.num_elements(); ++e)
    if (m.element(e).subdomain == subdomain && m.triangle(e).contains(x, 1e-12)) return u.value(e, x);
  FAIL("point not found");
  return 0.0;
}

}  // namespace

TEST_CASE("dense solver") {
  Eigen::MatrixXd A(2, 2);
  A << 4, 1, 2, 3;
  Eigen::VectorXd b(2);
  b << 1, 2;
  const DenseSolution s = solve_dense(A, b);
  CHECK(s.x[0] == doctest::Approx(0.1));
  CHECK(s.x[1] == doctest::Approx(0.6));
  CHECK(s.diag.relative_residual < 1e-15);
  CHECK(s.diag.rcond > 0.1);

  Eigen::MatrixXd S(2, 2);
  S << 1, 2, 2, 4;
  CHECK_THROWS_AS(solve_dense(S, b), NumericalError);
  CHECK_THROWS_AS(solve_dense(Eigen::MatrixXd::Zero(3, 3), Eigen::VectorXd::Ones(3)), NumericalError);

  std::mt19937_64 rng(7);
  const int n = 60;
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i) R.col(i) = random_vector(n, rng);
  R += n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd rhs = random_vector(n, rng);
  const DenseSolution r = solve_dense(R, rhs);
  CHECK((R * r.x - rhs).norm() < 1e-13 * rhs.norm());
}

TEST_CASE("prolongation") {
  const Decomposition d = Decomposition::four_square();
  const Mesh coarse = Mesh::initial(d, std::vector<int>{2, 3, 2, 3});
  const DofMap cd(coarse, d);
  std::mt19937_64 rng(11);

  auto check_embedding = [&](const Mesh& fine) {
    const DofMap fd(fine, d);
    const auto P = prolongation(coarse, cd, fine, fd);
    CHECK(P.rows() == fd.size());
    CHECK(P.cols() == cd.size());
    const DiscreteFunction u{&coarse, &cd, random_vector(cd.size(), rng)};
    const DiscreteFunction pu = prolong(u, fine, fd);
    CHECK((pu.coeffs - P * u.coeffs).norm() < 1e-14 * u.coeffs.norm());
    for (int k = 0; k < fd.size(); ++k) {
      const int v = fd.vertex(k);
      CHECK(std::abs(pu.coeffs[k] - coarse_value_at(u, fine.vertex(v), fine.vertex_subdomain(v))) < 1e-13);
    }
    // curls agree elementwise with the parent
    for (int e = 0; e < fine.num_elements(); ++e)
      CHECK((pu.curl(e) - u.curl(fine.parent(e))).norm() < 1e-12 * (1.0 + u.curl(fine.parent(e)).norm()));
    // nonnegative weights summing to at most one
    const Eigen::MatrixXd Pd(P);
    CHECK(Pd.minCoeff() >= 0.0);
    CHECK(Pd.rowwise().sum().maxCoeff() <= 1.0 + 1e-15);
  };

  SUBCASE("red refinement") { check_embedding(coarse.refine_uniform()); }
  SUBCASE("bisection") {
    std::vector<int> marked;
    for (int e = 0; e < coarse.num_elements(); e += 3) marked.push_back(e);
    check_embedding(coarse.refine_adaptive(marked));
  }
}

TEST_CASE("nested Galerkin matrices") {
  const Decomposition d = Decomposition::four_square();
  const QuadConfig acc = QuadConfig::accurate();
  for (const std::vector<int>& n0 : {std::vector<int>{2, 2, 2, 2}, std::vector<int>{2, 3, 2, 3}}) {
    const Mesh coarse = Mesh::initial(d, n0);
    const Mesh fine = coarse.refine_uniform();
    const DofMap cd(coarse, d), fd(fine, d);
    const auto bc = assemble_blocks(coarse, cd, build_skeleton_partition(coarse, d), Density::uniform(1.0), acc);
    const auto bf = assemble_blocks(fine, fd, build_skeleton_partition(fine, d), Density::uniform(1.0), acc);
    const Eigen::MatrixXd P(prolongation(coarse, cd, fine, fd));
    const Eigen::MatrixXd Ac = assemble_system(bc, 100.0), Af = assemble_system(bf, 100.0);
    CHECK((P.transpose() * Af * P - Ac).norm() <= 1e-6 * Ac.norm());
    CHECK((P.transpose() * bf.b - bc.b).norm() <= 1e-14 * bc.b.norm());
  }
}

TEST_CASE("solution pair") {
  const Decomposition d = Decomposition::four_square();
  SolveSettings s;
  SUBCASE("default mesh") {
    const Mesh m = Mesh::initial(d, 2);
    const SolvePair p = solve_pair(m, d, s);
    CHECK(p.coarse->dofs.size() == 16);
    CHECK(p.fine->dofs.size() == 64);
    CHECK(p.galerkin_defect <= 1e-8);
    // energy = a(u,u) because the skew part drops out
    const Eigen::VectorXd Au = p.fine->apply(p.fine->u, s.nu);
    CHECK(std::abs(p.fine->u.dot(Au) - p.fine->energy()) < 1e-12 * p.fine->energy());
    CHECK((Au - p.fine->blocks.b).norm() < 1e-10 * p.fine->blocks.b.norm());
    // the energy grows under refinement
    CHECK(p.fine->energy() > p.coarse->energy());
    // the symmetric mesh gives matching traces
    CHECK(p.coarse->jump_squared() < 1e-20);
    CHECK(p.Pu.size() == p.fine->dofs.size());
  }
  SUBCASE("non-matching meshes") {
    const SolvePair p = solve_pair(Mesh::initial(d, std::vector<int>{2, 3, 2, 3}), d, s);
    CHECK(p.galerkin_defect <= 1e-8);
    CHECK(p.coarse->jump_squared() > 0.0);
    CHECK(p.fine->jump_squared() < p.coarse->jump_squared());
  }
  SUBCASE("reusing the coarse level") {
    const Mesh m = Mesh::initial(d, 2);
    auto coarse = solve_level(m, d, s, true);
    const double e = coarse->energy();
    const SolvePair p = solve_pair(m, d, s, std::move(coarse));
    CHECK(p.coarse->energy() == e);
    CHECK(p.coarse->A.size() == 0);  // released once the pair is formed
    CHECK(p.fine->A.rows() == 64);
  }
  SUBCASE("zero density") {
    SolveSettings z = s;
    z.f = Density::uniform(0.0);
    const auto l = solve_level(Mesh::initial(d, 2), d, z, false);
    CHECK(l->u.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("solution export") {
  const Decomposition d = Decomposition::four_square();
  const auto l = solve_level(Mesh::initial(d, 1), d, SolveSettings{}, false);
  std::ostringstream os;
  write_solution(os, *l);
  std::istringstream in(os.str());
  int lines = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') ++lines;
  CHECK(lines == l->dofs.size());
}
