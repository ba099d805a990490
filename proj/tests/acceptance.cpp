// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nbem/cli.hpp"
#include "oracles.hpp"

using namespace nbem;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

int failures = 0;

void report(int id, const std::string& name, const Outcome& o, double seconds) {
  if (!o.pass) ++failures;
  std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << name << " (" << fmt("%.1f s", seconds) << ")";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

template <class F>
void criterion(int id, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  report(id, name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double min_eigenvalue(const Eigen::MatrixXd& A) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::VectorXd v(n);
  for (int k = 0; k < n; ++k) v[k] = g(rng);
  return v;
}

std::vector<double> column(const std::vector<ConvergenceRecord>& r, double ConvergenceRecord::*f) {
  std::vector<double> out;
  for (const ConvergenceRecord& x : r) out.push_back(x.*f);
  return out;
}

std::vector<double> dofs(const std::vector<ConvergenceRecord>& r) {
  std::vector<double> out;
  for (const ConvergenceRecord& x : r) out.push_back(static_cast<double>(x.N));
  return out;
}

StudyResult study(StudyMode mode, double nu, const std::string& decomposition = "four-square",
                  std::vector<int> n0 = {2}) {
  StudyConfig c;
  c.mode = mode;
  c.nu = nu;
  c.decomposition = decomposition;
  c.n0 = std::move(n0);
  StudyResult r = run_study(c);
  if (r.failure) throw NumericalError("study failed: " + *r.failure);
  return r;
}

void check_identity(Outcome& o, const std::vector<ConvergenceRecord>& recs, const std::string& label) {
  for (const ConvergenceRecord& r : recs) {
    const double lhs = r.theta * r.theta;
    const double split = r.estim1 * r.estim1 + 2.0 * r.nu * r.theta2 * r.theta2;
    o.require(std::abs(lhs - split) <= 1e-12 * lhs,
              label + " step " + std::to_string(r.step) + fmt(": mismatch %.3g", std::abs(lhs - split) / lhs));
  }
}

Outcome uniform_rates(const StudyResult& r, const std::string& label) {
  Outcome o;
  const auto N = dofs(r.records);
  const double s_theta = loglog_slope(N, column(r.records, &ConvergenceRecord::theta), 3);
  const double s_total = loglog_slope(N, column(r.records, &ConvergenceRecord::total_error), 3);
  o.detail = label + fmt(": slope theta %.4f, total error %.4f", s_theta, s_total) +
             fmt(", N up to %.0f (fine %.0f)", N.back(), static_cast<double>(r.records.back().N_fine));
  o.require(s_theta >= -0.33 && s_theta <= -0.17, "theta slope outside [-0.33, -0.17]");
  o.require(s_total >= -0.33 && s_total <= -0.17, "total error slope outside [-0.33, -0.17]");
  o.require(r.extrapolation.reliable, "energy extrapolation unreliable");
  return o;
}

Outcome adaptive_rate(const StudyResult& r, const std::string& label) {
  Outcome o;
  const auto N = dofs(r.records);
  const double s = loglog_slope(N, column(r.records, &ConvergenceRecord::theta), 4);
  o.detail = label + fmt(": %.0f steps, slope theta over the last 4 %.4f", static_cast<double>(r.records.size()), s);
  o.require(r.records.size() >= 12, "fewer than 12 steps");
  o.require(s <= -0.38, "slope above -0.38");
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "nbem");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream log, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), log, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

}  // namespace

int main() {
  const QuadConfig acc = QuadConfig::accurate();

  criterion(1, "quadrature oracles", [&] {
    Outcome o;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_point = 0.0;
    for (int k = 0; k < 50; ++k) {
      const Triangle t = oracle::random_triangle(rng);
      Point x;
      switch (k % 5) {
        case 0: x = t.v[k % 3]; break;
        case 1: {
          const double s = u(rng);
          x = (1 - s) * t.v[k % 3] + s * t.v[(k + 1) % 3];
          break;
        }
        case 2: x = t.map(0.8 * u(rng) * 0.5, 0.8 * u(rng) * 0.5); break;
        case 3: x = t.centroid() + Point(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0); break;
        default: x = t.v[0] + 3.0 * Point(u(rng), u(rng)); break;
      }
      worst_point = std::max(worst_point, rel(newton_potential_triangle(t, x), oracle::newton_oracle(t, x)));
    }
    o.require(worst_point <= 1e-8, "Newton potential off by " + fmt("%.3g", worst_point));

    double worst_touch = 0.0, worst_far = 0.0;
    for (int k = 0; k < 4; ++k) {
      const Triangle a = oracle::random_triangle(rng);
      worst_touch = std::max(worst_touch, rel(pair_potential(a, a, acc), oracle::self_pair(a)));
      worst_touch = std::max(worst_touch, rel(pair_potential(a, a, acc), oracle::pair_richardson(a, a)));
      // reflect the third corner across edge v0-v1 for an edge neighbour
      const Point e = a.v[1] - a.v[0];
      const Point w = a.v[2] - a.v[0];
      const Point mirrored = a.v[0] + 2.0 * (w.dot(e) / e.squaredNorm()) * e - w;
      const Triangle edge{{a.v[1], a.v[0], mirrored}};
      worst_touch = std::max(worst_touch, rel(pair_potential(a, edge, acc), oracle::pair_richardson(a, edge)));
      const Triangle vert{{a.v[2], a.v[2] + (a.v[2] - a.v[0]), a.v[2] + (a.v[2] - a.v[1])}};
      worst_touch = std::max(worst_touch, rel(pair_potential(a, vert, acc), oracle::pair_richardson(a, vert)));
      for (double shift : {0.3, 4.0}) {
        Triangle b = a;
        const Point d = Point(a.diameter() + shift, 0.25);
        for (Point& p : b.v) p += d;
        worst_far = std::max(worst_far, rel(pair_potential(a, b, acc), oracle::pair_subdivided(a, b, 4, 10)));
      }
    }
    o.require(worst_touch <= 1e-5, "touching pair off by " + fmt("%.3g", worst_touch));
    o.require(worst_far <= 1e-8, "disjoint pair off by " + fmt("%.3g", worst_far));
    o.detail = fmt("worst relative error %.2e (points), ", worst_point) +
               fmt("%.2e (touching pairs), %.2e (disjoint pairs)", worst_touch, worst_far) +
               (o.detail.empty() ? "" : "; " + o.detail);
    return o;
  });

  criterion(2, "bilinear form identities", [&] {
    Outcome o;
    const Decomposition d = Decomposition::build({{Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)},
                                                  {Point(1, 0), Point(2, 0), Point(2, 1), Point(1, 1)}});
    const Mesh m = Mesh::initial(d, std::vector<int>{4, 6});
    const DofMap dm(m, d);
    const double nu = 100.0;
    const SystemBlocks blk = assemble_blocks(m, dm, build_skeleton_partition(m, d), Density::uniform(1.0), acc);
    const Eigen::MatrixXd A = assemble_system(blk, nu);
    const Eigen::MatrixXd M(blk.M);
    std::mt19937_64 rng(7);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd v = random_vector(dm.size(), rng);
      const double split = v.dot(blk.AV * v) + nu * v.dot(M * v);
      worst = std::max(worst, rel(v.dot(A * v), split));
    }
    const double normAV = blk.AV.norm();
    const double asymV = (blk.AV - blk.AV.transpose()).cwiseAbs().maxCoeff();
    const double asymM = (M - M.transpose()).cwiseAbs().maxCoeff();
    const double eigV = min_eigenvalue(blk.AV), eigM = min_eigenvalue(M);
    o.detail = "N = " + std::to_string(dm.size()) + fmt(", worst split error %.2e", worst) +
               fmt(", min eigenvalues %.3g (A_V) and %.3g (M)", eigV, eigM);
    o.require(worst <= 1e-12, "quadratic form does not split");
    o.require(asymV <= 1e-15 * normAV && asymM <= 1e-15 * M.norm(), "asymmetric block");
    o.require(eigV >= -1e-10 * normAV && eigM >= -1e-10 * normAV, "block not positive semidefinite");
    return o;
  });

  criterion(3, "Galerkin nesting", [&] {
    Outcome o;
    const Decomposition d = Decomposition::four_square();
    Mesh adaptive = Mesh::initial(d, 2);
    for (int e : {0, 5, 17}) adaptive = adaptive.refine_adaptive({e});
    const std::vector<Mesh> meshes = {Mesh::initial(d, 2), Mesh::initial(d, 4), adaptive};
    double worst = 0.0;
    for (const Mesh& m : meshes) worst = std::max(worst, solve_pair(m, d, SolveSettings{}).galerkin_defect);
    o.detail = fmt("worst scaled defect %.2e over 3 meshes", worst);
    o.require(worst <= 1e-8, "defect above 1e-8");
    return o;
  });

  // the studies behind criteria 4 to 10
  StudyResult uni100, uni10, ad100, ad10, single;
  std::string study_error;
  const auto t_studies = std::chrono::steady_clock::now();
  try {
    uni100 = study(StudyMode::Uniform, 100.0);
    ad100 = study(StudyMode::Adaptive, 100.0);
    uni10 = study(StudyMode::Uniform, 10.0);
    ad10 = study(StudyMode::Adaptive, 10.0);
    single = study(StudyMode::Uniform, 100.0, "single", {4});
  } catch (const std::exception& e) {
    study_error = e.what();
  }
  std::cout << "# studies ran in " << fmt("%.1f s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t_studies).count())
            << std::endl;
  auto guarded = [&](auto body) {
    return [&, body] {
      if (!study_error.empty()) {
        Outcome o;
        o.require(false, study_error);
        return o;
      }
      return body();
    };
  };

  criterion(4, "estimator decomposition", guarded([&] {
    Outcome o;
    int steps = 0;
    for (const auto* r : {&uni100, &uni10, &ad100, &ad10, &single}) {
      check_identity(o, r->records, "study");
      steps += static_cast<int>(r->records.size());
    }
    if (o.pass) o.detail = std::to_string(steps) + " steps over 5 studies";
    return o;
  }));

  criterion(5, "uniform rate, nu = 100", guarded([&] { return uniform_rates(uni100, "nu = 100"); }));

  criterion(6, "adaptive rate, nu = 100", guarded([&] { return adaptive_rate(ad100, "nu = 100"); }));

  criterion(7, "nu robustness, nu = 10", guarded([&] {
    Outcome a = uniform_rates(uni10, "uniform");
    const Outcome b = adaptive_rate(ad10, "adaptive");
    a.pass = a.pass && b.pass;
    a.detail += "; " + b.detail;
    return a;
  }));

  criterion(8, "edge singularity detection", guarded([&] {
    Outcome o;
    double min_boundary = 1.0, max_ratio = 0.0;
    int checked = 0;
    for (const auto* r : {&ad100, &ad10})
      for (const MarkingInfo& mi : r->marking) {
        if (mi.step < 8) continue;
        ++checked;
        min_boundary = std::min(min_boundary, mi.boundary_fraction);
        for (std::size_t k = 0; k < mi.interface_marked_share.size(); ++k)
          max_ratio = std::max(max_ratio, mi.interface_marked_share[k] / mi.interface_area_share[k]);
      }
    o.detail = std::to_string(checked) + fmt(" marking steps, boundary fraction >= %.3f", min_boundary) +
               fmt(", largest interface share ratio %.3f", max_ratio);
    o.require(checked > 0, "no marking step >= 8");
    o.require(min_boundary > 0.5, "boundary fraction at most 0.5");
    o.require(max_ratio <= 3.0, "interface share ratio above 3");
    return o;
  }));

  criterion(9, "efficiency band", guarded([&] {
    Outcome o;
    double lo = 1e300, hi = 0.0;
    for (std::size_t k = 1; k < uni100.records.size(); ++k) {
      const ConvergenceRecord& r = uni100.records[k];
      const double ratio = (r.estim1 + r.estim2) / r.total_error;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    o.detail = fmt("ratio between %.3f and %.3f", lo, hi);
    o.require(hi / lo <= 5.0, "ratio varies by more than 5");
    return o;
  }));

  criterion(10, "conforming limit", guarded([&] {
    Outcome o;
    const auto& recs = single.records;
    for (std::size_t k = 0; k < recs.size(); ++k) {
      o.require(recs[k].error2 == 0.0 && recs[k].estim2 == 0.0, "nonzero jump terms");
      if (k > 0) o.require(recs[k].energy > recs[k - 1].energy, "energy not increasing");
    }
    const Decomposition d = Decomposition::single_square();
    const Mesh m = Mesh::initial(d, 4);
    const DofMap dm(m, d);
    const Eigen::MatrixXd A =
        assemble_system(assemble_blocks(m, dm, build_skeleton_partition(m, d), Density::uniform(1.0), acc), 100.0);
    o.require((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0, "A not symmetric");
    const double s = loglog_slope(dofs(recs), column(recs, &ConvergenceRecord::theta), 3);
    o.require(s >= -0.33 && s <= -0.17, "theta slope outside [-0.33, -0.17]");
    o.detail = fmt("slope theta %.4f", s) + (o.detail.empty() ? "" : "; " + o.detail);
    return o;
  }));

  criterion(11, "marking properties", [&] {
    Outcome o;
    std::mt19937_64 rng(99);
    std::lognormal_distribution<double> mag(0.0, 3.0);
    std::uniform_real_distribution<double> dd(0.01, 1.0);
    int bad_min = 0, bad_mono = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 500);
      std::vector<double> t(n);
      for (double& x : t) x = trial % 7 == 0 ? std::floor(4.0 * dd(rng)) + 1.0 : mag(rng);  // some ties
      double d1 = dd(rng), d2 = dd(rng);
      if (d1 > d2) std::swap(d1, d2);
      const auto m1 = doerfler_mark(t, d1), m2 = doerfler_mark(t, d2);
      double total = 0.0;
      for (double x : t) total += x;
      for (const auto& [m, delta] : {std::pair{m1, d1}, std::pair{m2, d2}}) {
        double s = 0.0;
        for (int k : m) s += t[k];
        const bool reaches = s >= delta * delta * total * (1.0 - 1e-14);
        const bool minimal = s - t[m.back()] < delta * delta * total;
        bool largest = true;
        std::vector<bool> in(n, false);
        for (int k : m) in[k] = true;
        for (int k = 0; k < n; ++k)
          if (!in[k] && t[k] > t[m.back()]) largest = false;
        if (!(reaches && minimal && largest)) ++bad_min;
      }
      if (!(m1.size() <= m2.size() && std::equal(m1.begin(), m1.end(), m2.begin()))) ++bad_mono;
    }
    o.detail = "1000 fields, " + std::to_string(bad_min) + " minimality and " + std::to_string(bad_mono) +
               " monotonicity violations";
    o.require(bad_min == 0 && bad_mono == 0, "violations found");
    return o;
  });

  criterion(12, "determinism", [&] {
    Outcome o;
    const fs::path dir = fs::temp_directory_path() / "nbem_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string a = (dir / "a.csv").string(), b = (dir / "b.csv").string();
    o.require(cli({"--out", a}) == 0, "first run failed");
    o.require(cli({"--out", b}) == 0, "second run failed");
    const std::string ta = slurp(a), tb = slurp(b);
    o.require(!ta.empty() && ta == tb, "CSV files differ");
    std::ostringstream lib;
    write_records(lib, uni100.records);
    o.require(study_error.empty() && lib.str() == ta, "library run differs from the command line run");
    o.detail = std::to_string(ta.size()) + " bytes, two command line runs and one library run" +
               (o.detail.empty() ? "" : "; " + o.detail);
    fs::remove_all(dir);
    return o;
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
