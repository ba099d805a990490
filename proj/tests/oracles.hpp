#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's quadrature tables or singular rules; the only shared piece is
// the analytic Newton potential, which is itself checked against
// newton_oracle below.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "nbem/geometry.hpp"
#include "nbem/potential.hpp"

namespace oracle {

using nbem::Point;
using nbem::Triangle;

inline constexpr double kInvFourPi = 0.25 / std::numbers::pi;

struct Rule1D {
  std::vector<double> x;  // on [0,1]
  std::vector<double> w;
};

/// Gauss-Legendre by Newton iteration on P_n.
inline Rule1D gauss(int n) {
  Rule1D r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = 0.5 * (1.0 - z);
    r.w[i] = 1.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

/// Collapsed tensor-product Gauss rule over a triangle.
inline double integrate(const Triangle& t, const std::function<double(const Point&)>& f, int n) {
  static thread_local std::vector<Rule1D> cache(64);
  if (cache[n].x.empty()) cache[n] = gauss(n);
  const Rule1D& g = cache[n];
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = g.x[i];
    for (int j = 0; j < n; ++j) {
      const double v = g.x[j] * (1.0 - u);
      s += g.w[i] * g.w[j] * (1.0 - u) * f(t.map(u, v));
    }
  }
  return 2.0 * t.area() * s;
}

inline std::array<Triangle, 4> red(const Triangle& t) {
  const Point m01 = 0.5 * (t.v[0] + t.v[1]), m12 = 0.5 * (t.v[1] + t.v[2]), m20 = 0.5 * (t.v[2] + t.v[0]);
  return {Triangle{{t.v[0], m01, m20}}, Triangle{{m01, t.v[1], m12}}, Triangle{{m20, m12, t.v[2]}},
          Triangle{{m12, m20, m01}}};
}

namespace detail {

inline double newton_cell(const Triangle& t, const Point& x, double coarse, double rel_tol, int depth) {
  const auto kids = red(t);
  auto f = [&](const Point& y) { return 1.0 / (x - y).norm(); };
  std::array<double, 4> fine{};
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    fine[k] = integrate(kids[k], f, 8);
    sum += fine[k];
  }
  if (std::abs(sum - coarse) <= rel_tol * sum || depth >= 45) return sum;
  double out = 0.0;
  for (int k = 0; k < 4; ++k) out += newton_cell(kids[k], x, fine[k], rel_tol, depth + 1);
  return out;
}

}  // namespace detail

/// (1/4pi) int_T |x-y|^{-1} dy by hierarchical subdivision: a cell is split
/// again while it and its four children disagree beyond rel_tol, which grades
/// the cells toward x. Cells touching x never settle and stop at depth 45,
/// where they hold about 1e-14 of the integral. The triangle is shifted so
/// that x is the origin, which keeps tiny cells near x exactly representable.
inline double newton_oracle(const Triangle& t, const Point& x, double rel_tol = 1e-13) {
  const Triangle shifted{{t.v[0] - x, t.v[1] - x, t.v[2] - x}};
  const Point origin(0.0, 0.0);
  auto f = [&](const Point& y) { return 1.0 / y.norm(); };
  const double coarse = integrate(shifted, f, 8);
  return kInvFourPi * detail::newton_cell(shifted, origin, coarse, rel_tol, 0);
}

/// Outer integral over uniformly subdivided cells of `a` (depth levels),
/// inner integral analytic.
inline double pair_subdivided(const Triangle& a, const Triangle& b, int depth, int n = 6) {
  const nbem::NewtonPotential p(b);
  std::vector<Triangle> cells{a};
  for (int d = 0; d < depth; ++d) {
    std::vector<Triangle> next;
    next.reserve(cells.size() * 4);
    for (const Triangle& c : cells)
      for (const Triangle& k : red(c)) next.push_back(k);
    cells.swap(next);
  }
  double s = 0.0;
  for (const Triangle& c : cells) s += integrate(c, [&](const Point& x) { return p(x); }, n);
  return s;
}

/// Subdivision at depths 5 and 6 with one Richardson step (the error of the
/// outer rule decays like 4^{-depth} for touching pairs).
inline double pair_richardson(const Triangle& a, const Triangle& b) {
  const double g5 = pair_subdivided(a, b, 5), g6 = pair_subdivided(a, b, 6);
  return g6 + (g6 - g5) / 3.0;
}

/// G(T,T) in closed form: (1/4pi)(4A^2/3) sum_cyc (1/a) ln(((a+b)^2-c^2)/(b^2-(c-a)^2)).
inline double self_pair(const Triangle& t) {
  const double A = t.area();
  double L[3];
  for (int k = 0; k < 3; ++k) L[k] = (t.v[(k + 1) % 3] - t.v[k]).norm();
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double a = L[k], b = L[(k + 1) % 3], c = L[(k + 2) % 3];
    s += std::log(((a + b) * (a + b) - c * c) / (b * b - (c - a) * (c - a))) / a;
  }
  return kInvFourPi * 4.0 * A * A / 3.0 * s;
}

/// int_a^b g(x) ds with Gauss rules on dyadic pieces graded toward both ends.
inline double segment_graded(const Point& a, const Point& b, const std::function<double(const Point&)>& g,
                             int levels = 45, int n = 20) {
  static thread_local Rule1D rule;
  if (static_cast<int>(rule.x.size()) != n) rule = gauss(n);
  auto piece = [&](const Point& p, const Point& q) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += rule.w[i] * g(p + rule.x[i] * (q - p));
    return s * (q - p).norm();
  };
  const Point m = 0.5 * (a + b);
  double s = 0.0;
  for (int j = 0; j < levels; ++j) {
    const double h1 = std::ldexp(1.0, -j), h0 = std::ldexp(1.0, -j - 1);
    s += piece(a + h0 * (m - a), a + h1 * (m - a)) + piece(b + h0 * (m - b), b + h1 * (m - b));
  }
  return s;
}

/// int_[p0,p1] N_T(x) lambda_k(x) ds, split at the given parameters in (0,1).
inline double edge_moment(const Point& p0, const Point& p1, const Triangle& t, int k, std::vector<double> cuts = {}) {
  const nbem::NewtonPotential p(t);
  const double L2 = (p1 - p0).squaredNorm();
  auto g = [&](const Point& x) {
    const double s = (x - p0).dot(p1 - p0) / L2;
    return (k == 1 ? s : 1.0 - s) * p(x);
  };
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(1.0);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += segment_graded(p0 + cuts[i] * (p1 - p0), p0 + cuts[i + 1] * (p1 - p0), g);
  return s;
}

inline Triangle random_triangle(std::mt19937_64& rng, double min_area = 0.05) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    Triangle t{{Point(u(rng), u(rng)), Point(u(rng), u(rng)), Point(u(rng), u(rng))}};
    if (nbem::cross(t.v[1] - t.v[0], t.v[2] - t.v[0]) < 0) std::swap(t.v[1], t.v[2]);
    double minlen = 1e300;
    for (int k = 0; k < 3; ++k) minlen = std::min(minlen, (t.v[(k + 1) % 3] - t.v[k]).norm());
    if (t.area() >= min_area && minlen > 0.3) return t;
  }
}

}  // namespace oracle
