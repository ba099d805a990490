#include "nbem/quadrature.hpp"

#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

namespace nbem {

namespace {

QuadratureRule build_gauss_legendre(int n) {
  QuadratureRule rule;
  rule.kind = RuleKind::Segment;
  rule.degree = 2 * n - 1;
  rule.nodes.resize(n, Point::Zero());
  rule.weights.resize(n);
  // Newton iteration on P_n from the Chebyshev-like initial guess.
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    // store ascending on [0,1]
    rule.nodes[n - 1 - i].x() = 0.5 * (1.0 + x);
    rule.weights[n - 1 - i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

QuadratureRule symmetric_triangle(int degree) {
  QuadratureRule rule;
  rule.kind = RuleKind::Triangle;
  rule.degree = degree;
  auto add = [&](double l1, double l2, double w) {
    rule.nodes.emplace_back(l1, l2);
    rule.weights.push_back(w);
  };
  auto add_orbit21 = [&](double a, double w) {
    const double b = 1.0 - 2.0 * a;
    add(a, a, w);
    add(b, a, w);
    add(a, b, w);
  };
  switch (degree) {
    case 1:
      add(1.0 / 3.0, 1.0 / 3.0, 0.5);
      break;
    case 2:
      add_orbit21(1.0 / 6.0, 1.0 / 6.0);
      break;
    case 4:
      add_orbit21(0.44594849091596488631832925388305, 0.5 * 0.22338158967801146569500700843312);
      add_orbit21(0.091576213509770743459571463402202, 0.5 * 0.10995174365532186763832632490021);
      break;
    case 5: {
      const double s15 = std::sqrt(15.0);
      add(1.0 / 3.0, 1.0 / 3.0, 9.0 / 80.0);
      add_orbit21((6.0 - s15) / 21.0, (155.0 - s15) / 2400.0);
      add_orbit21((6.0 + s15) / 21.0, (155.0 + s15) / 2400.0);
      break;
    }
    default:
      throw InputError("no symmetric triangle rule of degree " + std::to_string(degree));
  }
  return rule;
}

QuadratureRule collapsed_triangle(int degree) {
  const int n = (degree + 2) / 2;
  const QuadratureRule jac = gauss_jacobi(n, 1);
  const QuadratureRule& leg = gauss_legendre(n);
  QuadratureRule rule;
  rule.kind = RuleKind::Triangle;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double xi = jac.nodes[i].x();
    for (int j = 0; j < n; ++j) {
      rule.nodes.emplace_back(xi, (1.0 - xi) * leg.nodes[j].x());
      rule.weights.push_back(jac.weights[i] * leg.weights[j]);
    }
  }
  return rule;
}

}  // namespace

QuadratureRule gauss_jacobi(int n, int alpha) {
  if (n < 1 || alpha < 0 || alpha > 1) throw InputError("unsupported Gauss-Jacobi request");
  // Golub-Welsch on [-1,1] with weight (1-x)^alpha, then mapped to [0,1].
  const double a = alpha, b = 0.0;
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    diag(k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a + b;
    const double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
    const double den = s * s * (s + 1.0) * (s - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  const double mu0 = std::pow(2.0, a + b + 1.0) * std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 2.0);
  QuadratureRule rule;
  rule.kind = RuleKind::Segment;
  rule.degree = 2 * n - 1;
  if (n == 1) {
    rule.nodes.emplace_back(0.5 * (1.0 + diag(0)), 0.0);
    rule.weights.push_back(mu0 / std::pow(2.0, a + 1.0));
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  Eigen::VectorXd subd = sub.head(n - 1);
  eig.computeFromTridiagonal(diag, subd, Eigen::ComputeEigenvectors);
  for (int k = 0; k < n; ++k) {
    const double x = eig.eigenvalues()(k);
    const double v0 = eig.eigenvectors()(0, k);
    rule.nodes.emplace_back(0.5 * (1.0 + x), 0.0);
    rule.weights.push_back(mu0 * v0 * v0 / std::pow(2.0, a + 1.0));
  }
  return rule;
}

const QuadratureRule& gauss_legendre(int n) {
  constexpr int kMax = 64;
  if (n < 1 || n > kMax) throw InputError("Gauss-Legendre size out of range: " + std::to_string(n));
  static std::array<std::unique_ptr<QuadratureRule>, kMax + 1> cache;
  static std::once_flag flags[kMax + 1];
  std::call_once(flags[n], [n] { cache[n] = std::make_unique<QuadratureRule>(build_gauss_legendre(n)); });
  return *cache[n];
}

const QuadratureRule& quadrature_rule(RuleKind kind, int order) {
  if (kind == RuleKind::Segment) {
    if (order < 0 || order > kMaxSegmentDegree)
      throw InputError("unsupported segment rule order " + std::to_string(order));
    return gauss_legendre(std::max(1, (order + 2) / 2));
  }
  if (order < 0 || order > kMaxTriangleDegree)
    throw InputError("unsupported triangle rule order " + std::to_string(order));
  static std::array<std::unique_ptr<QuadratureRule>, kMaxTriangleDegree + 1> cache;
  static std::once_flag flags[kMaxTriangleDegree + 1];
  std::call_once(flags[order], [order] {
    QuadratureRule rule;
    if (order <= 1)
      rule = symmetric_triangle(1);
    else if (order == 2)
      rule = symmetric_triangle(2);
    else if (order <= 4)
      rule = symmetric_triangle(4);
    else if (order == 5)
      rule = symmetric_triangle(5);
    else
      rule = collapsed_triangle(order);
    cache[order] = std::make_unique<QuadratureRule>(std::move(rule));
  });
  return *cache[order];
}

}  // namespace nbem
