#include "nbem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "nbem/quadrature.hpp"

namespace nbem {

std::vector<double> IndicatorField::theta_sq_per_element() const {
  std::vector<double> out(curl_part.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = curl_part[k] + jump_part[k];
  return out;
}

IndicatorField compute_indicators(const Mesh& coarse, const Mesh& fine, const DofMap& fine_dofs,
                                  const SkeletonPartition& fine_skeleton, const Eigen::VectorXd& d, double nu) {
  if (!fine.has_genealogy()) throw InputError("compute_indicators: fine mesh has no genealogy");
  IndicatorField out;
  out.nu = nu;
  out.curl_part.assign(coarse.num_elements(), 0.0);
  out.jump_part.assign(coarse.num_elements(), 0.0);
  const DiscreteFunction df{&fine, &fine_dofs, d};
  for (int e = 0; e < fine.num_elements(); ++e) {
    const Point c = df.curl(e);
    out.curl_part[fine.parent(e)] += c.squaredNorm() * fine.triangle(e).area();
  }
  double curl_sum = 0.0;
  for (int t = 0; t < coarse.num_elements(); ++t) {
    out.curl_part[t] *= coarse.h(t);
    curl_sum += out.curl_part[t];
  }
  const QuadratureRule& gl = gauss_legendre(2);
  double jump_sum = 0.0;
  for (const SkeletonSegment& g : fine_skeleton.segments) {
    const double len = (g.p1 - g.p0).norm();
    double val = 0.0;
    for (std::size_t q = 0; q < gl.size(); ++q) {
      const Point x = g.p0 + gl.nodes[q].x() * (g.p1 - g.p0);
      const TraceWeights w = jump_weights(fine, fine_dofs, g, x);
      double jump = 0.0;
      for (int a = 0; a < 4; ++a)
        if (w.dof[a] >= 0) jump += w.value[a] * d[w.dof[a]];
      val += gl.weights[q] * len * jump * jump;
    }
    jump_sum += val;
    out.jump_part[fine.parent(g.elem_i)] += nu * val;
    out.jump_part[fine.parent(g.elem_j)] += nu * val;
  }
  double total = 0.0;
  for (int t = 0; t < coarse.num_elements(); ++t) total += out.curl_part[t] + out.jump_part[t];
  out.theta_sq = total;
  out.theta1 = std::sqrt(curl_sum);
  out.theta2 = std::sqrt(jump_sum);
  return out;
}

IndicatorField compute_indicators(const SolvePair& p, double nu) {
  return compute_indicators(p.coarse->mesh, p.fine->mesh, p.fine->dofs, p.fine->skeleton, p.Pu - p.fine->u, nu);
}

GlobalEstimators compute_global_estimators(const IndicatorField& f) {
  double sum = 0.0;
  for (std::size_t k = 0; k < f.curl_part.size(); ++k) sum += f.curl_part[k] + f.jump_part[k];
  const double split = f.theta1 * f.theta1 + 2.0 * f.nu * f.theta2 * f.theta2;
  if (std::abs(sum - split) > 1e-12 * std::max(sum, split))
    throw NumericalError("estimator identity violated: theta^2 = " + std::to_string(sum) + " but theta1^2 + 2 nu theta2^2 = " +
                         std::to_string(split));
  return GlobalEstimators{std::sqrt(sum), f.theta1, f.theta2};
}

double energy_value(const DiscreteFunction& u, const Density& f) {
  const Mesh& m = *u.mesh;
  const QuadratureRule& rule = quadrature_rule(RuleKind::Triangle, 4);
  double sum = 0.0;
  for (int e = 0; e < m.num_elements(); ++e) {
    const Triangle t = m.triangle(e);
    const auto& v = m.element(e).v;
    const double u0 = u.vertex_value(v[0]), u1 = u.vertex_value(v[1]), u2 = u.vertex_value(v[2]);
    if (f.constant) {
      sum += f.value * t.area() * (u0 + u1 + u2) / 3.0;
      continue;
    }
    double s = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double xi = rule.nodes[q].x(), eta = rule.nodes[q].y();
      s += rule.weights[q] * f(t.map(xi, eta)) * ((1.0 - xi - eta) * u0 + xi * u1 + eta * u2);
    }
    sum += 2.0 * t.area() * s;
  }
  return sum;
}

Extrapolation extrapolate_energy(const std::vector<double>& N, const std::vector<double>& E) {
  if (N.size() != E.size() || N.size() < 3) throw InputError("extrapolation needs at least three levels");
  const std::size_t k = N.size() - 3;
  const double n0 = N[k], n1 = N[k + 1], n2 = N[k + 2];
  const double e0 = E[k], e1 = E[k + 1], e2 = E[k + 2];
  Extrapolation out;
  out.value = e2;
  const double d1 = e1 - e0, d2 = e2 - e1;
  const double scale = std::max({std::abs(e0), std::abs(e1), std::abs(e2), 1e-300});
  if (std::abs(d1) <= 1e-15 * scale && std::abs(d2) <= 1e-15 * scale) {
    out.converged = out.reliable = true;
    return out;
  }
  if (!(n0 < n1 && n1 < n2) || d1 * d2 <= 0.0) return out;
  const double rho = d2 / d1;
  // g(beta) = (n1^-b - n2^-b) / (n0^-b - n1^-b) decreases from g(0+) to 0
  auto g = [&](double b) { return (std::pow(n1, -b) - std::pow(n2, -b)) / (std::pow(n0, -b) - std::pow(n1, -b)); };
  const double g0 = (std::log(n2) - std::log(n1)) / (std::log(n1) - std::log(n0));
  if (rho >= g0) return out;
  double lo = 1e-12, hi = 1.0;
  while (g(hi) > rho && hi < 64.0) hi *= 2.0;
  if (g(hi) > rho) return out;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > rho ? lo : hi) = mid;
  }
  out.beta = 0.5 * (lo + hi);
  out.C = d1 / (std::pow(n0, -out.beta) - std::pow(n1, -out.beta));
  out.value = e2 + out.C * std::pow(n2, -out.beta);
  out.reliable = true;
  return out;
}

TotalError total_error(double energy, double extrapolated, double jump_sq, double nu) {
  TotalError t;
  t.error1 = std::sqrt(std::abs(extrapolated - energy));
  t.error2 = std::sqrt(nu * std::max(jump_sq, 0.0));
  t.total = std::sqrt(t.error1 * t.error1 + t.error2 * t.error2);
  return t;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_records(std::ostream& out, const std::vector<ConvergenceRecord>& records) {
  if (records.empty()) throw InputError("refusing to write an empty convergence history");
  out << kCsvHeader << '\n';
  for (const ConvergenceRecord& r : records) {
    out << r.step << ',' << r.kind << ',' << r.N << ',' << fmt(r.energy) << ',' << fmt(r.error1) << ','
        << fmt(r.error2) << ',' << fmt(r.estim1) << ',' << fmt(r.estim2) << ',' << fmt(r.theta) << ','
        << fmt(r.total_error) << '\n';
  }
}

void write_records(const std::string& path, const std::vector<ConvergenceRecord>& records) {
  if (records.empty()) throw InputError("refusing to write an empty convergence history");
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  write_records(out, records);
  if (!out) throw InputError("write to '" + path + "' failed");
}

std::vector<ConvergenceRecord> read_records(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw InputError("unexpected CSV header");
  std::vector<ConvergenceRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw InputError("malformed CSV row: " + line);
    ConvergenceRecord r;
    r.step = std::stoi(f[0]);
    r.kind = f[1];
    r.N = std::stol(f[2]);
    r.energy = std::strtod(f[3].c_str(), nullptr);
    r.error1 = std::strtod(f[4].c_str(), nullptr);
    r.error2 = std::strtod(f[5].c_str(), nullptr);
    r.estim1 = std::strtod(f[6].c_str(), nullptr);
    r.estim2 = std::strtod(f[7].c_str(), nullptr);
    r.theta = std::strtod(f[8].c_str(), nullptr);
    r.total_error = std::strtod(f[9].c_str(), nullptr);
    out.push_back(r);
  }
  return out;
}

}  // namespace nbem
