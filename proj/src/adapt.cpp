#include "nbem/adapt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace nbem {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mesh initial_mesh(const StudyConfig& cfg, const Decomposition& d) {
  if (cfg.n0.size() == 1) return Mesh::initial(d, cfg.n0[0]);
  return Mesh::initial(d, cfg.n0);
}

SolveSettings settings(const StudyConfig& cfg) {
  SolveSettings s;
  s.nu = cfg.nu;
  s.quad = QuadConfig::from_profile(cfg.quad_profile);
  s.f = Density::uniform(cfg.f);
  return s;
}

bool on_segment(const Point& p, const Point& a, const Point& b, double tol) {
  return point_segment_distance(p, a, b) <= tol;
}

// Everything a record needs from one solved pair.
ConvergenceRecord evaluate(int step, StudyMode mode, const SolvePair& pair, const StudyConfig& cfg,
                           const Density& f, IndicatorField& field) {
  field = compute_indicators(pair, cfg.nu);
  const GlobalEstimators g = compute_global_estimators(field);
  ConvergenceRecord r;
  r.step = step;
  r.kind = std::string(to_string(mode));
  r.N = pair.coarse->dofs.size();
  r.N_fine = pair.fine->dofs.size();
  r.energy = energy_value(pair.coarse->function(), f);
  r.energy_fine = energy_value(pair.fine->function(), f);
  r.estim1 = g.theta1;
  r.estim2 = std::sqrt(cfg.nu) * g.theta2;
  r.theta = g.theta;
  r.theta2 = g.theta2;
  r.nu = cfg.nu;
  r.jump_sq = std::max(pair.coarse->jump_squared(), 0.0);
  r.error2 = std::sqrt(cfg.nu * r.jump_sq);
  r.galerkin_defect = pair.galerkin_defect;
  r.rcond = pair.coarse->diag.rcond;
  return r;
}

void write_snapshot_file(const Mesh& m, const StudyConfig& cfg, int step, StudyResult& out) {
  if (std::find(cfg.snapshot_steps.begin(), cfg.snapshot_steps.end(), step) == cfg.snapshot_steps.end()) return;
  const std::string path = cfg.snapshot_prefix + std::to_string(step) + ".txt";
  std::ofstream os(path);
  if (!os) throw InputError("cannot write mesh snapshot '" + path + "'");
  m.write_snapshot(os);
  out.snapshots.push_back(path);
}

void write_solution_file(const Level& level, const StudyConfig& cfg, int step) {
  if (cfg.solution_prefix.empty()) return;
  const std::string path = cfg.solution_prefix + std::to_string(step) + ".txt";
  std::ofstream os(path);
  if (!os) throw InputError("cannot write solution '" + path + "'");
  write_solution(os, level);
}

// Fills error1 and total_error from the reference or extrapolated energy.
void backfill(StudyResult& out, const StudyConfig& cfg) {
  if (out.records.empty()) return;
  double reference = 0.0;
  if (cfg.reference_energy) {
    reference = *cfg.reference_energy;
    out.reference_given = true;
  } else {
    std::vector<double> N, E;
    for (const ConvergenceRecord& r : out.records) {
      N.push_back(static_cast<double>(r.N));
      E.push_back(r.energy);
    }
    N.push_back(static_cast<double>(out.records.back().N_fine));
    E.push_back(out.records.back().energy_fine);
    if (N.size() >= 3) {
      out.extrapolation = extrapolate_energy(N, E);
    } else {
      out.extrapolation.value = E.back();
    }
    reference = out.extrapolation.value;
  }
  for (ConvergenceRecord& r : out.records) {
    const TotalError t = total_error(r.energy, reference, r.jump_sq, r.nu);
    r.error1 = t.error1;
    r.error2 = t.error2;
    r.total_error = t.total;
  }
}

}  // namespace

std::string_view to_string(StudyMode m) { return m == StudyMode::Uniform ? "uniform" : "adaptive"; }

int StudyConfig::steps() const {
  if (max_steps > 0) return max_steps;
  return mode == StudyMode::Uniform ? kDefaultUniformSteps : kDefaultAdaptiveSteps;
}

void StudyConfig::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InputError("nu must be positive and finite");
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  if (tol && !(*tol > 0.0)) throw InputError("tol must be positive");
  if (max_steps < 0) throw InputError("max-steps must be positive");
  if (n0.empty()) throw InputError("n0 needs at least one value");
  for (int n : n0)
    if (n < 1) throw InputError("n0 values must be at least 1");
  if (!std::isfinite(f)) throw InputError("f must be finite");
  QuadConfig::from_profile(quad_profile);
}

std::vector<int> doerfler_mark(const std::vector<double>& theta_sq, double delta) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InputError("delta must lie in (0, 1]");
  double total = 0.0;
  for (double t : theta_sq) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw InputError("indicators must be finite and non-negative");
    total += t;
  }
  if (!(total > 0.0)) throw InputError("all indicators are zero; nothing to mark");
  std::vector<int> order(theta_sq.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return theta_sq[a] > theta_sq[b]; });
  // Sum in sorted order so the prefix sums and the threshold test agree
  // with the minimality check below.
  double sorted_total = 0.0;
  for (int e : order) sorted_total += theta_sq[e];
  const double threshold = delta * delta * sorted_total;
  std::vector<int> marked;
  double sum = 0.0, before_last = 0.0;
  for (int e : order) {
    if (sum >= threshold || theta_sq[e] == 0.0) break;
    marked.push_back(e);
    before_last = sum;
    sum += theta_sq[e];
  }
  if (sum < threshold && marked.size() < order.size() && theta_sq[order[marked.size()]] > 0.0)
    throw NumericalError("marking did not reach the threshold");
  if (before_last >= threshold)
    throw NumericalError("marked set is not minimal");
  return marked;
}

MarkingInfo marking_info(const Mesh& m, const Decomposition& d, const std::vector<int>& marked, int step) {
  MarkingInfo info;
  info.step = step;
  info.marked = static_cast<int>(marked.size());
  info.elements = m.num_elements();
  const double tol = 1e-10 * std::sqrt(d.area());
  auto touches_boundary = [&](int e) {
    for (int v : m.element(e).v)
      if (d.on_screen_boundary(m.vertex(v), tol)) return true;
    return false;
  };
  auto touches_interface = [&](int e, int k) {
    const Interface& I = d.interface(k);
    for (int v : m.element(e).v)
      if (on_segment(m.vertex(v), I.a, I.b, tol)) return true;
    return false;
  };
  int on_boundary = 0;
  double marked_area = 0.0;
  for (int e : marked) {
    if (touches_boundary(e)) ++on_boundary;
    marked_area += m.triangle(e).area();
  }
  info.boundary_fraction = marked.empty() ? 0.0 : static_cast<double>(on_boundary) / marked.size();
  const double total_area = m.area();
  for (int k = 0; k < d.num_interfaces(); ++k) {
    double mk = 0.0, ak = 0.0;
    for (int e : marked)
      if (touches_interface(e, k)) mk += m.triangle(e).area();
    for (int e = 0; e < m.num_elements(); ++e)
      if (touches_interface(e, k)) ak += m.triangle(e).area();
    info.interface_marked_share.push_back(marked_area > 0.0 ? mk / marked_area : 0.0);
    info.interface_area_share.push_back(ak / total_area);
  }
  return info;
}

StudyResult run_uniform(const StudyConfig& cfg, const RecordObserver& observer) {
  cfg.validate();
  if (cfg.mode != StudyMode::Uniform) throw InputError("run_uniform needs mode=uniform");
  const Decomposition d = Decomposition::from_description(cfg.decomposition);
  const SolveSettings s = settings(cfg);
  StudyResult out;
  Mesh mesh = initial_mesh(cfg, d);
  std::unique_ptr<Level> coarse;
  try {
    for (int step = 0; step < cfg.steps(); ++step) {
      write_snapshot_file(mesh, cfg, step, out);
      SolvePair pair = solve_pair(mesh, d, s, std::move(coarse));
      StepTiming timing{pair.coarse->assembly_seconds + pair.fine->assembly_seconds,
                        pair.coarse->solve_seconds + pair.fine->solve_seconds, 0.0};
      const auto t0 = std::chrono::steady_clock::now();
      write_solution_file(*pair.coarse, cfg, step);
      IndicatorField field;
      out.records.push_back(evaluate(step, StudyMode::Uniform, pair, cfg, s.f, field));
      timing.estimate = seconds_since(t0);
      out.timing.push_back(timing);
      if (observer) observer(out.records.back(), timing);
      if (cfg.tol && out.records.back().theta <= *cfg.tol) break;
      if (step + 1 == cfg.steps()) break;
      coarse = std::move(pair.fine);
      coarse->A = Eigen::MatrixXd();
      mesh = coarse->mesh;
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  backfill(out, cfg);
  return out;
}

StudyResult run_adaptive(const StudyConfig& cfg, const RecordObserver& observer) {
  cfg.validate();
  if (cfg.mode != StudyMode::Adaptive) throw InputError("run_adaptive needs mode=adaptive");
  const Decomposition d = Decomposition::from_description(cfg.decomposition);
  const SolveSettings s = settings(cfg);
  StudyResult out;
  Mesh mesh = initial_mesh(cfg, d);
  try {
    for (int step = 0; step < cfg.steps(); ++step) {
      write_snapshot_file(mesh, cfg, step, out);
      SolvePair pair = solve_pair(mesh, d, s);
      StepTiming timing{pair.coarse->assembly_seconds + pair.fine->assembly_seconds,
                        pair.coarse->solve_seconds + pair.fine->solve_seconds, 0.0};
      const auto t0 = std::chrono::steady_clock::now();
      write_solution_file(*pair.coarse, cfg, step);
      IndicatorField field;
      out.records.push_back(evaluate(step, StudyMode::Adaptive, pair, cfg, s.f, field));
      timing.estimate = seconds_since(t0);
      out.timing.push_back(timing);
      if (observer) observer(out.records.back(), timing);
      if (cfg.tol && out.records.back().theta <= *cfg.tol) break;
      if (step + 1 == cfg.steps()) break;
      if (!(out.records.back().theta > 0.0)) break;
      const std::vector<int> marked = doerfler_mark(field.theta_sq_per_element(), cfg.delta);
      out.marking.push_back(marking_info(mesh, d, marked, step));
      Mesh next = mesh.refine_adaptive(marked);
      mesh = std::move(next);
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
  }
  backfill(out, cfg);
  return out;
}

StudyResult run_study(const StudyConfig& cfg, const RecordObserver& observer) {
  return cfg.mode == StudyMode::Uniform ? run_uniform(cfg, observer) : run_adaptive(cfg, observer);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, int count) {
  const std::size_t n = std::min(x.size(), y.size());
  const std::size_t first = n > static_cast<std::size_t>(count) ? n - count : 0;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t k = first; k < n; ++k) {
    if (!(x[k] > 0.0) || !(y[k] > 0.0)) continue;
    const double lx = std::log(x[k]), ly = std::log(y[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (m < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = m * sxx - sx * sx;
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (m * sxy - sx * sy) / den;
}

}  // namespace nbem
