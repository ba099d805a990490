#include "nbem/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

namespace nbem {

namespace {

// Raw option storage; validated and copied into the manifest afterwards.
struct Options {
  std::string mode = "uniform";
  double nu = 100.0;
  double delta = 0.5;
  std::optional<double> tol;
  int max_steps = 0;
  std::vector<int> n0 = {2};
  std::string quad_profile = "accurate";
  std::string out = "convergence.csv";
  std::string summary;
  std::vector<int> dump_mesh;
  std::string decomposition = "four-square";
  double density = 1.0;
  std::optional<double> reference_energy;
  std::string dump_solution;
};

void configure(CLI::App& app, Options& o) {
  app.description("Adaptive Nitsche domain-decomposition BEM for the hypersingular screen problem");
  app.set_config("--config", "", "Config file with one `key = value` per line; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--mode", o.mode, "uniform | adaptive")->check(CLI::IsMember({"uniform", "adaptive"}));
  app.add_option("--nu", o.nu, "Nitsche penalty weight (> 0)");
  app.add_option("--delta", o.delta, "Marking parameter in (0, 1]");
  app.add_option("--tol", o.tol, "Stop once the estimator drops below this");
  app.add_option("--max-steps", o.max_steps, "Number of levels (default 4 uniform, 14 adaptive)");
  app.add_option("--n0", o.n0, "Initial cells per sub-domain edge, one value or one per sub-domain")->delimiter(',');
  app.add_option("--quad-profile", o.quad_profile, "fast | accurate")->check(CLI::IsMember({"fast", "accurate"}));
  app.add_option("--out", o.out, "CSV output path");
  app.add_option("--summary", o.summary, "Summary output path (default <out stem>_summary.txt)");
  app.add_option("--dump-mesh", o.dump_mesh, "Steps whose mesh is written next to the CSV")->delimiter(',');
  app.add_option("--decomposition", o.decomposition, "four-square | single | file=<path>");
  app.add_option("--density", o.density, "Constant right-hand side f");
  app.add_option("--reference-energy", o.reference_energy, "Known <f,u> of the exact solution");
  app.add_option("--dump-solution", o.dump_solution, "Write each coarse solution to <prefix><step>.txt");
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return path.substr(0, dot);
  return path;
}

RunManifest finish(const Options& o, int argc, const char* const* argv, const std::string& config_path) {
  RunManifest m;
  StudyConfig& c = m.config;
  c.mode = o.mode == "adaptive" ? StudyMode::Adaptive : StudyMode::Uniform;
  c.nu = o.nu;
  c.delta = o.delta;
  c.tol = o.tol;
  c.max_steps = o.max_steps;
  c.n0 = o.n0;
  c.quad_profile = o.quad_profile;
  c.decomposition = o.decomposition;
  c.f = o.density;
  c.reference_energy = o.reference_energy;
  c.snapshot_steps = o.dump_mesh;
  c.snapshot_prefix = stem(o.out) + "_mesh_step";
  c.solution_prefix = o.dump_solution;
  if (!(c.delta > 0.0 && c.delta <= 1.0)) throw InputError("--delta must lie in (0, 1], got " + fmt(c.delta));
  if (!(c.nu > 0.0) || !std::isfinite(c.nu)) throw InputError("--nu must be positive, got " + fmt(c.nu));
  if (c.tol && !(*c.tol > 0.0)) throw InputError("--tol must be positive");
  if (o.max_steps < 0) throw InputError("--max-steps must be positive");
  for (int n : o.n0)
    if (n < 1) throw InputError("--n0 values must be at least 1");
  for (int s : o.dump_mesh)
    if (s < 0) throw InputError("--dump-mesh steps must be non-negative");
  c.validate();
  m.csv_path = o.out;
  m.summary_path = o.summary.empty() ? stem(o.out) + "_summary.txt" : o.summary;
  m.config_path = config_path;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    std::stringstream ss;
    ss << in.rdbuf();
    m.config_text = ss.str();
  }
  for (int k = 0; k < argc; ++k) m.arguments.emplace_back(argv[k]);
  return m;
}

RunManifest parse_into(CLI::App& app, Options& o, int argc, const char* const* argv) {
  configure(app, o);
  app.parse(argc, argv);
  const CLI::Option* cfg = app.get_config_ptr();
  std::string config_path;
  if (cfg && cfg->count() > 0) config_path = cfg->as<std::string>();
  return finish(o, argc, argv, config_path);
}

void write_summary(std::ostream& os, const RunManifest& m, const StudyResult& r) {
  const StudyConfig& c = m.config;
  os << "# command:";
  for (const std::string& a : m.arguments) os << ' ' << a;
  os << '\n';
  if (!m.config_path.empty()) {
    os << "# config file " << m.config_path << ":\n";
    std::istringstream lines(m.config_text);
    for (std::string line; std::getline(lines, line);) os << "#   " << line << '\n';
  }
  os << "mode = " << to_string(c.mode) << '\n';
  os << "nu = " << fmt(c.nu) << '\n';
  os << "delta = " << fmt(c.delta) << '\n';
  os << "tol = " << (c.tol ? fmt(*c.tol) : std::string("none")) << '\n';
  os << "max_steps = " << c.steps() << '\n';
  os << "n0 =";
  for (int n : c.n0) os << ' ' << n;
  os << '\n';
  os << "quad_profile = " << c.quad_profile << '\n';
  os << "decomposition = " << c.decomposition << '\n';
  os << "density = " << fmt(c.f) << '\n';
  os << "deterministic = " << (m.deterministic ? "yes" : "no") << '\n';
  os << "records = " << r.records.size() << '\n';
  if (r.reference_given) {
    os << "reference_energy = " << fmt(*c.reference_energy) << '\n';
  } else {
    os << "extrapolated_energy = " << fmt(r.extrapolation.value) << '\n';
    os << "extrapolation_rate = " << fmt(r.extrapolation.beta) << '\n';
    os << "extrapolation_reliable = " << (r.extrapolation.reliable ? "yes" : "no") << '\n';
  }
  std::vector<double> N, theta, total;
  for (const ConvergenceRecord& rec : r.records) {
    N.push_back(static_cast<double>(rec.N));
    theta.push_back(rec.theta);
    total.push_back(rec.total_error);
  }
  if (r.records.size() >= 3) {
    os << "slope_theta = " << fmt(loglog_slope(N, theta, 3)) << '\n';
    os << "slope_total_error = " << fmt(loglog_slope(N, total, 3)) << '\n';
  } else {
    os << "slope_theta = n/a\nslope_total_error = n/a\n";
  }
  double assembly = 0.0, solve = 0.0, estimate = 0.0;
  for (const StepTiming& t : r.timing) {
    assembly += t.assembly;
    solve += t.solve;
    estimate += t.estimate;
  }
  os << std::fixed << std::setprecision(3);
  os << "time_assembly = " << assembly << "\ntime_solve = " << solve << "\ntime_estimate = " << estimate << '\n';
  os << std::defaultfloat << std::setprecision(6);
  for (const MarkingInfo& mi : r.marking) {
    os << "marking step " << mi.step << ": " << mi.marked << " of " << mi.elements
       << " elements, boundary fraction " << mi.boundary_fraction << ", interface shares";
    for (std::size_t k = 0; k < mi.interface_marked_share.size(); ++k)
      os << ' ' << mi.interface_marked_share[k] << '/' << mi.interface_area_share[k];
    os << '\n';
  }
  for (const std::string& s : r.snapshots) os << "mesh_snapshot = " << s << '\n';
  if (r.failure) os << "failure = " << *r.failure << '\n';
}

}  // namespace

RunManifest parse_config(int argc, const char* const* argv) {
  CLI::App app;
  Options o;
  return parse_into(app, o, argc, argv);
}

int execute(const RunManifest& m, std::ostream& log) {
  const StudyResult r = run_study(m.config, [&](const ConvergenceRecord& rec, const StepTiming& t) {
    log << "step " << rec.step << ": N = " << rec.N << ", theta = " << rec.theta << ", energy = " << rec.energy
        << " (" << std::fixed << std::setprecision(1) << t.assembly + t.solve + t.estimate << " s)"
        << std::defaultfloat << std::setprecision(6) << std::endl;
  });
  if (!r.records.empty()) write_records(m.csv_path, r.records);
  std::ofstream summary(m.summary_path);
  if (!summary) throw InputError("cannot write '" + m.summary_path + "'");
  write_summary(summary, m, r);
  if (r.failure) {
    log << "run failed after " << r.records.size() << " step(s): " << *r.failure << std::endl;
    return 1;
  }
  return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app;
  Options o;
  RunManifest m;
  try {
    m = parse_into(app, o, argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, log, err);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return 2;
  }
  try {
    return execute(m, log);
  } catch (const InputError& e) {
    err << "error: " << e.what() << std::endl;
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << std::endl;
    return 1;
  }
}

}  // namespace nbem
