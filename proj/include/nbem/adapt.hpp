#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nbem/estimator.hpp"

namespace nbem {

enum class StudyMode { Uniform, Adaptive };

std::string_view to_string(StudyMode m);

struct StudyConfig {
  StudyMode mode = StudyMode::Uniform;
  double nu = 100.0;
  double delta = 0.5;
  /// Stop once theta <= tol; no tolerance means run all steps.
  std::optional<double> tol;
  /// Number of records; 0 selects the default for the mode.
  int max_steps = 0;
  /// Initial cells per sub-domain edge: one value for all, or one per sub-domain.
  std::vector<int> n0 = {2};
  std::string quad_profile = "accurate";
  std::string decomposition = "four-square";
  /// Constant density f.
  double f = 1.0;
  /// Energy of the exact solution, if known. Otherwise it is extrapolated.
  std::optional<double> reference_energy;
  /// Steps whose coarse mesh is written to `<snapshot_prefix><step>.txt`.
  std::vector<int> snapshot_steps;
  std::string snapshot_prefix = "mesh_step";
  /// If set, every coarse solution is written to `<solution_prefix><step>.txt`.
  std::string solution_prefix;

  static constexpr int kDefaultUniformSteps = 4;
  static constexpr int kDefaultAdaptiveSteps = 14;

  int steps() const;
  /// Throws InputError naming the offending field.
  void validate() const;
};

/// Minimal prefix of the indicators sorted by decreasing value (ties by
/// ascending element id) whose sum reaches delta^2 times the total. Returned
/// in that order.
std::vector<int> doerfler_mark(const std::vector<double>& theta_sq, double delta);

/// Where the marked elements of one adaptive step sit.
struct MarkingInfo {
  int step = 0;
  int marked = 0;
  int elements = 0;
  /// Fraction of marked elements with a vertex on the screen boundary.
  double boundary_fraction = 0.0;
  /// Per interface: area share of marked elements touching it, and the area
  /// share of all elements touching it.
  std::vector<double> interface_marked_share;
  std::vector<double> interface_area_share;
};

MarkingInfo marking_info(const Mesh& m, const Decomposition& d, const std::vector<int>& marked, int step);

struct StepTiming {
  double assembly = 0.0;
  double solve = 0.0;
  double estimate = 0.0;
};

struct StudyResult {
  std::vector<ConvergenceRecord> records;
  std::vector<MarkingInfo> marking;
  std::vector<StepTiming> timing;
  std::vector<std::string> snapshots;
  Extrapolation extrapolation;
  bool reference_given = false;
  /// Set when a step failed; `records` then holds the steps completed before.
  std::optional<std::string> failure;
};

using RecordObserver = std::function<void(const ConvergenceRecord&, const StepTiming&)>;

/// Solve pair, indicators and record per level, then red refinement. The
/// energy error is backfilled once the extrapolated energy is known.
StudyResult run_uniform(const StudyConfig& cfg, const RecordObserver& observer = {});
/// Solve pair, indicators, record, stopping test, marking and NVB refinement
/// per step.
StudyResult run_adaptive(const StudyConfig& cfg, const RecordObserver& observer = {});
StudyResult run_study(const StudyConfig& cfg, const RecordObserver& observer = {});

/// Least-squares slope of log y against log x over the last `count` points
/// (NaN if fewer than two usable points).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, int count);

}  // namespace nbem
