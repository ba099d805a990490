#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nbem/solve.hpp"

namespace nbem {

/// Local indicators theta_T^2 on the coarse mesh, split into the curl part
/// h_T ||curl d||^2_T and the jump part nu ||[d]||^2 on the skeleton edges of T,
/// where d = P u_h - u_{h/2}.
struct IndicatorField {
  std::vector<double> curl_part;
  std::vector<double> jump_part;
  double nu = 0.0;
  double theta_sq = 0.0;  // sum of all theta_T^2
  double theta1 = 0.0;    // ||h^{1/2} curl d||
  double theta2 = 0.0;    // ||[d]|| on the skeleton (no sqrt(nu))

  std::vector<double> theta_sq_per_element() const;
};

/// `d` holds fine-space coefficients of P u_h - u_{h/2}; `fine` must be the
/// red refinement of `coarse`.
IndicatorField compute_indicators(const Mesh& coarse, const Mesh& fine, const DofMap& fine_dofs,
                                  const SkeletonPartition& fine_skeleton, const Eigen::VectorXd& d, double nu);
IndicatorField compute_indicators(const SolvePair& p, double nu);

struct GlobalEstimators {
  double theta = 0.0;
  double theta1 = 0.0;
  double theta2 = 0.0;
};

/// Throws NumericalError if theta^2 != theta1^2 + 2 nu theta2^2 (1e-12 relative).
GlobalEstimators compute_global_estimators(const IndicatorField& f);

/// <f, u_h> integrated elementwise.
double energy_value(const DiscreteFunction& u, const Density& f);

struct Extrapolation {
  double value = 0.0;
  double beta = 0.0;
  double C = 0.0;
  bool reliable = false;
  bool converged = false;
};

/// Fits E_inf - E_k = C N_k^{-beta} through the last three (N_k, E_k). An
/// oscillating or non-contracting tail is flagged unreliable and the last
/// energy is returned.
Extrapolation extrapolate_energy(const std::vector<double>& N, const std::vector<double>& E);

struct TotalError {
  double total = 0.0;
  double error1 = 0.0;
  double error2 = 0.0;
};

/// error1 = |E_ex - <f,u_h>|^{1/2}, error2 = sqrt(nu) ||[u_h]||, total^2 = error1^2 + error2^2.
TotalError total_error(double energy, double extrapolated, double jump_sq, double nu);

struct ConvergenceRecord {
  int step = 0;
  std::string kind;
  long N = 0;
  long N_fine = 0;
  double energy = 0.0;
  double energy_fine = 0.0;
  double error1 = 0.0;
  double error2 = 0.0;
  double estim1 = 0.0;  // theta1
  double estim2 = 0.0;  // sqrt(nu) theta2
  double theta = 0.0;
  double total_error = 0.0;
  double nu = 0.0;
  double jump_sq = 0.0;  // ||[u_h]||^2
  double theta2 = 0.0;   // ||[u_h - u_{h/2}]||
  double galerkin_defect = 0.0;
  double rcond = 0.0;
};

inline constexpr const char* kCsvHeader = "step,kind,N,energy,error1,error2,estim1,estim2,theta,total_error";

/// Header line plus one row per record, floats with 17 significant digits.
void write_records(std::ostream& out, const std::vector<ConvergenceRecord>& records);
/// Refuses an empty history without touching the file system.
void write_records(const std::string& path, const std::vector<ConvergenceRecord>& records);
std::vector<ConvergenceRecord> read_records(std::istream& in);

}  // namespace nbem
