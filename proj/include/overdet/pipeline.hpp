#pragma once

#include <optional>
#include <string>
#include <vector>

#include "overdet/pullback.hpp"

namespace overdet {

// Pinned acceptance tolerances. Every verification gate in the pipeline, the
// CLI and the acceptance suite reads these constants.
namespace tolerances {
inline constexpr double linear_r1 = 1e-9;          // |r_1 - pi|, oracle mode
inline constexpr double linear_mu = 1e-8;          // |mu_m - tan-root|, oracle mode
inline constexpr double origin_fit = 1e-8;         // |fitted u''(0) + 1/N|
inline constexpr double identity_rel = 1e-6;       // negativity identity discrepancy
inline constexpr double curvature_closed_form = 1e-8;  // |U''(1) + mu^2 |c|^{p-2} c|
inline constexpr double gamma_backends = 1e-6;     // collocation vs Richardson fd
inline constexpr double delta_backends = 1e-5;
inline constexpr double kernel_ratio_min = 3.5;    // residual decrease per doubling
inline constexpr double kernel_floor = 1e-10;
inline constexpr double slope_lo = 1.8;            // residual scaling window
inline constexpr double slope_hi = 2.2;
inline constexpr double boundary_residual = 1e-12;
inline constexpr double transversality_fd = 1e-6;
inline constexpr double covariance_rel = 1e-10;
}  // namespace tolerances

struct PipelineConfig {
  ProblemParams params;
  int k = 4;          // branches m = 1 .. k-2
  int n_radial = 257;
  int L = 16;
  int n_x = 64;
  int j_max = 8;
  int l_max = 10;
  std::vector<double> s_sweep = {0.031622776601683791, 0.01, 0.0031622776601683794, 0.001,
                                 0.00031622776601683794};
  std::vector<EigenBackend> backends = {EigenBackend::collocation,
                                        EigenBackend::finite_difference};
  // doubling chain for Richardson; the cusp of |U|^{p-2} leaves only an O(h^3)
  // post-extrapolation residue, so the chain starts high
  std::vector<int> fd_resolutions = {2049, 4097, 8193};
  // chain for convergence_sweep; kept moderate because the sweep also runs
  // the dense collocation eigensolve at every resolution
  std::vector<int> sweep_resolutions = {129, 257, 513, 1025};
  std::string output_dir = ".";
  bool run_scaling = true;

  void validate() const;
  bool has_backend(EigenBackend b) const;
};

struct BranchReport {
  int m = 0;
  std::string error;  // failure kind and message; empty on success
  BifurcationDatum datum;
  IdentityReport identity;
  TransversalityReport transversality;
  ScalingReport scaling;
  bool kernel_simplicity = false;
  double kernel_residual = 0;  // fd backend at n_radial
  // backend equivalence (Richardson-extrapolated finite differences)
  double gamma_fd_extrapolated = 0;
  double delta_fd_extrapolated = 0;
  double gamma_backend_dev = 0;
  double delta_backend_dev = 0;

  bool pass_lambda_positive = false;
  bool pass_curvature = false;
  bool pass_identity = false;
  bool pass_kernel_simplicity = false;
  bool pass_transversality = false;
  bool pass_backends = false;
  bool pass_slope = false;
  bool pass_boundary = false;
  bool passes() const;
  /// Name of the first failing check (tolerance owner), empty when all pass.
  std::string first_failure() const;
};

/// End-to-end run: for every m in 1..k-2 build the profile, solve the
/// spectrum, assemble the bifurcation datum and run all verification
/// operations. Branch failures are collected per branch, not fatal to
/// siblings; mu_m is asserted strictly increasing across branches.
std::vector<BranchReport> run_pipeline(const PipelineConfig& config);

struct ConvergenceRow {
  int m = 0;
  int resolution = 0;
  std::string backend;
  double lambda = 0, delta = 0, beta = 0;
  double kernel_residual = 0;
};
struct ConvergenceSummary {
  int m = 0;
  double lambda_extrapolated = 0, delta_extrapolated = 0;
  double order_lambda = 0, order_delta = 0;  // observed fd convergence orders
};
struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<ConvergenceSummary> fd_summaries;
};

/// (lambda_m, delta_m, beta_m, kernel residual) per resolution and backend,
/// with Richardson limits and observed orders for the fd backend. Resolutions
/// must be a doubling chain of length >= 3, each >= 33.
ConvergenceTable convergence_sweep(const PipelineConfig& config,
                                   const std::vector<int>& resolutions);

}  // namespace overdet
