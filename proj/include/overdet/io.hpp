#pragma once

#include <string>
#include <vector>

#include "overdet/pipeline.hpp"

namespace overdet {

// Plain serialization records mirroring the JSON artifacts byte for byte.
// Numeric fields are written with 17 significant digits, so a parse/serialize
// cycle reproduces the file exactly and doubles survive bit-faithfully.

struct TrajectoryRecord {
  ProblemParams params;
  std::vector<double> nodes, u, du, zeros, critical_points, u_at_critical;
  bool operator==(const TrajectoryRecord&) const = default;
};

struct ProfileRecord {
  int m = 0;
  double mu_m = 0, c_m = 0, d2U_at_1 = 0;
  ProblemParams params;
  std::vector<double> nodes, U, dU, interior_zeros;
  bool operator==(const ProfileRecord&) const = default;
};

struct DatumRecord {
  int N = 0;
  double p = 0;
  int m = 0;
  double mu_m = 0, lambda_m = 0, c_m = 0, delta_m = 0, beta_m = 0;
  std::vector<double> gamma_spectrum;
  std::string normalization;
  bool operator==(const DatumRecord&) const = default;
};

struct StateRecord {
  double s = 0, lambda_m = 0, residual_interior = 0, residual_boundary = 0, slope_context = 0;
  bool operator==(const StateRecord&) const = default;
};

struct ScalingRecord {
  std::vector<double> s, residual_interior, residual_boundary, pairwise_slopes;
  double slope = 0;
  bool operator==(const ScalingRecord&) const = default;
};

struct BranchRecord {
  int m = 0;
  std::string error;
  DatumRecord datum;
  IdentityReport identity;
  TransversalityReport transversality;
  ScalingRecord scaling;
  bool kernel_simplicity = false;
  double kernel_residual = 0;
  double gamma_fd_extrapolated = 0, delta_fd_extrapolated = 0;
  double gamma_backend_dev = 0, delta_backend_dev = 0;
  bool pass_lambda_positive = false, pass_curvature = false, pass_identity = false,
       pass_kernel_simplicity = false, pass_transversality = false, pass_backends = false,
       pass_slope = false, pass_boundary = false;
  std::string first_failure;
  bool operator==(const BranchRecord&) const = default;
};

bool operator==(const ProblemParams& a, const ProblemParams& b);
bool operator==(const IdentityReport& a, const IdentityReport& b);
bool operator==(const TransversalityReport& a, const TransversalityReport& b);

TrajectoryRecord to_record(const OdeSolution& sol);
ProfileRecord to_record(const RadialProfile& prof);
DatumRecord to_record(const BifurcationDatum& datum);
ScalingRecord to_record(const ScalingReport& rep);
BranchRecord to_record(const BranchReport& rep);
StateRecord to_record(const PerturbedState& state, double slope_context);

std::string to_json(const TrajectoryRecord&);
std::string to_json(const ProfileRecord&);
std::string to_json(const DatumRecord&);
std::string to_json(const StateRecord&);
std::string to_json(const ScalingRecord&);
std::string to_json(const BranchRecord&);

TrajectoryRecord trajectory_from_json(const std::string&);
ProfileRecord profile_from_json(const std::string&);
DatumRecord datum_from_json(const std::string&);
StateRecord state_from_json(const std::string&);
ScalingRecord scaling_from_json(const std::string&);
BranchRecord branch_from_json(const std::string&);

// CSV artifacts (%.17g columns; schemas documented in schema.md)
std::string trajectory_csv(const TrajectoryRecord&);
std::string profile_csv(const ProfileRecord&);
std::string eigen_csv(const EigenPair&);
std::string summary_csv(const std::vector<BranchReport>&);
std::string boundary_csv(const BoundaryCurve&);
std::string u_tilde_csv(const PerturbedState&);
std::string convergence_csv(const ConvergenceTable&);

/// 17-significant-digit decimal form of a double (round-trips bit-exactly).
std::string fmt_double(double x);

// Flat key=value configuration with a typed schema; unknown keys and type
// mismatches raise ConfigError with a line/key diagnostic. CLI overrides go
// through the same schema.
PipelineConfig parse_config_text(const std::string& text, const std::string& origin = "config");
void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value);
std::string config_to_text(const PipelineConfig& cfg);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

/// One JSON report and datum per branch plus the summary CSV, written into
/// config.output_dir. want_json/want_csv select the artifact families.
void write_branch_reports(const PipelineConfig& config,
                          const std::vector<BranchReport>& reports, bool want_json = true,
                          bool want_csv = true);

}  // namespace overdet
