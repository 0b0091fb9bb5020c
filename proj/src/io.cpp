#include "overdet/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "overdet/errors.hpp"

namespace overdet {

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

// Deterministic JSON writer: fields appear in insertion order, doubles in
// fixed 17-digit form, no whitespace variance.
class JsonWriter {
public:
  JsonWriter& begin() { return raw("{"), *this; }
  std::string end() {
    raw("}");
    return out_;
  }
  JsonWriter& field(const std::string& k, double v) { return keyed(k, fmt_double(v)); }
  JsonWriter& field(const std::string& k, int v) { return keyed(k, std::to_string(v)); }
  JsonWriter& field(const std::string& k, bool v) { return keyed(k, v ? "true" : "false"); }
  JsonWriter& field(const std::string& k, const std::string& v) {
    return keyed(k, "\"" + json_escape(v) + "\"");
  }
  JsonWriter& field(const std::string& k, const std::vector<double>& v) {
    std::string arr = "[";
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) arr += ",";
      arr += fmt_double(v[i]);
    }
    arr += "]";
    return keyed(k, arr);
  }
  /// nested object serialized by sub (must be a complete JSON value)
  JsonWriter& field_raw(const std::string& k, const std::string& sub) { return keyed(k, sub); }

private:
  JsonWriter& keyed(const std::string& k, const std::string& v) {
    if (need_comma_) out_ += ",";
    out_ += "\"" + json_escape(k) + "\":" + v;
    need_comma_ = true;
    return *this;
  }
  void raw(const char* s) { out_ += s; }
  std::string out_;
  bool need_comma_ = false;
};

std::string params_json(const ProblemParams& p) {
  JsonWriter w;
  w.begin();
  w.field("N", p.N)
      .field("p", p.p)
      .field("r_max", p.r_max)
      .field("tol_ode", p.tol_ode)
      .field("tol_root", p.tol_root)
      .field("oracle_mode", p.oracle_mode);
  return w.end();
}

std::string identity_json(const IdentityReport& r) {
  JsonWriter w;
  w.begin();
  w.field("lhs_cc", r.lhs_cc)
      .field("rhs_cc", r.rhs_cc)
      .field("lhs_simpson", r.lhs_simpson)
      .field("rhs_simpson", r.rhs_simpson)
      .field("rel_discrepancy_cc", r.rel_discrepancy_cc)
      .field("rel_discrepancy_simpson", r.rel_discrepancy_simpson)
      .field("max_rel_discrepancy", r.max_rel_discrepancy)
      .field("omega_N", r.omega_N)
      .field("rhs_negative", r.rhs_negative);
  return w.end();
}

std::string transversality_json(const TransversalityReport& r) {
  JsonWriter w;
  w.begin();
  w.field("pairing", r.pairing).field("fd_vs_exact_sup", r.fd_vs_exact_sup);
  return w.end();
}

std::string scaling_json(const ScalingRecord& r) {
  JsonWriter w;
  w.begin();
  w.field("s", r.s)
      .field("residual_interior", r.residual_interior)
      .field("residual_boundary", r.residual_boundary)
      .field("pairwise_slopes", r.pairwise_slopes)
      .field("slope", r.slope);
  return w.end();
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

using nlohmann::json;

ProblemParams params_from(const json& j) {
  ProblemParams p;
  p.N = j.at("N").get<int>();
  p.p = j.at("p").get<double>();
  p.r_max = j.at("r_max").get<double>();
  p.tol_ode = j.at("tol_ode").get<double>();
  p.tol_root = j.at("tol_root").get<double>();
  p.oracle_mode = j.at("oracle_mode").get<bool>();
  return p;
}

IdentityReport identity_from(const json& j) {
  IdentityReport r;
  r.lhs_cc = j.at("lhs_cc").get<double>();
  r.rhs_cc = j.at("rhs_cc").get<double>();
  r.lhs_simpson = j.at("lhs_simpson").get<double>();
  r.rhs_simpson = j.at("rhs_simpson").get<double>();
  r.rel_discrepancy_cc = j.at("rel_discrepancy_cc").get<double>();
  r.rel_discrepancy_simpson = j.at("rel_discrepancy_simpson").get<double>();
  r.max_rel_discrepancy = j.at("max_rel_discrepancy").get<double>();
  r.omega_N = j.at("omega_N").get<double>();
  r.rhs_negative = j.at("rhs_negative").get<bool>();
  return r;
}

ScalingRecord scaling_from(const json& j) {
  ScalingRecord r;
  r.s = j.at("s").get<std::vector<double>>();
  r.residual_interior = j.at("residual_interior").get<std::vector<double>>();
  r.residual_boundary = j.at("residual_boundary").get<std::vector<double>>();
  r.pairwise_slopes = j.at("pairwise_slopes").get<std::vector<double>>();
  r.slope = j.at("slope").get<double>();
  return r;
}

DatumRecord datum_from(const json& j) {
  DatumRecord r;
  r.N = j.at("N").get<int>();
  r.p = j.at("p").get<double>();
  r.m = j.at("m").get<int>();
  r.mu_m = j.at("mu_m").get<double>();
  r.lambda_m = j.at("lambda_m").get<double>();
  r.c_m = j.at("c_m").get<double>();
  r.delta_m = j.at("delta_m").get<double>();
  r.beta_m = j.at("beta_m").get<double>();
  r.gamma_spectrum = j.at("gamma_spectrum").get<std::vector<double>>();
  r.normalization = j.at("normalization").get<std::string>();
  return r;
}

}  // namespace

bool operator==(const ProblemParams& a, const ProblemParams& b) {
  return a.N == b.N && a.p == b.p && a.r_max == b.r_max && a.tol_ode == b.tol_ode &&
         a.tol_root == b.tol_root && a.oracle_mode == b.oracle_mode;
}

bool operator==(const IdentityReport& a, const IdentityReport& b) {
  return a.lhs_cc == b.lhs_cc && a.rhs_cc == b.rhs_cc && a.lhs_simpson == b.lhs_simpson &&
         a.rhs_simpson == b.rhs_simpson && a.rel_discrepancy_cc == b.rel_discrepancy_cc &&
         a.rel_discrepancy_simpson == b.rel_discrepancy_simpson &&
         a.max_rel_discrepancy == b.max_rel_discrepancy && a.omega_N == b.omega_N &&
         a.rhs_negative == b.rhs_negative;
}

bool operator==(const TransversalityReport& a, const TransversalityReport& b) {
  return a.pairing == b.pairing && a.fd_vs_exact_sup == b.fd_vs_exact_sup;
}

TrajectoryRecord to_record(const OdeSolution& sol) {
  TrajectoryRecord r;
  r.params = sol.params;
  r.nodes = to_std(sol.nodes);
  r.u = to_std(sol.u_values);
  r.du = to_std(sol.du_values);
  r.zeros = sol.zeros;
  for (const auto& c : sol.criticals) {
    r.critical_points.push_back(c.r);
    r.u_at_critical.push_back(c.u);
  }
  return r;
}

ProfileRecord to_record(const RadialProfile& prof) {
  ProfileRecord r;
  r.m = prof.m;
  r.mu_m = prof.mu_m;
  r.c_m = prof.c_m;
  r.d2U_at_1 = prof.d2U_at_1;
  r.params = prof.sol->params;
  r.nodes = to_std(prof.grid->nodes());
  r.U = to_std(prof.U);
  r.dU = to_std(prof.dU);
  r.interior_zeros = prof.interior_zeros;
  return r;
}

DatumRecord to_record(const BifurcationDatum& d) {
  DatumRecord r;
  r.N = d.N;
  r.p = d.p;
  r.m = d.m;
  r.mu_m = d.mu_m;
  r.lambda_m = d.lambda_m;
  r.c_m = d.c_m;
  r.delta_m = d.delta_m;
  r.beta_m = d.beta_m;
  r.gamma_spectrum = d.gamma_spectrum;
  r.normalization = d.normalization;
  return r;
}

ScalingRecord to_record(const ScalingReport& rep) {
  ScalingRecord r;
  r.s = rep.s;
  r.residual_interior = rep.residual_interior;
  r.residual_boundary = rep.residual_boundary;
  r.pairwise_slopes = rep.pairwise_slopes;
  r.slope = rep.slope;
  return r;
}

BranchRecord to_record(const BranchReport& rep) {
  BranchRecord r;
  r.m = rep.m;
  r.error = rep.error;
  r.datum = to_record(rep.datum);
  r.identity = rep.identity;
  r.transversality = rep.transversality;
  r.scaling = to_record(rep.scaling);
  r.kernel_simplicity = rep.kernel_simplicity;
  r.kernel_residual = rep.kernel_residual;
  r.gamma_fd_extrapolated = rep.gamma_fd_extrapolated;
  r.delta_fd_extrapolated = rep.delta_fd_extrapolated;
  r.gamma_backend_dev = rep.gamma_backend_dev;
  r.delta_backend_dev = rep.delta_backend_dev;
  r.pass_lambda_positive = rep.pass_lambda_positive;
  r.pass_curvature = rep.pass_curvature;
  r.pass_identity = rep.pass_identity;
  r.pass_kernel_simplicity = rep.pass_kernel_simplicity;
  r.pass_transversality = rep.pass_transversality;
  r.pass_backends = rep.pass_backends;
  r.pass_slope = rep.pass_slope;
  r.pass_boundary = rep.pass_boundary;
  r.first_failure = rep.first_failure();
  return r;
}

StateRecord to_record(const PerturbedState& st, double slope_context) {
  return {st.s, st.datum.lambda_m, st.residual_interior, st.residual_boundary, slope_context};
}

std::string to_json(const TrajectoryRecord& r) {
  JsonWriter w;
  w.begin();
  w.field_raw("params", params_json(r.params))
      .field("nodes", r.nodes)
      .field("u", r.u)
      .field("du", r.du)
      .field("zeros", r.zeros)
      .field("critical_points", r.critical_points)
      .field("u_at_critical", r.u_at_critical);
  return w.end();
}

std::string to_json(const ProfileRecord& r) {
  JsonWriter w;
  w.begin();
  w.field("m", r.m)
      .field("mu_m", r.mu_m)
      .field("c_m", r.c_m)
      .field("d2U_at_1", r.d2U_at_1)
      .field_raw("params", params_json(r.params))
      .field("nodes", r.nodes)
      .field("U", r.U)
      .field("dU", r.dU)
      .field("interior_zeros", r.interior_zeros);
  return w.end();
}

std::string to_json(const DatumRecord& r) {
  JsonWriter w;
  w.begin();
  w.field("N", r.N)
      .field("p", r.p)
      .field("m", r.m)
      .field("mu_m", r.mu_m)
      .field("lambda_m", r.lambda_m)
      .field("c_m", r.c_m)
      .field("delta_m", r.delta_m)
      .field("beta_m", r.beta_m)
      .field("gamma_spectrum", r.gamma_spectrum)
      .field("normalization", r.normalization);
  return w.end();
}

std::string to_json(const StateRecord& r) {
  JsonWriter w;
  w.begin();
  w.field("s", r.s)
      .field("lambda_m", r.lambda_m)
      .field("residual_interior", r.residual_interior)
      .field("residual_boundary", r.residual_boundary)
      .field("slope_context", r.slope_context);
  return w.end();
}

std::string to_json(const ScalingRecord& r) { return scaling_json(r); }

std::string to_json(const BranchRecord& r) {
  JsonWriter w;
  w.begin();
  w.field("m", r.m)
      .field("error", r.error)
      .field_raw("datum", to_json(r.datum))
      .field_raw("identity", identity_json(r.identity))
      .field_raw("transversality", transversality_json(r.transversality))
      .field_raw("scaling", scaling_json(r.scaling))
      .field("kernel_simplicity", r.kernel_simplicity)
      .field("kernel_residual", r.kernel_residual)
      .field("gamma_fd_extrapolated", r.gamma_fd_extrapolated)
      .field("delta_fd_extrapolated", r.delta_fd_extrapolated)
      .field("gamma_backend_dev", r.gamma_backend_dev)
      .field("delta_backend_dev", r.delta_backend_dev)
      .field("pass_lambda_positive", r.pass_lambda_positive)
      .field("pass_curvature", r.pass_curvature)
      .field("pass_identity", r.pass_identity)
      .field("pass_kernel_simplicity", r.pass_kernel_simplicity)
      .field("pass_transversality", r.pass_transversality)
      .field("pass_backends", r.pass_backends)
      .field("pass_slope", r.pass_slope)
      .field("pass_boundary", r.pass_boundary)
      .field("first_failure", r.first_failure);
  return w.end();
}

TrajectoryRecord trajectory_from_json(const std::string& text) {
  json j = json::parse(text);
  TrajectoryRecord r;
  r.params = params_from(j.at("params"));
  r.nodes = j.at("nodes").get<std::vector<double>>();
  r.u = j.at("u").get<std::vector<double>>();
  r.du = j.at("du").get<std::vector<double>>();
  r.zeros = j.at("zeros").get<std::vector<double>>();
  r.critical_points = j.at("critical_points").get<std::vector<double>>();
  r.u_at_critical = j.at("u_at_critical").get<std::vector<double>>();
  return r;
}

ProfileRecord profile_from_json(const std::string& text) {
  json j = json::parse(text);
  ProfileRecord r;
  r.m = j.at("m").get<int>();
  r.mu_m = j.at("mu_m").get<double>();
  r.c_m = j.at("c_m").get<double>();
  r.d2U_at_1 = j.at("d2U_at_1").get<double>();
  r.params = params_from(j.at("params"));
  r.nodes = j.at("nodes").get<std::vector<double>>();
  r.U = j.at("U").get<std::vector<double>>();
  r.dU = j.at("dU").get<std::vector<double>>();
  r.interior_zeros = j.at("interior_zeros").get<std::vector<double>>();
  return r;
}

DatumRecord datum_from_json(const std::string& text) { return datum_from(json::parse(text)); }

StateRecord state_from_json(const std::string& text) {
  json j = json::parse(text);
  StateRecord r;
  r.s = j.at("s").get<double>();
  r.lambda_m = j.at("lambda_m").get<double>();
  r.residual_interior = j.at("residual_interior").get<double>();
  r.residual_boundary = j.at("residual_boundary").get<double>();
  r.slope_context = j.at("slope_context").get<double>();
  return r;
}

ScalingRecord scaling_from_json(const std::string& text) {
  return scaling_from(json::parse(text));
}

BranchRecord branch_from_json(const std::string& text) {
  json j = json::parse(text);
  BranchRecord r;
  r.m = j.at("m").get<int>();
  r.error = j.at("error").get<std::string>();
  r.datum = datum_from(j.at("datum"));
  r.identity = identity_from(j.at("identity"));
  r.transversality.pairing = j.at("transversality").at("pairing").get<double>();
  r.transversality.fd_vs_exact_sup = j.at("transversality").at("fd_vs_exact_sup").get<double>();
  r.scaling = scaling_from(j.at("scaling"));
  r.kernel_simplicity = j.at("kernel_simplicity").get<bool>();
  r.kernel_residual = j.at("kernel_residual").get<double>();
  r.gamma_fd_extrapolated = j.at("gamma_fd_extrapolated").get<double>();
  r.delta_fd_extrapolated = j.at("delta_fd_extrapolated").get<double>();
  r.gamma_backend_dev = j.at("gamma_backend_dev").get<double>();
  r.delta_backend_dev = j.at("delta_backend_dev").get<double>();
  r.pass_lambda_positive = j.at("pass_lambda_positive").get<bool>();
  r.pass_curvature = j.at("pass_curvature").get<bool>();
  r.pass_identity = j.at("pass_identity").get<bool>();
  r.pass_kernel_simplicity = j.at("pass_kernel_simplicity").get<bool>();
  r.pass_transversality = j.at("pass_transversality").get<bool>();
  r.pass_backends = j.at("pass_backends").get<bool>();
  r.pass_slope = j.at("pass_slope").get<bool>();
  r.pass_boundary = j.at("pass_boundary").get<bool>();
  r.first_failure = j.at("first_failure").get<std::string>();
  return r;
}

namespace {

std::string csv_rows(const std::string& header,
                     const std::vector<std::vector<double>>& columns) {
  std::string out = header + "\n";
  if (columns.empty()) return out;
  const size_t n = columns[0].size();
  for (size_t i = 0; i < n; ++i) {
    for (size_t c = 0; c < columns.size(); ++c) {
      if (c) out += ",";
      out += fmt_double(columns[c][i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string trajectory_csv(const TrajectoryRecord& r) {
  return csv_rows("r,u,du", {r.nodes, r.u, r.du});
}

std::string profile_csv(const ProfileRecord& r) {
  return csv_rows("r,u,du", {r.nodes, r.U, r.dU});
}

std::string eigen_csv(const EigenPair& pair) {
  return csv_rows("r,V,dV", {{pair.r.data(), pair.r.data() + pair.r.size()},
                             {pair.V.data(), pair.V.data() + pair.V.size()},
                             {pair.dV.data(), pair.dV.data() + pair.dV.size()}});
}

std::string summary_csv(const std::vector<BranchReport>& reports) {
  // pass_flags bit order documented in schema.md:
  // lambda_positive curvature identity kernel_simplicity transversality
  // backends slope boundary
  std::string out = "m,mu_m,lambda_m,c_m,delta_m,beta_m,slope,pass_flags\n";
  for (const auto& rep : reports) {
    std::string flags;
    for (bool b : {rep.pass_lambda_positive, rep.pass_curvature, rep.pass_identity,
                   rep.pass_kernel_simplicity, rep.pass_transversality, rep.pass_backends,
                   rep.pass_slope, rep.pass_boundary})
      flags += b ? '1' : '0';
    if (!rep.error.empty()) flags = "error";
    out += std::to_string(rep.m) + "," + fmt_double(rep.datum.mu_m) + "," +
           fmt_double(rep.datum.lambda_m) + "," + fmt_double(rep.datum.c_m) + "," +
           fmt_double(rep.datum.delta_m) + "," + fmt_double(rep.datum.beta_m) + "," +
           fmt_double(rep.scaling.slope) + "," + flags + "\n";
  }
  return out;
}

std::string boundary_csv(const BoundaryCurve& c) {
  return csv_rows("x,boundary_radius,w_boundary",
                  {{c.x.data(), c.x.data() + c.x.size()},
                   {c.radius.data(), c.radius.data() + c.radius.size()},
                   {c.w_boundary.data(), c.w_boundary.data() + c.w_boundary.size()}});
}

std::string u_tilde_csv(const PerturbedState& state) {
  std::string out = "r,x,u_tilde\n";
  const Matrix phys = state.u_tilde.to_physical();
  for (int i = 0; i < phys.rows(); ++i)
    for (int k = 0; k < phys.cols(); ++k)
      out += fmt_double(state.u_tilde.grid->node(i)) + "," +
             fmt_double(state.basis->x[k]) + "," + fmt_double(phys(i, k)) + "\n";
  return out;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::string out = "m,resolution,backend,lambda,delta,beta,kernel_residual\n";
  for (const auto& r : t.rows)
    out += std::to_string(r.m) + "," + std::to_string(r.resolution) + "," + r.backend + "," +
           fmt_double(r.lambda) + "," + fmt_double(r.delta) + "," + fmt_double(r.beta) + "," +
           fmt_double(r.kernel_residual) + "\n";
  out += "m,lambda_extrapolated,delta_extrapolated,order_lambda,order_delta\n";
  for (const auto& s : t.fd_summaries)
    out += std::to_string(s.m) + "," + fmt_double(s.lambda_extrapolated) + "," +
           fmt_double(s.delta_extrapolated) + "," + fmt_double(s.order_lambda) + "," +
           fmt_double(s.order_delta) + "\n";
  return out;
}

// ---- configuration ----------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  size_t b = s.find_last_not_of(" \t\r");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double parse_double_value(const std::string& v) {
  size_t pos = 0;
  double x = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("expected a real number");
  return x;
}

int parse_int_value(const std::string& v) {
  size_t pos = 0;
  int x = std::stoi(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("expected an integer");
  return x;
}

bool parse_bool_value(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true/false");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

using Setter = std::function<void(PipelineConfig&, const std::string&)>;

const std::map<std::string, Setter>& config_schema() {
  static const std::map<std::string, Setter> schema = {
      {"N", [](PipelineConfig& c, const std::string& v) { c.params.N = parse_int_value(v); }},
      {"p", [](PipelineConfig& c, const std::string& v) { c.params.p = parse_double_value(v); }},
      {"r_max",
       [](PipelineConfig& c, const std::string& v) { c.params.r_max = parse_double_value(v); }},
      {"tol_ode",
       [](PipelineConfig& c, const std::string& v) { c.params.tol_ode = parse_double_value(v); }},
      {"tol_root",
       [](PipelineConfig& c, const std::string& v) {
         c.params.tol_root = parse_double_value(v);
       }},
      {"oracle_mode",
       [](PipelineConfig& c, const std::string& v) {
         c.params.oracle_mode = parse_bool_value(v);
       }},
      {"k", [](PipelineConfig& c, const std::string& v) { c.k = parse_int_value(v); }},
      {"n_radial",
       [](PipelineConfig& c, const std::string& v) { c.n_radial = parse_int_value(v); }},
      {"L", [](PipelineConfig& c, const std::string& v) { c.L = parse_int_value(v); }},
      {"n_x", [](PipelineConfig& c, const std::string& v) { c.n_x = parse_int_value(v); }},
      {"j_max", [](PipelineConfig& c, const std::string& v) { c.j_max = parse_int_value(v); }},
      {"l_max", [](PipelineConfig& c, const std::string& v) { c.l_max = parse_int_value(v); }},
      {"s_sweep",
       [](PipelineConfig& c, const std::string& v) {
         c.s_sweep.clear();
         for (const auto& item : split_list(v)) c.s_sweep.push_back(parse_double_value(item));
       }},
      {"fd_resolutions",
       [](PipelineConfig& c, const std::string& v) {
         c.fd_resolutions.clear();
         for (const auto& item : split_list(v))
           c.fd_resolutions.push_back(parse_int_value(item));
       }},
      {"sweep_resolutions",
       [](PipelineConfig& c, const std::string& v) {
         c.sweep_resolutions.clear();
         for (const auto& item : split_list(v))
           c.sweep_resolutions.push_back(parse_int_value(item));
       }},
      {"backends",
       [](PipelineConfig& c, const std::string& v) {
         c.backends.clear();
         for (const auto& item : split_list(v)) {
           if (item == "collocation")
             c.backends.push_back(EigenBackend::collocation);
           else if (item == "finite_difference")
             c.backends.push_back(EigenBackend::finite_difference);
           else
             throw std::invalid_argument("expected collocation|finite_difference");
         }
       }},
      {"output_dir",
       [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
      {"run_scaling",
       [](PipelineConfig& c, const std::string& v) { c.run_scaling = parse_bool_value(v); }},
  };
  return schema;
}

}  // namespace

PipelineConfig parse_config_text(const std::string& text, const std::string& origin) {
  PipelineConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    auto it = config_schema().find(key);
    if (it == config_schema().end())
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": unknown key '" + key +
                        "'");
    try {
      it->second(cfg, value);
    } catch (const std::exception& e) {
      throw ConfigError(origin + " line " + std::to_string(lineno) + ": key '" + key + "': " +
                        e.what());
    }
  }
  return cfg;
}

void apply_override(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  auto it = config_schema().find(key);
  if (it == config_schema().end()) throw ConfigError("unknown config key '" + key + "'");
  try {
    it->second(cfg, value);
  } catch (const std::exception& e) {
    throw ConfigError("key '" + key + "': " + e.what());
  }
}

std::string config_to_text(const PipelineConfig& cfg) {
  std::string out;
  out += "N = " + std::to_string(cfg.params.N) + "\n";
  out += "p = " + fmt_double(cfg.params.p) + "\n";
  out += "r_max = " + fmt_double(cfg.params.r_max) + "\n";
  out += "tol_ode = " + fmt_double(cfg.params.tol_ode) + "\n";
  out += "tol_root = " + fmt_double(cfg.params.tol_root) + "\n";
  out += std::string("oracle_mode = ") + (cfg.params.oracle_mode ? "true" : "false") + "\n";
  out += "k = " + std::to_string(cfg.k) + "\n";
  out += "n_radial = " + std::to_string(cfg.n_radial) + "\n";
  out += "L = " + std::to_string(cfg.L) + "\n";
  out += "n_x = " + std::to_string(cfg.n_x) + "\n";
  out += "j_max = " + std::to_string(cfg.j_max) + "\n";
  out += "l_max = " + std::to_string(cfg.l_max) + "\n";
  out += "s_sweep = ";
  for (size_t i = 0; i < cfg.s_sweep.size(); ++i)
    out += (i ? "," : "") + fmt_double(cfg.s_sweep[i]);
  out += "\nfd_resolutions = ";
  for (size_t i = 0; i < cfg.fd_resolutions.size(); ++i)
    out += (i ? "," : "") + std::to_string(cfg.fd_resolutions[i]);
  out += "\nsweep_resolutions = ";
  for (size_t i = 0; i < cfg.sweep_resolutions.size(); ++i)
    out += (i ? "," : "") + std::to_string(cfg.sweep_resolutions[i]);
  out += "\nbackends = ";
  for (size_t i = 0; i < cfg.backends.size(); ++i)
    out += std::string(i ? "," : "") +
           (cfg.backends[i] == EigenBackend::collocation ? "collocation" : "finite_difference");
  out += "\noutput_dir = " + cfg.output_dir + "\n";
  out += std::string("run_scaling = ") + (cfg.run_scaling ? "true" : "false") + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw OverdetError("io_error", "cannot open " + path + " for writing");
  f << content;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw OverdetError("io_error", "cannot read " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_branch_reports(const PipelineConfig& config,
                          const std::vector<BranchReport>& reports, bool want_json,
                          bool want_csv) {
  for (const auto& rep : reports) {
    if (!want_json) break;
    const std::string ms = std::to_string(rep.m);
    write_file(config.output_dir + "/branch_m" + ms + ".json", to_json(to_record(rep)));
    write_file(config.output_dir + "/datum_m" + ms + ".json", to_json(to_record(rep.datum)));
  }
  if (want_csv) write_file(config.output_dir + "/summary.csv", summary_csv(reports));
}

}  // namespace overdet
