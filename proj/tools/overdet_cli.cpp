// Command-line front end: profile | spectrum | bifurcate | verify | sweep.
// Configuration comes from a flat key=value file plus typed flag overrides;
// all artifacts are written as deterministic JSON/CSV (see schema.md).

#include <cstdio>
#include <cstdlib>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "overdet/errors.hpp"
#include "overdet/io.hpp"

using namespace overdet;

namespace {

struct CliState {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;  // key, value (in flag order)
  std::string format = "both";
  std::string output_dir;
};

PipelineConfig resolve_config(const CliState& cli) {
  PipelineConfig cfg;
  if (!cli.config_path.empty())
    cfg = parse_config_text(read_file(cli.config_path), cli.config_path);
  for (const auto& [key, value] : cli.overrides) apply_override(cfg, key, value);
  // precedence: --output-dir flag > config file > OVERDET_OUTPUT_DIR > "."
  if (cfg.output_dir == ".") {
    if (const char* env = std::getenv("OVERDET_OUTPUT_DIR")) cfg.output_dir = env;
  }
  if (!cli.output_dir.empty()) cfg.output_dir = cli.output_dir;
  cfg.validate();
  return cfg;
}

std::string out_path(const PipelineConfig& cfg, const std::string& name) {
  return cfg.output_dir + "/" + name;
}

bool want_json(const CliState& c) { return c.format != "csv"; }
bool want_csv(const CliState& c) { return c.format != "json"; }

int cmd_profile(const CliState& cli) {
  PipelineConfig cfg = resolve_config(cli);
  auto sol = std::make_shared<const OdeSolution>(integrate_ivp(cfg.params));
  TrajectoryRecord traj = to_record(*sol);
  if (want_json(cli)) write_file(out_path(cfg, "trajectory.json"), to_json(traj));
  if (want_csv(cli)) write_file(out_path(cfg, "trajectory.csv"), trajectory_csv(traj));
  std::printf("trajectory: %zu zeros, %zu critical points on [0, %s]\n", sol->zeros.size(),
              sol->criticals.size(), fmt_double(cfg.params.r_max).c_str());
  if (!sol->zeros.empty()) std::printf("r_1 = %s\n", fmt_double(sol->zeros[0]).c_str());
  for (int m = 1; m <= cfg.k - 2; ++m) {
    RadialProfile prof = build_profile(sol, m, cfg.n_radial);
    ProfileRecord rec = to_record(prof);
    const std::string base = "profile_m" + std::to_string(m);
    if (want_json(cli)) write_file(out_path(cfg, base + ".json"), to_json(rec));
    if (want_csv(cli)) write_file(out_path(cfg, base + ".csv"), profile_csv(rec));
    std::printf("m=%d: mu_m = %s, c_m = %s, U''(1) = %s\n", m, fmt_double(prof.mu_m).c_str(),
                fmt_double(prof.c_m).c_str(), fmt_double(prof.d2U_at_1).c_str());
  }
  return 0;
}

int cmd_spectrum(const CliState& cli) {
  PipelineConfig cfg = resolve_config(cli);
  auto sol = std::make_shared<const OdeSolution>(integrate_ivp(cfg.params));
  for (int m = 1; m <= cfg.k - 2; ++m) {
    auto prof = std::make_shared<const RadialProfile>(build_profile(sol, m, cfg.n_radial));
    auto pot = std::make_shared<const LinearizedPotential>(make_potential(prof));
    std::string json = "{\"m\":" + std::to_string(m);
    for (EigenBackend backend : cfg.backends) {
      const char* name =
          backend == EigenBackend::collocation ? "collocation" : "finite_difference";
      auto ep = assemble_eigenproblem(pot, backend, cfg.n_radial);
      auto pairs = solve_spectrum(ep, cfg.j_max);
      json += std::string(",\"gammas_") + name + "\":[";
      std::printf("m=%d %s gammas:", m, name);
      for (size_t j = 0; j < pairs.size(); ++j) {
        json += (j ? "," : "") + fmt_double(pairs[j].gamma);
        std::printf(" %s", fmt_double(pairs[j].gamma).c_str());
      }
      json += "]";
      std::printf("\n");
      if (want_csv(cli))
        write_file(out_path(cfg, "eigen_m" + std::to_string(m) + "_" + name + ".csv"),
                   eigen_csv(pairs[0]));
    }
    json += "}";
    if (want_json(cli))
      write_file(out_path(cfg, "spectrum_m" + std::to_string(m) + ".json"), json);
  }
  return 0;
}

void write_branch_outputs(const CliState& cli, const PipelineConfig& cfg,
                          const std::vector<BranchReport>& reports) {
  write_branch_reports(cfg, reports, want_json(cli), want_csv(cli));
}

int cmd_bifurcate(const CliState& cli) {
  PipelineConfig cfg = resolve_config(cli);
  auto reports = run_pipeline(cfg);
  write_branch_outputs(cli, cfg, reports);
  int rc = 0;
  for (const auto& rep : reports) {
    if (!rep.error.empty()) {
      std::fprintf(stderr, "branch m=%d failed: %s\n", rep.m, rep.error.c_str());
      rc = 1;
      continue;
    }
    std::printf("m=%d: mu=%s lambda=%s c=%s delta=%s beta=%s\n", rep.m,
                fmt_double(rep.datum.mu_m).c_str(), fmt_double(rep.datum.lambda_m).c_str(),
                fmt_double(rep.datum.c_m).c_str(), fmt_double(rep.datum.delta_m).c_str(),
                fmt_double(rep.datum.beta_m).c_str());
  }
  return rc;
}

int cmd_verify(const CliState& cli) {
  PipelineConfig cfg = resolve_config(cli);
  auto reports = run_pipeline(cfg);
  write_branch_outputs(cli, cfg, reports);
  int rc = 0;
  for (const auto& rep : reports) {
    if (!rep.error.empty()) {
      std::fprintf(stderr, "branch m=%d failed: %s\n", rep.m, rep.error.c_str());
      rc = 1;
      continue;
    }
    auto line = [&](const char* name, bool ok, const std::string& detail) {
      std::printf("m=%d %-22s %s  %s\n", rep.m, name, ok ? "pass" : "FAIL", detail.c_str());
    };
    line("lambda_positive", rep.pass_lambda_positive,
         "lambda=" + fmt_double(rep.datum.lambda_m));
    line("boundary_curvature", rep.pass_curvature,
         "tol=" + fmt_double(tolerances::curvature_closed_form));
    line("negativity_identity", rep.pass_identity,
         "rel=" + fmt_double(rep.identity.max_rel_discrepancy) +
             " tol=" + fmt_double(tolerances::identity_rel));
    line("kernel_simplicity", rep.pass_kernel_simplicity, "l_max=" + std::to_string(cfg.l_max));
    line("transversality", rep.pass_transversality,
         "pairing=" + fmt_double(rep.transversality.pairing) +
             " fd_dev=" + fmt_double(rep.transversality.fd_vs_exact_sup));
    line("backend_equivalence", rep.pass_backends,
         "gamma_dev=" + fmt_double(rep.gamma_backend_dev) +
             " delta_dev=" + fmt_double(rep.delta_backend_dev));
    if (cfg.run_scaling) {
      line("residual_scaling", rep.pass_slope,
           "slope=" + fmt_double(rep.scaling.slope) + " window=[" +
               fmt_double(tolerances::slope_lo) + "," + fmt_double(tolerances::slope_hi) + "]");
      line("boundary_residual", rep.pass_boundary,
           "tol=" + fmt_double(tolerances::boundary_residual));
    }
    if (!rep.passes()) {
      std::fprintf(stderr, "verification failed at check '%s' (m=%d)\n",
                   rep.first_failure().c_str(), rep.m);
      rc = 1;
    }
  }
  return rc;
}

int cmd_sweep(const CliState& cli) {
  PipelineConfig cfg = resolve_config(cli);
  auto reports = run_pipeline(cfg);
  write_branch_outputs(cli, cfg, reports);
  int rc = 0;
  auto basis = make_cosine_basis(cfg.L, cfg.n_x);
  for (const auto& rep : reports) {
    if (!rep.error.empty()) {
      std::fprintf(stderr, "branch m=%d failed: %s\n", rep.m, rep.error.c_str());
      rc = 1;
      continue;
    }
    const std::string ms = std::to_string(rep.m);
    if (want_json(cli))
      write_file(out_path(cfg, "scaling_m" + ms + ".json"), to_json(to_record(rep.scaling)));
    PerturbedState state = build_first_order_state(cfg.s_sweep.front(), rep.datum, basis);
    if (want_json(cli))
      write_file(out_path(cfg, "state_m" + ms + ".json"),
                 to_json(to_record(state, rep.scaling.slope)));
    if (want_csv(cli)) {
      write_file(out_path(cfg, "boundary_m" + ms + ".csv"),
                 boundary_csv(physical_boundary(state, 256)));
      write_file(out_path(cfg, "u_tilde_m" + ms + ".csv"), u_tilde_csv(state));
    }
    std::printf("m=%d: slope = %s\n", rep.m, fmt_double(rep.scaling.slope).c_str());
    if (!rep.pass_slope) {
      std::fprintf(stderr,
                   "residual_scaling slope %s outside [%s, %s] (m=%d)\n",
                   fmt_double(rep.scaling.slope).c_str(), fmt_double(tolerances::slope_lo).c_str(),
                   fmt_double(tolerances::slope_hi).c_str(), rep.m);
      rc = 1;
    }
  }
  ConvergenceTable table = convergence_sweep(cfg, cfg.sweep_resolutions);
  if (want_csv(cli)) write_file(out_path(cfg, "convergence.csv"), convergence_csv(table));
  for (const auto& s : table.fd_summaries)
    std::printf("m=%d fd orders: lambda %.2f, delta %.2f\n", s.m, s.order_lambda, s.order_delta);
  return rc;
}

void add_common(CLI::App* sub, CliState& cli) {
  sub->add_option("--config", cli.config_path, "flat key=value configuration file");
  sub->add_option("--output-dir", cli.output_dir, "artifact directory (default: $OVERDET_OUTPUT_DIR or '.')");
  sub->add_option("--format", cli.format, "json|csv|both")
      ->check(CLI::IsMember({"json", "csv", "both"}));
  // every config key is exposed as a typed override flag
  static const std::vector<std::string> keys = {
      "N",     "p",     "r_max",   "tol_ode", "tol_root",       "k",
      "n_radial", "L",  "n_x",     "j_max",   "l_max",          "s_sweep",
      "backends", "fd_resolutions", "sweep_resolutions", "run_scaling"};
  for (const auto& key : keys) {
    sub->add_option_function<std::string>(
        "--" + key, [&cli, key](const std::string& v) { cli.overrides.emplace_back(key, v); },
        "override config key " + key);
  }
  sub->add_flag_callback(
      "--oracle-mode", [&cli]() { cli.overrides.emplace_back("oracle_mode", "true"); },
      "accept the linear limit p = 2 (oracle tests)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"overdet: bifurcation data for the overdetermined Neumann problem on B_1 x R/2piZ"};
  app.require_subcommand(1);
  CliState cli;

  std::map<std::string, int (*)(const CliState&)> dispatch = {
      {"profile", cmd_profile},   {"spectrum", cmd_spectrum}, {"bifurcate", cmd_bifurcate},
      {"verify", cmd_verify},     {"sweep", cmd_sweep}};

  for (auto& [name, fn] : dispatch) {
    CLI::App* sub = app.add_subcommand(
        name, name == std::string("profile")    ? "radial IVP, zeros, critical points, U_m"
              : name == std::string("spectrum") ? "Dirichlet spectra of the linearized operator"
              : name == std::string("bifurcate")
                  ? "bifurcation data (mu_m, lambda_m, c_m, delta_m, beta_m)"
              : name == std::string("verify") ? "kernel/transversality/identity/scaling checks"
                                              : "residual scaling and convergence sweeps");
    add_common(sub, cli);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    for (auto& [name, fn] : dispatch)
      if (app.got_subcommand(name)) return fn(cli);
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const InvalidParams& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const OverdetError& e) {
    std::fprintf(stderr, "numerical failure [%s]: %s\n", e.kind().c_str(), e.what());
    return 1;
  }
}
