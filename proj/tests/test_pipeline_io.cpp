#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "overdet/errors.hpp"
#include "overdet/io.hpp"

using namespace overdet;

namespace {

PipelineConfig fast_config() {
  PipelineConfig cfg;
  cfg.params.N = 3;
  cfg.params.p = 3.0;
  cfg.params.r_max = 50;
  cfg.params.tol_ode = 1e-10;
  cfg.params.tol_root = 1e-13;
  cfg.k = 4;
  cfg.n_radial = 193;
  cfg.fd_resolutions = {1025, 2049, 4097};
  return cfg;
}

const std::vector<BranchReport>& shared_run() {
  static auto reports = run_pipeline(fast_config());
  return reports;
}

}  // namespace

TEST_CASE("pipeline: all branches pass at (N=3, p=3, k=4)") {
  const auto& reports = shared_run();
  REQUIRE(reports.size() == 2);
  double prev_mu = 0;
  for (const auto& rep : reports) {
    CAPTURE(rep.m);
    CAPTURE(rep.error);
    CHECK(rep.error.empty());
    CHECK(rep.passes());
    CHECK(rep.datum.mu_m > prev_mu);
    prev_mu = rep.datum.mu_m;
    CHECK(rep.datum.lambda_m > 0);
    CHECK(rep.kernel_simplicity);
    CHECK(rep.scaling.slope == doctest::Approx(2.0).epsilon(0.1));
  }
  // branch 2 has two negative eigenvalues; simplicity still unique
  int negatives = 0;
  for (double g : reports[1].datum.gamma_spectrum)
    if (g < 0) ++negatives;
  CHECK(negatives == 2);
}

TEST_CASE("pipeline passes in the planar case N = 2") {
  PipelineConfig cfg = fast_config();
  cfg.params.N = 2;
  cfg.params.r_max = 40;
  cfg.fd_resolutions = {2049, 4097, 8193};
  auto reports = run_pipeline(cfg);
  REQUIRE(reports.size() == 2);
  for (const auto& rep : reports) {
    CAPTURE(rep.m);
    CAPTURE(rep.first_failure());
    CHECK(rep.error.empty());
    CHECK(rep.passes());
  }
}

TEST_CASE("pipeline at the linear limit reproduces the tan r = r roots") {
  PipelineConfig cfg = fast_config();
  cfg.params.p = 2.0;
  cfg.params.oracle_mode = true;
  cfg.params.r_max = 12;
  cfg.run_scaling = false;
  auto reports = run_pipeline(cfg);  // k = 4 -> m = 1, 2
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].error.empty());
  CHECK(reports[1].error.empty());
  CHECK(std::abs(reports[0].datum.mu_m - 4.493409457909064) < 1e-8);
  CHECK(std::abs(reports[1].datum.mu_m - 7.725251836937707) < 1e-8);
}

TEST_CASE("pipeline: failed branch is isolated, siblings survive") {
  PipelineConfig cfg = fast_config();
  cfg.params.r_max = 15;  // mu_2 = 17.25 is outside the horizon
  cfg.run_scaling = false;
  auto reports = run_pipeline(cfg);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].error.empty());
  CHECK(reports[1].error.find("horizon_too_short") != std::string::npos);
  CHECK(reports[1].datum.lambda_m == 0);  // empty datum preserved
}

TEST_CASE("pipeline determinism: serialized reports are byte-identical") {
  PipelineConfig cfg = fast_config();
  cfg.k = 3;
  auto a = run_pipeline(cfg);
  auto b = run_pipeline(cfg);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(to_json(to_record(a[i])) == to_json(to_record(b[i])));
  CHECK(summary_csv(a) == summary_csv(b));
}

TEST_CASE("convergence sweep: second-order fd, faster collocation") {
  PipelineConfig cfg = fast_config();
  cfg.k = 3;
  cfg.run_scaling = false;
  ConvergenceTable t = convergence_sweep(cfg, {129, 257, 513});
  REQUIRE(t.fd_summaries.size() == 1);
  CHECK(t.fd_summaries[0].order_lambda > 1.7);
  CHECK(t.fd_summaries[0].order_lambda < 2.4);
  CHECK(std::abs(t.fd_summaries[0].lambda_extrapolated - 34.5738594) < 1e-5);

  double lam_colloc_129 = 0, lam_colloc_513 = 0, lam_fd_129 = 0, lam_fd_513 = 0;
  for (const auto& row : t.rows) {
    if (row.backend == "collocation" && row.resolution == 129) lam_colloc_129 = row.lambda;
    if (row.backend == "collocation" && row.resolution == 513) lam_colloc_513 = row.lambda;
    if (row.backend == "finite_difference" && row.resolution == 129) lam_fd_129 = row.lambda;
    if (row.backend == "finite_difference" && row.resolution == 513) lam_fd_513 = row.lambda;
  }
  // collocation is already converged at the coarsest level
  CHECK(std::abs(lam_colloc_129 - lam_colloc_513) * 100 <
        std::abs(lam_fd_129 - lam_fd_513));

  CHECK_THROWS_AS(convergence_sweep(cfg, {129, 257}), InvalidParams);
  CHECK_THROWS_AS(convergence_sweep(cfg, {129, 200, 400}), InvalidParams);
}

TEST_CASE("round trip: every record type") {
  const auto& reports = shared_run();
  const auto& rep = reports[0];

  ProblemParams pp = fast_config().params;
  auto sol = std::make_shared<const OdeSolution>(integrate_ivp(pp));

  TrajectoryRecord tr = to_record(*sol);
  CHECK(trajectory_from_json(to_json(tr)) == tr);
  CHECK(to_json(trajectory_from_json(to_json(tr))) == to_json(tr));

  ProfileRecord pr = to_record(*rep.datum.profile);
  CHECK(profile_from_json(to_json(pr)) == pr);
  CHECK(to_json(profile_from_json(to_json(pr))) == to_json(pr));

  DatumRecord dr = to_record(rep.datum);
  CHECK(datum_from_json(to_json(dr)) == dr);

  ScalingRecord sr = to_record(rep.scaling);
  CHECK(scaling_from_json(to_json(sr)) == sr);

  BranchRecord br = to_record(rep);
  CHECK(branch_from_json(to_json(br)) == br);

  auto basis = make_cosine_basis(16, 64);
  PerturbedState st = build_first_order_state(1e-2, rep.datum, basis);
  StateRecord strec = to_record(st, rep.scaling.slope);
  CHECK(state_from_json(to_json(strec)) == strec);
}

TEST_CASE("17-digit doubles survive the decimal round trip") {
  for (double x : {M_PI, -0.184794703836224, 1.0 / 3.0, 6.02e23, 1e-300, 0.0}) {
    CHECK(std::strtod(fmt_double(x).c_str(), nullptr) == x);
  }
}

TEST_CASE("csv artifacts") {
  const auto& reports = shared_run();
  std::string csv = summary_csv(reports);
  CHECK(csv.rfind("m,mu_m,lambda_m,c_m,delta_m,beta_m,slope,pass_flags\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 branches

  auto basis = make_cosine_basis(16, 64);
  PerturbedState st = build_first_order_state(1e-2, reports[0].datum, basis);
  std::string bcsv = boundary_csv(physical_boundary(st, 16));
  CHECK(std::count(bcsv.begin(), bcsv.end(), '\n') == 17);
  std::string ucsv = u_tilde_csv(st);
  CHECK(ucsv.rfind("r,x,u_tilde\n", 0) == 0);
}

TEST_CASE("config parsing: schema, overrides, diagnostics") {
  PipelineConfig cfg = parse_config_text(
      "# comment\n"
      "N = 2\n"
      "p = 4.5\n"
      "s_sweep = 0.1, 0.01\n"
      "backends = collocation\n"
      "run_scaling = false\n");
  CHECK(cfg.params.N == 2);
  CHECK(cfg.params.p == 4.5);
  CHECK(cfg.s_sweep == std::vector<double>{0.1, 0.01});
  CHECK(cfg.backends.size() == 1);
  CHECK_FALSE(cfg.run_scaling);

  CHECK_THROWS_WITH_AS(parse_config_text("N = 3\nzz = 1\n"),
                       doctest::Contains("line 2: unknown key 'zz'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config_text("p = abc\n"), doctest::Contains("line 1"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config_text("N - 3\n"), ConfigError);

  apply_override(cfg, "n_radial", "129");
  CHECK(cfg.n_radial == 129);
  CHECK_THROWS_AS(apply_override(cfg, "nope", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "k", "many"), ConfigError);

  // text round trip preserves the configuration
  PipelineConfig again = parse_config_text(config_to_text(cfg));
  CHECK(again.params.N == cfg.params.N);
  CHECK(again.params.p == cfg.params.p);
  CHECK(again.s_sweep == cfg.s_sweep);
  CHECK(again.n_radial == cfg.n_radial);
  CHECK(config_to_text(again) == config_to_text(cfg));
}

TEST_CASE("config validation bounds") {
  PipelineConfig cfg = fast_config();
  cfg.k = 2;
  CHECK_THROWS_AS(cfg.validate(), InvalidParams);
  cfg = fast_config();
  cfg.n_radial = 20;
  CHECK_THROWS_AS(cfg.validate(), InvalidParams);
  cfg = fast_config();
  cfg.s_sweep = {0.01, 0.1};
  CHECK_THROWS_AS(cfg.validate(), InvalidParams);
}

TEST_CASE("first_failure names the owning check") {
  BranchReport rep;
  rep.pass_lambda_positive = rep.pass_curvature = rep.pass_identity =
      rep.pass_kernel_simplicity = rep.pass_transversality = rep.pass_backends =
          rep.pass_boundary = true;
  rep.pass_slope = false;
  CHECK(rep.first_failure() == "residual_scaling");
  rep.pass_slope = true;
  CHECK(rep.first_failure().empty());
  CHECK(rep.passes());
  rep.pass_identity = false;
  CHECK(rep.first_failure() == "negativity_identity");
}

#ifdef OVERDET_CLI_PATH
namespace {

int run_cli(const std::string& args, const std::string& outdir) {
  std::filesystem::create_directories(outdir);
  std::string cmd = std::string(OVERDET_CLI_PATH) + " " + args + " --output-dir " + outdir +
                    " > " + outdir + "/stdout.txt 2> " + outdir + "/stderr.txt";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("cli: profile in oracle mode reproduces pi") {
  const std::string dir = "cli_out/profile";
  int rc = run_cli("profile --N 3 --p 2 --oracle-mode --r_max 10 --k 3 --tol_ode 1e-12", dir);
  CHECK(rc == 0);
  std::string out = read_file(dir + "/stdout.txt");
  auto pos = out.find("r_1 = ");
  REQUIRE(pos != std::string::npos);
  double r1 = std::strtod(out.c_str() + pos + 6, nullptr);
  CHECK(std::abs(r1 - M_PI) < 1e-9);
  TrajectoryRecord tr = trajectory_from_json(read_file(dir + "/trajectory.json"));
  CHECK(std::abs(tr.zeros[0] - M_PI) < 1e-9);
}

TEST_CASE("cli: bifurcate writes a two-row summary") {
  const std::string dir = "cli_out/bifurcate";
  int rc = run_cli("bifurcate --N 3 --p 3 --k 4 --n_radial 129 --fd_resolutions 1025,2049,4097",
                   dir);
  CHECK(rc == 0);
  std::string csv = read_file(dir + "/summary.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  DatumRecord d1 = datum_from_json(read_file(dir + "/datum_m1.json"));
  CHECK(d1.lambda_m == doctest::Approx(34.5738594).epsilon(1e-4));
}

TEST_CASE("cli: exit codes for config errors and numerical failures") {
  CHECK(run_cli("profile --N 3 --p 2 --k 3", "cli_out/e1") == 2);  // p=2 without oracle mode
  CHECK(run_cli("profile --nonsense 1", "cli_out/e2") == 2);
  CHECK(run_cli("bifurcate --N 3 --p 3 --k 4 --r_max 15 --n_radial 129 "
                "--fd_resolutions 1025,2049,4097 --run_scaling false",
                "cli_out/e3") == 1);  // horizon too short for m=2
  std::string err = read_file("cli_out/e3/stderr.txt");
  CHECK(err.find("horizon_too_short") != std::string::npos);
}

TEST_CASE("cli: repeated runs are byte-identical") {
  const std::string args = "bifurcate --N 3 --p 3 --k 3 --n_radial 129 "
                           "--fd_resolutions 1025,2049,4097";
  CHECK(run_cli(args, "cli_out/d1") == 0);
  CHECK(run_cli(args, "cli_out/d2") == 0);
  CHECK(read_file("cli_out/d1/branch_m1.json") == read_file("cli_out/d2/branch_m1.json"));
  CHECK(read_file("cli_out/d1/summary.csv") == read_file("cli_out/d2/summary.csv"));
}
#endif
