// Acceptance suite: runs the full battery of end-to-end certificates at their
// pinned tolerances (overdet::tolerances) and prints one pass/fail line per
// criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "oracle_lib.hpp"
#include "overdet/io.hpp"

using namespace overdet;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int id, const char* name, bool ok, const std::string& detail, double secs) {
  std::printf("[%2d] %s  %-28s %s  (%.2f s)\n", id, ok ? "PASS" : "FAIL", name, detail.c_str(),
              secs);
  if (!ok) ++failures;
}

ProblemParams params(int N, double p, double r_max, double tol_ode = 1e-11,
                     bool oracle = false) {
  ProblemParams pp;
  pp.N = N;
  pp.p = p;
  pp.r_max = r_max;
  pp.tol_ode = tol_ode;
  pp.tol_root = 1e-13;
  pp.oracle_mode = oracle;
  return pp;
}

struct Branch {
  std::shared_ptr<const RadialProfile> profile;
  std::shared_ptr<const LinearizedPotential> potential;
  std::vector<EigenPair> pairs;
  BifurcationDatum datum;
};

Branch solve_branch(std::shared_ptr<const OdeSolution> sol, int m, int n_radial, int j_max) {
  Branch b;
  b.profile = std::make_shared<const RadialProfile>(build_profile(sol, m, n_radial));
  b.potential = std::make_shared<const LinearizedPotential>(make_potential(b.profile));
  b.pairs = solve_spectrum(assemble_eigenproblem(b.potential, EigenBackend::collocation),
                           j_max);
  b.datum = bifurcation_constants(b.pairs[0], b.profile);
  for (const auto& pr : b.pairs) b.datum.gamma_spectrum.push_back(pr.gamma);
  return b;
}

}  // namespace

int main() {
  std::printf("acceptance suite: overdetermined Neumann bifurcation data\n");

  // shared (N=3, p=3) trajectory and branches
  auto sol33 = std::make_shared<const OdeSolution>(integrate_ivp(params(3, 3.0, 50)));
  Branch b1 = solve_branch(sol33, 1, 257, 8);
  Branch b2 = solve_branch(sol33, 2, 257, 8);
  auto basis = make_cosine_basis(16, 64);

  // 1. linear-limit oracle
  {
    Timer t;
    auto sol = integrate_ivp(params(3, 2.0, 10, 1e-12, true));
    const double mu1 = oracle::tan_equals_r_root(1), mu2 = oracle::tan_equals_r_root(2);
    const double e_r1 = std::abs(sol.zeros[0] - M_PI);
    const double e_mu = std::max(std::abs(sol.criticals[0].r - mu1),
                                 std::abs(sol.criticals[1].r - mu2));
    report(1, "linear_limit_oracle", e_r1 < tolerances::linear_r1 && e_mu < tolerances::linear_mu,
           "r1-pi " + fmt_double(e_r1) + ", mu dev " + fmt_double(e_mu), t.seconds());
  }

  // 2. origin regularity
  {
    Timer t;
    double worst = 0;
    for (auto [N, p, r_max] : {std::tuple{2, 4.0, 12.0}, {3, 3.0, 10.0}, {3, 4.0, 20.0}}) {
      auto sol = integrate_ivp(params(N, p, r_max, 1e-12));
      worst = std::max(worst, std::abs(fit_origin_curvature(sol) + 1.0 / N));
    }
    report(2, "origin_regularity", worst < tolerances::origin_fit,
           "max |fit + 1/N| = " + fmt_double(worst), t.seconds());
  }

  // 3. interlacing and alternation at k = 5
  {
    Timer t;
    auto sol = integrate_ivp(params(3, 3.0, 50, 1e-10));
    auto crit = locate_critical_points(sol, 3);  // k = 5 -> m = 1..3
    bool ok = sol.zeros.size() >= 4;
    for (int m = 0; m < 3 && ok; ++m) {
      ok = sol.zeros[m] < crit[m].r && crit[m].r < sol.zeros[m + 1] &&
           (crit[m].u < 0) == (m % 2 == 0);
    }
    report(3, "interlacing_alternation", ok,
           "mu = [" + fmt_double(crit[0].r) + ", " + fmt_double(crit[1].r) + ", " +
               fmt_double(crit[2].r) + "]",
           t.seconds());
  }

  // 4. ground-state negativity certificate
  {
    Timer t;
    bool ok = true;
    double worst = 0;
    for (const Branch* b : {&b1, &b2}) {
      ok = ok && b->pairs[0].gamma < 0;
      IdentityReport rep = negativity_identity_check(*b->profile, 2049);
      ok = ok && rep.rhs_negative && rep.max_rel_discrepancy <= tolerances::identity_rel;
      worst = std::max(worst, rep.max_rel_discrepancy);
    }
    report(4, "ground_state_negativity", ok,
           "gamma_1 = " + fmt_double(b1.pairs[0].gamma) + ", identity rel " + fmt_double(worst),
           t.seconds());
  }

  // 5. closed-form boundary curvature
  {
    Timer t;
    double worst = 0;
    for (const Branch* b : {&b1, &b2}) {
      const auto& pr = *b->profile;
      // dense-trajectory second derivative vs the closed form
      const double dense = pr.d2U_at(1.0);
      const double closed =
          -pr.mu_m * pr.mu_m * std::pow(std::abs(pr.c_m), pr.p - 2.0) * pr.c_m;
      worst = std::max(worst, std::abs(dense - closed));
    }
    report(5, "boundary_curvature", worst <= tolerances::curvature_closed_form,
           "max dev " + fmt_double(worst), t.seconds());
  }

  // 6. backend equivalence
  {
    Timer t;
    bool ok = true;
    double worst_g = 0, worst_d = 0;
    for (const Branch* b : {&b1, &b2}) {
      std::vector<double> g, d;
      for (int n : {2049, 4097, 8193}) {
        auto fd = assemble_eigenproblem(b->potential, EigenBackend::finite_difference, n);
        auto fp = solve_spectrum(fd, 1);
        g.push_back(fp[0].gamma);
        d.push_back(fp[0].dV_at_1 / b->profile->d2U_at_1);
      }
      const double g_rich = (4 * g[2] - g[1]) / 3;
      const double d_rich = (4 * d[2] - d[1]) / 3;
      worst_g = std::max(worst_g, std::abs(b->pairs[0].gamma - g_rich));
      worst_d = std::max(worst_d, std::abs(b->datum.delta_m - d_rich));
    }
    ok = worst_g <= tolerances::gamma_backends && worst_d <= tolerances::delta_backends;
    report(6, "backend_equivalence", ok,
           "gamma dev " + fmt_double(worst_g) + ", delta dev " + fmt_double(worst_d),
           t.seconds());
  }

  // 7. kernel residual decay (second-order backend)
  {
    Timer t;
    bool ok = true;
    std::string ratios;
    double prev = 0;
    for (int n : {129, 257, 513, 1025}) {
      auto fd = assemble_eigenproblem(b1.potential, EigenBackend::finite_difference, n);
      auto fp = solve_spectrum(fd, 1);
      const double res = fd_kernel_residual(fd, fp[0]);
      if (prev > 0 && res > tolerances::kernel_floor) {
        const double ratio = prev / res;
        ratios += fmt_double(ratio) + " ";
        ok = ok && ratio >= tolerances::kernel_ratio_min;
      }
      prev = res;
    }
    report(7, "kernel_residual_decay", ok, "ratios " + ratios, t.seconds());
  }

  // 8. kernel simplicity
  {
    Timer t;
    bool ok = true;
    for (const Branch* b : {&b1, &b2})
      ok = ok && kernel_simplicity_check(b->datum.gamma_spectrum, b->datum.lambda_m, 10);
    report(8, "kernel_simplicity", ok,
           "lambda_1 = " + fmt_double(b1.datum.lambda_m) +
               ", lambda_2 = " + fmt_double(b2.datum.lambda_m),
           t.seconds());
  }

  // 9. transversality
  {
    Timer t;
    bool ok = true;
    double worst = 0;
    for (const Branch* b : {&b1, &b2}) {
      TransversalityReport rep = transversality_check(b->datum, basis);
      ok = ok && rep.pairing < 0 && rep.fd_vs_exact_sup <= tolerances::transversality_fd;
      worst = std::max(worst, rep.fd_vs_exact_sup);
    }
    report(9, "transversality", ok, "max fd dev " + fmt_double(worst), t.seconds());
  }

  // 10. residual scaling
  {
    Timer t;
    std::vector<double> sweep = {0.031622776601683791, 0.01, 0.0031622776601683794, 0.001,
                                 0.00031622776601683794};
    ScalingReport rep = residual_scaling_study(b1.datum, sweep, basis);
    double worst_boundary = 0;
    for (double rb : rep.residual_boundary) worst_boundary = std::max(worst_boundary, rb);
    const bool ok = rep.slope >= tolerances::slope_lo && rep.slope <= tolerances::slope_hi &&
                    worst_boundary <= tolerances::boundary_residual;
    report(10, "residual_scaling", ok,
           "slope " + fmt_double(rep.slope) + ", boundary " + fmt_double(worst_boundary),
           t.seconds());
  }

  // 11. scaling covariance
  {
    Timer t;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const auto& grid = b1.profile->grid;
    double worst = 0;
    for (int trial = 0; trial < 5; ++trial) {
      Matrix m = Matrix::Zero(grid->size(), basis->L + 1);
      for (int l = 0; l <= 4; ++l) {
        const double a = uni(rng), bq = uni(rng), c = uni(rng);
        for (int i = 0; i < grid->size(); ++i) {
          const double r = grid->node(i);
          m(i, l) = a + bq * r * r + c * std::cos(2.5 * r * r);
        }
      }
      TensorField u = TensorField::from_modes(3, grid, basis, m);
      Vector hc = Vector::Zero(basis->L + 1);
      hc[0] = 0.1 * uni(rng);
      hc[1] = 0.2 * uni(rng);
      PerturbationField h = make_perturbation(basis, hc);
      for (double lam : {0.25, 1.0, 4.0})
        worst = std::max(worst,
                         scaling_covariance_check(u, h, lam, b1.datum.mu_m, 3.0).rel_deviation);
    }
    report(11, "scaling_covariance", worst <= tolerances::covariance_rel,
           "max rel dev " + fmt_double(worst), t.seconds());
  }

  // 12. determinism and serialization round trip
  {
    Timer t;
    PipelineConfig cfg;
    cfg.params = params(3, 3.0, 50, 1e-10);
    cfg.k = 4;
    cfg.n_radial = 193;
    cfg.fd_resolutions = {1025, 2049, 4097};
    auto run_a = run_pipeline(cfg);
    auto run_b = run_pipeline(cfg);
    bool ok = run_a.size() == run_b.size();
    for (size_t i = 0; ok && i < run_a.size(); ++i) {
      const std::string ja = to_json(to_record(run_a[i]));
      ok = ja == to_json(to_record(run_b[i]));
      ok = ok && branch_from_json(ja) == to_record(run_a[i]);  // parse round trip
    }
    ok = ok && summary_csv(run_a) == summary_csv(run_b);

    TrajectoryRecord tr = to_record(*sol33);
    ok = ok && trajectory_from_json(to_json(tr)) == tr;
    ProfileRecord pr = to_record(*b1.profile);
    ok = ok && profile_from_json(to_json(pr)) == pr;
    DatumRecord dr = to_record(b1.datum);
    ok = ok && datum_from_json(to_json(dr)) == dr;
    PerturbedState st = build_first_order_state(1e-2, b1.datum, basis);
    StateRecord sr = to_record(st, 2.0);
    ok = ok && state_from_json(to_json(sr)) == sr;
    report(12, "determinism_round_trip", ok, "byte-identical reports, records re-parse equal",
           t.seconds());
  }

  std::printf("%d of 12 criteria passed\n", 12 - failures);
  return failures;
}
