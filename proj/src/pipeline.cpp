#include "overdet/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "overdet/errors.hpp"

namespace overdet {

void PipelineConfig::validate() const {
  params.validate();
  if (k < 3) throw InvalidParams("k must be >= 3");
  if (n_radial < 33) throw InvalidParams("n_radial must be >= 33");
  if (L < 1 || n_x < 2 * (L + 1)) throw InvalidParams("need n_x >= 2(L+1) for dealiasing");
  if (j_max < 1 || l_max < 1) throw InvalidParams("j_max and l_max must be positive");
  for (size_t i = 0; i + 1 < s_sweep.size(); ++i)
    if (!(s_sweep[i] > s_sweep[i + 1]) || !(s_sweep[i + 1] > 0))
      throw InvalidParams("s_sweep must be strictly decreasing and positive");
  if (backends.empty()) throw InvalidParams("at least one backend required");
  for (size_t i = 0; i + 1 < fd_resolutions.size(); ++i)
    if (fd_resolutions[i + 1] - 1 != 2 * (fd_resolutions[i] - 1))
      throw InvalidParams("fd_resolutions must double the interval count");
}

bool PipelineConfig::has_backend(EigenBackend b) const {
  return std::find(backends.begin(), backends.end(), b) != backends.end();
}

bool BranchReport::passes() const { return first_failure().empty(); }

std::string BranchReport::first_failure() const {
  if (!error.empty()) return "branch_error";
  if (!pass_lambda_positive) return "lambda_positive";
  if (!pass_curvature) return "boundary_curvature";
  if (!pass_identity) return "negativity_identity";
  if (!pass_kernel_simplicity) return "kernel_simplicity";
  if (!pass_transversality) return "transversality";
  if (!pass_backends) return "backend_equivalence";
  if (!pass_boundary) return "boundary_residual";
  if (!pass_slope) return "residual_scaling";
  return {};
}

namespace {

BranchReport build_branch(const PipelineConfig& cfg, std::shared_ptr<const OdeSolution> sol,
                          int m, std::shared_ptr<const CosineBasis> basis) {
  BranchReport rep;
  rep.m = m;

  auto profile = std::make_shared<const RadialProfile>(build_profile(sol, m, cfg.n_radial));
  auto potential = std::make_shared<const LinearizedPotential>(make_potential(profile));

  auto ep = assemble_eigenproblem(potential, EigenBackend::collocation);
  auto pairs = solve_spectrum(ep, cfg.j_max);
  std::vector<double> gammas;
  for (const auto& pr : pairs) gammas.push_back(pr.gamma);

  rep.datum = bifurcation_constants(pairs[0], profile);
  rep.datum.gamma_spectrum = gammas;
  rep.pass_lambda_positive = rep.datum.lambda_m > 0;
  rep.pass_curvature = std::abs(profile->d2U_at_1 + rep.datum.mu_m * rep.datum.mu_m *
                                                        std::pow(std::abs(rep.datum.c_m),
                                                                 rep.datum.p - 2.0) *
                                                        rep.datum.c_m) <
                       tolerances::curvature_closed_form;

  rep.identity = negativity_identity_check(*profile, std::max(2049, cfg.n_radial));
  rep.pass_identity =
      rep.identity.max_rel_discrepancy <= tolerances::identity_rel && rep.identity.rhs_negative;

  rep.kernel_simplicity = kernel_simplicity_check(gammas, rep.datum.lambda_m, cfg.l_max);
  rep.pass_kernel_simplicity = rep.kernel_simplicity;

  rep.transversality = transversality_check(rep.datum, basis);
  rep.pass_transversality = rep.transversality.pairing < 0 &&
                            rep.transversality.fd_vs_exact_sup <= tolerances::transversality_fd;

  if (cfg.has_backend(EigenBackend::finite_difference)) {
    std::vector<double> g_fd, d_fd;
    for (int n : cfg.fd_resolutions) {
      auto fd = assemble_eigenproblem(potential, EigenBackend::finite_difference, n);
      auto fp = solve_spectrum(fd, 1);
      g_fd.push_back(fp[0].gamma);
      d_fd.push_back(fp[0].dV_at_1 / profile->d2U_at_1);
    }
    const size_t last = g_fd.size() - 1;
    rep.gamma_fd_extrapolated = (4.0 * g_fd[last] - g_fd[last - 1]) / 3.0;
    rep.delta_fd_extrapolated = (4.0 * d_fd[last] - d_fd[last - 1]) / 3.0;
    rep.gamma_backend_dev = std::abs(-rep.datum.lambda_m - rep.gamma_fd_extrapolated);
    rep.delta_backend_dev = std::abs(rep.datum.delta_m - rep.delta_fd_extrapolated);
    rep.pass_backends = rep.gamma_backend_dev <= tolerances::gamma_backends &&
                        rep.delta_backend_dev <= tolerances::delta_backends;

    auto fd0 = assemble_eigenproblem(potential, EigenBackend::finite_difference, cfg.n_radial);
    auto fp0 = solve_spectrum(fd0, 1);
    rep.kernel_residual = fd_kernel_residual(fd0, fp0[0]);
  } else {
    rep.pass_backends = true;
  }

  if (cfg.run_scaling) {
    rep.scaling = residual_scaling_study(rep.datum, cfg.s_sweep, basis);
    rep.pass_slope = rep.scaling.slope >= tolerances::slope_lo &&
                     rep.scaling.slope <= tolerances::slope_hi;
    rep.pass_boundary = *std::max_element(rep.scaling.residual_boundary.begin(),
                                          rep.scaling.residual_boundary.end()) <=
                        tolerances::boundary_residual;
  } else {
    rep.pass_slope = rep.pass_boundary = true;
  }
  return rep;
}

}  // namespace

std::vector<BranchReport> run_pipeline(const PipelineConfig& config) {
  config.validate();
  auto sol = std::make_shared<const OdeSolution>(integrate_ivp(config.params));
  auto basis = make_cosine_basis(config.L, config.n_x);

  std::vector<BranchReport> reports;
  double prev_mu = 0;
  for (int m = 1; m <= config.k - 2; ++m) {
    BranchReport rep;
    try {
      rep = build_branch(config, sol, m, basis);
      if (!(rep.datum.mu_m > prev_mu))
        throw SolverFailure("mu_m not strictly increasing across branches");
      prev_mu = rep.datum.mu_m;
    } catch (const OverdetError& e) {
      rep = BranchReport{};
      rep.m = m;
      rep.error = e.kind() + ": " + e.what();
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

ConvergenceTable convergence_sweep(const PipelineConfig& config,
                                   const std::vector<int>& resolutions) {
  config.validate();
  if (resolutions.size() < 3) throw InvalidParams("convergence sweep needs >= 3 resolutions");
  for (size_t i = 0; i < resolutions.size(); ++i) {
    if (resolutions[i] < 33) throw InvalidParams("resolutions must be >= 33");
    if (i + 1 < resolutions.size() && resolutions[i + 1] - 1 != 2 * (resolutions[i] - 1))
      throw InvalidParams("resolutions must form a doubling chain");
  }

  auto sol = std::make_shared<const OdeSolution>(integrate_ivp(config.params));
  auto basis = make_cosine_basis(config.L, config.n_x);
  ConvergenceTable table;

  for (int m = 1; m <= config.k - 2; ++m) {
    std::vector<double> lam_fd, del_fd;
    for (int n : resolutions) {
      auto profile = std::make_shared<const RadialProfile>(build_profile(sol, m, n));
      auto potential = std::make_shared<const LinearizedPotential>(make_potential(profile));

      if (config.has_backend(EigenBackend::collocation)) {
        auto ep = assemble_eigenproblem(potential, EigenBackend::collocation);
        auto pairs = solve_spectrum(ep, 1);
        auto datum = bifurcation_constants(pairs[0], profile);
        Matrix vm = Matrix::Zero(profile->grid->size(), basis->L + 1);
        vm.col(1) = pairs[0].V;
        auto field = TensorField::from_modes(config.params.N, profile->grid, basis, vm);
        const double kr = apply_linearized(field, datum.lambda_m, datum).sup_abs();
        table.rows.push_back(
            {m, n, "collocation", datum.lambda_m, datum.delta_m, datum.beta_m, kr});
      }
      if (config.has_backend(EigenBackend::finite_difference)) {
        auto fd = assemble_eigenproblem(potential, EigenBackend::finite_difference, n);
        auto fp = solve_spectrum(fd, 1);
        const double lam = -fp[0].gamma;
        const double del = fp[0].dV_at_1 / profile->d2U_at_1;
        table.rows.push_back({m, n, "finite_difference", lam, del, del / std::sqrt(lam),
                              fd_kernel_residual(fd, fp[0])});
        lam_fd.push_back(lam);
        del_fd.push_back(del);
      }
    }
    if (lam_fd.size() >= 3) {
      ConvergenceSummary s;
      s.m = m;
      const size_t z = lam_fd.size() - 1;
      s.lambda_extrapolated = (4.0 * lam_fd[z] - lam_fd[z - 1]) / 3.0;
      s.delta_extrapolated = (4.0 * del_fd[z] - del_fd[z - 1]) / 3.0;
      s.order_lambda = std::log2(std::abs((lam_fd[z - 2] - lam_fd[z - 1]) /
                                          (lam_fd[z - 1] - lam_fd[z])));
      s.order_delta =
          std::log2(std::abs((del_fd[z - 2] - del_fd[z - 1]) / (del_fd[z - 1] - del_fd[z])));
      table.fd_summaries.push_back(s);
    }
  }
  return table;
}

}  // namespace overdet
