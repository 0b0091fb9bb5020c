#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "overdet/radial_ode.hpp"

namespace overdet {

/// Radial potential q(r) = mu_m^2 (p-1) |U_m(r)|^{p-2} of the linearization.
/// Tests may build synthetic potentials by filling grid/q_fn directly
/// (profile left empty).
struct LinearizedPotential {
  std::shared_ptr<const RadialProfile> profile;
  std::shared_ptr<const RadialGrid> grid;
  std::function<double(double)> q_fn;
  double mu_m = 0;
  double p = 3;
  int N = 3;
  Vector values;  // q at grid nodes

  double q_at(double r) const { return q_fn(r); }
};

LinearizedPotential make_potential(std::shared_ptr<const RadialProfile> profile);

enum class EigenBackend { collocation, finite_difference };

/// Discrete form of the Dirichlet eigenproblem
///   -V'' - (N-1)/r V' - q V = gamma V,   V'(0) = 0, V(1) = 0.
/// Collocation: piecewise Chebyshev with boundary/interface rows eliminated.
/// Finite difference: conservative second-order flux scheme on a uniform grid,
/// symmetrized by the cell-volume weights (the tridiagonal the Sturm-sequence
/// solver bisects).
struct DiscreteEigenproblem {
  EigenBackend backend = EigenBackend::collocation;
  int N = 3;
  double p = 3;
  double mu_m = 0;
  std::shared_ptr<const LinearizedPotential> potential;

  // collocation data
  std::shared_ptr<const RadialGrid> grid;
  Matrix A_red;                    // ODE rows restricted to interior unknowns
  Matrix recon;                    // constrained node values = recon * interior
  std::vector<int> interior_idx;   // global indices of interior unknowns
  std::vector<int> constrained_idx;  // r=0 node and panel interfaces

  // finite-difference data (nodes r_i = i/fd_n, i = 0..fd_n)
  int fd_n = 0;
  Vector fd_diag, fd_off;  // symmetrized tridiagonal
  Vector fd_sqrt_m;        // sqrt of cell volumes
  Vector fd_q;
};

/// Throws GridTooCoarse below 16 nodes. n_nodes = 0 uses the potential's grid
/// size for the finite-difference backend.
DiscreteEigenproblem assemble_eigenproblem(std::shared_ptr<const LinearizedPotential> potential,
                                           EigenBackend backend, int n_nodes = 0);

struct EigenPair {
  int j = 0;      // 1-based index
  double gamma = 0;
  Vector r;       // sample nodes (collocation grid or uniform fd grid)
  Vector V;       // sup-normalized, largest lobe positive
  Vector dV;      // V' at the nodes
  double dV_at_1 = 0;
  std::string normalization = "sup_one";
};

/// The j_max smallest eigenpairs, sorted by eigenvalue.
std::vector<EigenPair> solve_spectrum(const DiscreteEigenproblem& problem, int j_max);

/// Exact count of negative eigenvalues (Sturm count at 0; fd backend only).
int fd_negative_count(const DiscreteEigenproblem& problem);

/// (int r^{N-1} [V'^2 - q V^2]) / (int r^{N-1} V^2) on the potential's grid.
/// Requires V(1) = 0; throws ZeroDenominator when the L2 mass underflows.
double rayleigh_quotient(const Vector& V, const LinearizedPotential& potential);

/// Both sides of the ground-state negativity integral identity
///   int_0^1 r^{N-1}[U''^2 - q U'^2] dr = -(N-1) int_0^1 r^{N-3} U'^2 dr
/// evaluated with two independent quadrature rules (panelled Clenshaw--Curtis
/// and panelled composite Simpson). omega_N is carried for documentation only;
/// it cancels in the ratio.
struct IdentityReport {
  double lhs_cc = 0, rhs_cc = 0;
  double lhs_simpson = 0, rhs_simpson = 0;
  double rel_discrepancy_cc = 0, rel_discrepancy_simpson = 0;
  double max_rel_discrepancy = 0;
  double omega_N = 0;
  bool rhs_negative = false;
};
IdentityReport negativity_identity_check(const RadialProfile& profile, int n_quad = 2049);

/// True iff lambda_m l^2 = -gamma_j (within 1e-8 |gamma_1|) has the unique
/// solution (l, j) = (1, 1) over l in {0..l_max} and the negative gammas.
bool kernel_simplicity_check(const std::vector<double>& gammas, double lambda_m, int l_max);

/// Full record of the bifurcation constants for one branch.
struct BifurcationDatum {
  int N = 3;
  double p = 3;
  int m = 0;
  double mu_m = 0;
  double lambda_m = 0;  // = -gamma_{1,m} > 0
  double c_m = 0;
  double delta_m = 0;  // V_m'(1) / U_m''(1)
  double beta_m = 0;   // delta_m / sqrt(lambda_m)
  std::vector<double> gamma_spectrum;
  std::string normalization;
  EigenPair V_m;
  std::shared_ptr<const RadialProfile> profile;
};

/// Throws PositiveGroundEigenvalue if gamma_1 >= 0 (contradicts the
/// certified negativity, i.e. the discretization failed) and ZeroDenominator if
/// U''(1) degenerates.
BifurcationDatum bifurcation_constants(const EigenPair& pair,
                                       std::shared_ptr<const RadialProfile> profile);

/// Residual norm ||(A - gamma) V||_inf / ||V||_inf of an fd eigenpair measured
/// against the same scheme on a doubled grid (cubic prolongation, stencils
/// kept on one side of the potential's cusps). Decays at the scheme's order.
double fd_kernel_residual(const DiscreteEigenproblem& problem, const EigenPair& pair);

}  // namespace overdet
