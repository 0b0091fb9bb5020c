#include "overdet/sturm_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "overdet/errors.hpp"

namespace overdet {

LinearizedPotential make_potential(std::shared_ptr<const RadialProfile> profile) {
  LinearizedPotential pot;
  pot.profile = profile;
  pot.grid = profile->grid;
  pot.q_fn = [profile](double r) { return profile->q_at(r); };
  pot.mu_m = profile->mu_m;
  pot.p = profile->p;
  pot.N = profile->N;
  const int n = pot.grid->size();
  pot.values.resize(n);
  for (int i = 0; i < n; ++i) pot.values[i] = pot.q_fn(pot.grid->node(i));
  return pot;
}

namespace {

DiscreteEigenproblem assemble_collocation(std::shared_ptr<const LinearizedPotential> pot) {
  DiscreteEigenproblem ep;
  ep.backend = EigenBackend::collocation;
  ep.N = pot->N;
  ep.p = pot->p;
  ep.mu_m = pot->mu_m;
  ep.potential = pot;
  ep.grid = pot->grid;
  const RadialGrid& g = *ep.grid;
  const int total = g.size();
  const int last = total - 1;  // r = 1, Dirichlet row (dropped)

  // constrained nodes: r = 0 (Neumann row) and the panel interfaces
  // (derivative-continuity rows); everything else interior
  ep.constrained_idx.push_back(0);
  for (size_t k = 1; k < g.panels().size(); ++k)
    ep.constrained_idx.push_back(g.panels()[k].offset);
  std::vector<int> role(total, -1);  // -1 interior, >=0 constrained slot, -2 dropped
  for (size_t c = 0; c < ep.constrained_idx.size(); ++c) role[ep.constrained_idx[c]] = (int)c;
  role[last] = -2;
  for (int i = 0; i < total; ++i)
    if (role[i] == -1) ep.interior_idx.push_back(i);
  std::vector<int> int_slot(total, -1);
  for (size_t z = 0; z < ep.interior_idx.size(); ++z) int_slot[ep.interior_idx[z]] = (int)z;

  const int mi = static_cast<int>(ep.interior_idx.size());
  const int mc = static_cast<int>(ep.constrained_idx.size());

  // constraint rows C_w w + C_z z = 0
  Matrix Cw = Matrix::Zero(mc, mc), Cz = Matrix::Zero(mc, mi);
  auto scatter = [&](int row, int gidx, double val, Matrix& W, Matrix& Z) {
    if (role[gidx] == -2) return;  // Dirichlet value 0
    if (role[gidx] >= 0)
      W(row, role[gidx]) += val;
    else
      Z(row, int_slot[gidx]) += val;
  };
  {
    const Panel& p0 = g.panels().front();
    for (int j = 0; j <= p0.n; ++j) scatter(0, p0.offset + j, p0.D1(0, j), Cw, Cz);
  }
  for (size_t k = 1; k < g.panels().size(); ++k) {
    const Panel& pl = g.panels()[k - 1];
    const Panel& pr = g.panels()[k];
    for (int j = 0; j <= pl.n; ++j) scatter((int)k, pl.offset + j, pl.D1(pl.n, j), Cw, Cz);
    for (int j = 0; j <= pr.n; ++j) scatter((int)k, pr.offset + j, -pr.D1(0, j), Cw, Cz);
  }
  Matrix W = -Cw.partialPivLu().solve(Cz);  // w = W z
  ep.recon = W;

  // ODE rows -(D2 + (N-1)/r D1) V - q V = gamma V at panel-interior nodes
  Matrix Lint = Matrix::Zero(mi, mi), Lcon = Matrix::Zero(mi, mc);
  int row = 0;
  for (const Panel& p : g.panels()) {
    for (int l = 1; l < p.n; ++l) {
      const int gi = p.offset + l;
      const double r = g.node(gi);
      for (int j = 0; j <= p.n; ++j) {
        double val = -(p.D2(l, j) + (ep.N - 1) / r * p.D1(l, j));
        scatter(row, p.offset + j, val, Lcon, Lint);  // note (W,Z) = (Lcon,Lint)
      }
      Lint(row, int_slot[gi]) -= pot->values[gi];
      ++row;
    }
  }
  ep.A_red = Lint + Lcon * W;
  return ep;
}

DiscreteEigenproblem assemble_fd(std::shared_ptr<const LinearizedPotential> pot, int n_nodes) {
  DiscreteEigenproblem ep;
  ep.backend = EigenBackend::finite_difference;
  ep.N = pot->N;
  ep.p = pot->p;
  ep.mu_m = pot->mu_m;
  ep.potential = pot;
  const int n = n_nodes - 1;  // intervals
  ep.fd_n = n;
  const double h = 1.0 / n;

  ep.fd_q.resize(n + 1);
  for (int i = 0; i <= n; ++i) ep.fd_q[i] = pot->q_at(i * h);

  // conservative flux form of -(r^{N-1} V')' / r^{N-1} - q V, cell volumes
  // m_i = int r^{N-1} over the cell; symmetrized with S = diag(sqrt(m))
  Vector m(n), flux(n);  // flux[i] = r_{i+1/2}^{N-1} / h, couples V_i and V_{i+1}
  for (int i = 0; i < n; ++i) {
    const double rl = std::max(0.0, i * h - h / 2), rr = i * h + h / 2;
    m[i] = (std::pow(rr, ep.N) - std::pow(rl, ep.N)) / ep.N;
    flux[i] = std::pow(rr, ep.N - 1) / h;
  }
  ep.fd_sqrt_m = m.cwiseSqrt();
  ep.fd_diag.resize(n);
  ep.fd_off.resize(n - 1);
  for (int i = 0; i < n; ++i) {
    double k = flux[i] + (i > 0 ? flux[i - 1] : 0.0);
    ep.fd_diag[i] = k / m[i] - ep.fd_q[i];
    if (i + 1 < n) ep.fd_off[i] = -flux[i] / (ep.fd_sqrt_m[i] * ep.fd_sqrt_m[i + 1]);
  }
  return ep;
}

}  // namespace

DiscreteEigenproblem assemble_eigenproblem(std::shared_ptr<const LinearizedPotential> pot,
                                           EigenBackend backend, int n_nodes) {
  if (n_nodes == 0) n_nodes = pot->grid->size();
  if (n_nodes < 16) throw GridTooCoarse("eigenproblem needs at least 16 nodes");
  return backend == EigenBackend::collocation ? assemble_collocation(pot)
                                              : assemble_fd(pot, n_nodes);
}

namespace {

// ---- symmetric tridiagonal machinery (fd backend) --------------------------

int sturm_count(const Vector& diag, const Vector& off, double sigma) {
  int count = 0;
  double d = diag[0] - sigma;
  if (d < 0) ++count;
  for (int i = 1; i < diag.size(); ++i) {
    double denom = (std::abs(d) < 1e-300) ? std::copysign(1e-300, d == 0 ? -1.0 : d) : d;
    d = diag[i] - sigma - off[i - 1] * off[i - 1] / denom;
    if (d < 0) ++count;
  }
  return count;
}

double bisect_eigenvalue(const Vector& diag, const Vector& off, int k) {
  double lo = diag[0], hi = diag[0];
  for (int i = 0; i < diag.size(); ++i) {
    double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) +
                    (i + 1 < diag.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - radius);
    hi = std::max(hi, diag[i] + radius);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max({1.0, std::abs(lo), std::abs(hi)});
       ++it) {
    double mid = 0.5 * (lo + hi);
    if (sturm_count(diag, off, mid) >= k)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// (T - sigma) x = b with partial pivoting; T symmetric tridiagonal.
Vector tridiag_shifted_solve(const Vector& diag, const Vector& off, double sigma,
                             const Vector& b) {
  const int n = static_cast<int>(diag.size());
  Vector d(n), e(n), f(n), x = b;
  for (int i = 0; i < n; ++i) {
    d[i] = diag[i] - sigma;
    e[i] = (i + 1 < n) ? off[i] : 0.0;  // superdiagonal
    f[i] = 0.0;                         // fill-in second superdiagonal
  }
  Vector l(n);
  for (int i = 0; i + 1 < n; ++i) l[i] = off[i];  // subdiagonal
  for (int i = 0; i + 1 < n; ++i) {
    if (std::abs(l[i]) > std::abs(d[i])) {
      std::swap(d[i], l[i]);
      std::swap(e[i], d[i + 1]);
      std::swap(f[i], e[i + 1]);
      std::swap(x[i], x[i + 1]);
    }
    if (std::abs(d[i]) < 1e-300) d[i] = 1e-300;
    const double factor = l[i] / d[i];
    d[i + 1] -= factor * e[i];
    e[i + 1] -= factor * f[i];
    x[i + 1] -= factor * x[i];
  }
  if (std::abs(d[n - 1]) < 1e-300) d[n - 1] = std::copysign(1e-300, d[n - 1]);
  for (int i = n - 1; i >= 0; --i) {
    double s = x[i];
    if (i + 1 < n) s -= e[i] * x[i + 1];
    if (i + 2 < n) s -= f[i] * x[i + 2];
    x[i] = s / d[i];
  }
  return x;
}

Vector inverse_iteration(const Vector& diag, const Vector& off, double gamma) {
  const int n = static_cast<int>(diag.size());
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = uni(rng);
  x.normalize();
  const double shift = gamma + 1e-12 * std::max(1.0, std::abs(gamma));
  for (int it = 0; it < 4; ++it) {
    x = tridiag_shifted_solve(diag, off, shift, x);
    x.normalize();
  }
  return x;
}

void normalize_sup(EigenPair& pair) {
  int k = 0;
  pair.V.cwiseAbs().maxCoeff(&k);
  const double scale = 1.0 / pair.V[k];
  pair.V *= scale;
  pair.dV *= scale;
  pair.dV_at_1 = pair.dV[pair.dV.size() - 1];
  pair.normalization = "sup_one_largest_lobe_positive";
}

std::vector<EigenPair> solve_collocation(const DiscreteEigenproblem& ep, int j_max) {
  Eigen::EigenSolver<Matrix> es(ep.A_red);
  if (es.info() != Eigen::Success) throw SolverFailure("dense eigensolver did not converge");
  const auto& vals = es.eigenvalues();
  std::vector<int> order(vals.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return vals[a].real() < vals[b].real(); });

  const RadialGrid& g = *ep.grid;
  const int total = g.size();
  std::vector<EigenPair> out;
  for (int j = 0; j < j_max && j < static_cast<int>(order.size()); ++j) {
    const int idx = order[j];
    if (std::abs(vals[idx].imag()) > 1e-6 * std::max(1.0, std::abs(vals[idx].real())))
      throw SolverFailure("complex eigenvalue in the requested low spectrum");
    Eigen::VectorXcd zc = es.eigenvectors().col(idx);
    int kmax = 0;
    zc.cwiseAbs().maxCoeff(&kmax);
    Vector z = (zc / zc[kmax]).real();

    EigenPair pair;
    pair.j = j + 1;
    pair.gamma = vals[idx].real();
    pair.r = g.nodes();
    pair.V = Vector::Zero(total);
    for (size_t i = 0; i < ep.interior_idx.size(); ++i) pair.V[ep.interior_idx[i]] = z[i];
    Vector w = ep.recon * z;
    for (size_t c = 0; c < ep.constrained_idx.size(); ++c)
      pair.V[ep.constrained_idx[c]] = w[c];
    pair.dV = g.derivative(pair.V);
    normalize_sup(pair);
    out.push_back(std::move(pair));
  }
  return out;
}

std::vector<EigenPair> solve_fd(const DiscreteEigenproblem& ep, int j_max) {
  const int n = ep.fd_n;
  const double h = 1.0 / n;
  std::vector<EigenPair> out;
  for (int j = 1; j <= j_max; ++j) {
    EigenPair pair;
    pair.j = j;
    pair.gamma = bisect_eigenvalue(ep.fd_diag, ep.fd_off, j);
    Vector w = inverse_iteration(ep.fd_diag, ep.fd_off, pair.gamma);
    pair.r.resize(n + 1);
    pair.V.resize(n + 1);
    for (int i = 0; i < n; ++i) {
      pair.r[i] = i * h;
      pair.V[i] = w[i] / ep.fd_sqrt_m[i];
    }
    pair.r[n] = 1.0;
    pair.V[n] = 0.0;
    pair.dV.resize(n + 1);
    pair.dV[0] = (-3 * pair.V[0] + 4 * pair.V[1] - pair.V[2]) / (2 * h);
    for (int i = 1; i < n; ++i) pair.dV[i] = (pair.V[i + 1] - pair.V[i - 1]) / (2 * h);
    pair.dV[n] = (3 * pair.V[n] - 4 * pair.V[n - 1] + pair.V[n - 2]) / (2 * h);
    normalize_sup(pair);
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace

std::vector<EigenPair> solve_spectrum(const DiscreteEigenproblem& problem, int j_max) {
  return problem.backend == EigenBackend::collocation ? solve_collocation(problem, j_max)
                                                      : solve_fd(problem, j_max);
}

int fd_negative_count(const DiscreteEigenproblem& problem) {
  return sturm_count(problem.fd_diag, problem.fd_off, 0.0);
}

double rayleigh_quotient(const Vector& V, const LinearizedPotential& potential) {
  const RadialGrid& g = *potential.grid;
  if (V.size() != g.size()) throw InvalidParams("rayleigh_quotient: grid size mismatch");
  const double sup = V.cwiseAbs().maxCoeff();
  if (std::abs(V[V.size() - 1]) > 1e-8 * std::max(1.0, sup))
    throw InvalidParams("rayleigh_quotient requires V(1) = 0");
  Vector dV = g.derivative(V);
  double num = 0, den = 0;
  for (int i = 0; i < g.size(); ++i) {
    const double rw = std::pow(g.node(i), potential.N - 1) * g.weights()[i];
    num += rw * (dV[i] * dV[i] - potential.values[i] * V[i] * V[i]);
    den += rw * V[i] * V[i];
  }
  if (den < 1e-300) throw ZeroDenominator("rayleigh_quotient: vanishing L2 mass");
  return num / den;
}

IdentityReport negativity_identity_check(const RadialProfile& profile, int n_quad) {
  const int N = profile.N;
  std::vector<double> breaks{0.0};
  for (double z : profile.interior_zeros) breaks.push_back(z);
  breaks.push_back(1.0);

  auto f_lhs = [&](double r) {
    const double upp = profile.d2U_at(r), up = profile.dU_at(r);
    return std::pow(r, N - 1) * (upp * upp - profile.q_at(r) * up * up);
  };
  auto f_rhs = [&](double r) {
    if (r <= 0) return 0.0;  // U' = O(r) makes the integrand vanish at 0
    const double up = profile.dU_at(r);
    return std::pow(r, N - 3) * up * up;
  };

  IdentityReport rep;
  rep.lhs_cc = panel_clenshaw_curtis(f_lhs, breaks, n_quad);
  rep.rhs_cc = -(N - 1) * panel_clenshaw_curtis(f_rhs, breaks, n_quad);
  rep.lhs_simpson = panel_simpson(f_lhs, breaks, n_quad);
  rep.rhs_simpson = -(N - 1) * panel_simpson(f_rhs, breaks, n_quad);
  rep.rel_discrepancy_cc = std::abs(rep.lhs_cc - rep.rhs_cc) / std::abs(rep.rhs_cc);
  rep.rel_discrepancy_simpson =
      std::abs(rep.lhs_simpson - rep.rhs_simpson) / std::abs(rep.rhs_simpson);
  rep.max_rel_discrepancy = std::max(rep.rel_discrepancy_cc, rep.rel_discrepancy_simpson);
  rep.omega_N = 2.0 * std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0);
  rep.rhs_negative = rep.rhs_cc < 0;
  return rep;
}

bool kernel_simplicity_check(const std::vector<double>& gammas, double lambda_m, int l_max) {
  if (gammas.empty() || !(lambda_m > 0)) return false;
  const double tol = 1e-8 * std::abs(gammas[0]);
  int matches = 0;
  bool has_11 = false;
  for (int l = 0; l <= l_max; ++l)
    for (size_t j = 0; j < gammas.size(); ++j) {
      if (gammas[j] >= 0) continue;
      if (std::abs(lambda_m * l * l + gammas[j]) <= tol) {
        ++matches;
        if (l == 1 && j == 0) has_11 = true;
      }
    }
  return matches == 1 && has_11;
}

BifurcationDatum bifurcation_constants(const EigenPair& pair,
                                       std::shared_ptr<const RadialProfile> profile) {
  if (pair.gamma >= 0)
    throw PositiveGroundEigenvalue(
        "gamma_1 >= 0 contradicts the ground-state negativity; discretization failed");
  if (std::abs(profile->d2U_at_1) < 1e-12)
    throw ZeroDenominator("U''(1) below 1e-12");
  BifurcationDatum d;
  d.N = profile->N;
  d.p = profile->p;
  d.m = profile->m;
  d.mu_m = profile->mu_m;
  d.lambda_m = -pair.gamma;
  d.c_m = profile->c_m;
  d.delta_m = pair.dV_at_1 / profile->d2U_at_1;
  d.beta_m = d.delta_m / std::sqrt(d.lambda_m);
  d.normalization = pair.normalization;
  d.V_m = pair;
  d.profile = profile;
  if (d.delta_m == 0 || !std::isfinite(d.delta_m))
    throw SolverFailure("delta_m degenerate (V'(1) vanished numerically)");
  return d;
}

namespace {

// cubic Lagrange value at r from 4 coarse nodes starting at index i0
double cubic_at(const Vector& V, double h, int i0, double r) {
  double out = 0;
  for (int a = 0; a < 4; ++a) {
    double num = 1, den = 1;
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      num *= r - (i0 + b) * h;
      den *= (a - b) * h;
    }
    out += V[i0 + a] * num / den;
  }
  return out;
}

}  // namespace

double fd_kernel_residual(const DiscreteEigenproblem& problem, const EigenPair& pair) {
  const int n = problem.fd_n;
  const double h = 1.0 / n;
  const int n2 = 2 * n;
  DiscreteEigenproblem fine = assemble_eigenproblem(problem.potential,
                                                    EigenBackend::finite_difference, n2 + 1);
  const std::vector<double> no_cusps;
  const auto& cusps =
      problem.potential->profile ? problem.potential->profile->interior_zeros : no_cusps;

  // prolong the eigenvector; interpolation stencils never straddle a cusp
  Vector Vf(n2 + 1);
  for (int i = 0; i <= n; ++i) Vf[2 * i] = pair.V[i];
  for (int i = 0; i < n; ++i) {
    const double r = (i + 0.5) * h;
    int i0 = std::clamp(i - 1, 0, n - 3);
    for (double c : cusps) {
      if (c > i0 * h && c < (i0 + 3) * h) {
        if (r < c)
          i0 = std::clamp(static_cast<int>(std::floor(c / h)) - 3, 0, n - 3);
        else
          i0 = std::clamp(static_cast<int>(std::ceil(c / h)), 0, n - 3);
      }
    }
    Vf[2 * i + 1] = cubic_at(pair.V, h, i0, r);
  }

  // apply the fine operator: A = S^{-1} T S on the unknowns, Dirichlet at 1
  Vector w(n2);
  for (int i = 0; i < n2; ++i) w[i] = Vf[i] * fine.fd_sqrt_m[i];
  double res = 0;
  for (int i = 0; i < n2; ++i) {
    double tv = fine.fd_diag[i] * w[i];
    if (i > 0) tv += fine.fd_off[i - 1] * w[i - 1];
    if (i + 1 < n2) tv += fine.fd_off[i] * w[i + 1];
    const double av = tv / fine.fd_sqrt_m[i];
    res = std::max(res, std::abs(av - pair.gamma * Vf[i]));
  }
  return res / pair.V.cwiseAbs().maxCoeff();
}

}  // namespace overdet
