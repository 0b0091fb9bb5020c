#include "overdet/pullback.hpp"

#include <algorithm>
#include <cmath>

#include "overdet/errors.hpp"

namespace overdet {

CosineBasis::CosineBasis(int L_, int n_x_) : L(L_), n_x(n_x_) {
  x.resize(n_x);
  cos_table.resize(L + 1, n_x);
  sin_table.resize(L + 1, n_x);
  for (int i = 0; i < n_x; ++i) {
    x[i] = M_PI * (i + 0.5) / n_x;
    for (int l = 0; l <= L; ++l) {
      cos_table(l, i) = std::cos(l * x[i]);
      sin_table(l, i) = std::sin(l * x[i]);
    }
  }
}

Vector CosineBasis::to_modes(const Vector& values) const {
  Vector a(L + 1);
  for (int l = 0; l <= L; ++l) {
    double s = cos_table.row(l).dot(values);
    a[l] = (l == 0 ? 1.0 : 2.0) * s / n_x;
  }
  return a;
}

std::shared_ptr<const CosineBasis> make_cosine_basis(int L, int n_x) {
  return std::make_shared<const CosineBasis>(L, n_x);
}

TensorField TensorField::from_modes(int N, std::shared_ptr<const RadialGrid> grid,
                                    std::shared_ptr<const CosineBasis> basis, Matrix modes) {
  TensorField v;
  v.N = N;
  v.grid = std::move(grid);
  v.basis = std::move(basis);
  v.modes = std::move(modes);
  v.d1.resizeLike(v.modes);
  v.d2.resizeLike(v.modes);
  for (int l = 0; l < v.modes.cols(); ++l) {
    v.d1.col(l) = v.grid->derivative(v.modes.col(l));
    v.d2.col(l) = v.grid->second_derivative(v.modes.col(l));
  }
  return v;
}

TensorField TensorField::from_jets(int N, std::shared_ptr<const RadialGrid> grid,
                                   std::shared_ptr<const CosineBasis> basis, Matrix modes,
                                   Matrix d1, Matrix d2) {
  TensorField v;
  v.N = N;
  v.grid = std::move(grid);
  v.basis = std::move(basis);
  v.modes = std::move(modes);
  v.d1 = std::move(d1);
  v.d2 = std::move(d2);
  return v;
}

double TensorField::sup_abs() const { return to_physical().cwiseAbs().maxCoeff(); }

PerturbationField make_perturbation(std::shared_ptr<const CosineBasis> basis, Vector coeffs) {
  PerturbationField f;
  f.basis = std::move(basis);
  f.coeffs = std::move(coeffs);
  const int n_x = f.basis->n_x;
  f.h = Vector::Zero(n_x);
  f.dh = Vector::Zero(n_x);
  f.d2h = Vector::Zero(n_x);
  for (int l = 0; l < f.coeffs.size(); ++l) {
    f.h += f.coeffs[l] * f.basis->cos_table.row(l).transpose();
    f.dh += -static_cast<double>(l) * f.coeffs[l] * f.basis->sin_table.row(l).transpose();
    f.d2h += -static_cast<double>(l * l) * f.coeffs[l] * f.basis->cos_table.row(l).transpose();
  }
  f.floor = 1.0 + f.h.minCoeff();
  return f;
}

TensorField d_t(const TensorField& v) {
  Matrix out = v.modes;
  for (int i = 0; i < out.rows(); ++i) out.row(i) = v.grid->node(i) * v.d1.row(i);
  return TensorField::from_modes(v.N, v.grid, v.basis, std::move(out));
}

namespace {

// radial Laplacian per mode: d2 + (N-1)/r d1, symmetric limit N d2 at r = 0
Matrix radial_laplacian(const TensorField& v) {
  Matrix lap(v.modes.rows(), v.modes.cols());
  for (int i = 0; i < lap.rows(); ++i) {
    const double r = v.grid->node(i);
    if (r < 1e-14)
      lap.row(i) = v.N * v.d2.row(i);
    else
      lap.row(i) = v.d2.row(i) + (v.N - 1) / r * v.d1.row(i);
  }
  return lap;
}

Matrix pointwise_nonlinearity(const Matrix& val, double mu_m, double p) {
  Matrix out(val.rows(), val.cols());
  const double mu2 = mu_m * mu_m;
  for (int i = 0; i < val.rows(); ++i)
    for (int j = 0; j < val.cols(); ++j)
      out(i, j) = mu2 * std::pow(std::abs(val(i, j)), p - 2.0) * val(i, j);
  return out;
}

}  // namespace

Matrix apply_pullback_physical(const TensorField& v, const PerturbationField& h, double lambda,
                               double mu_m, double p) {
  if (h.floor <= 0) throw DomainCollapse("profile 1 + h touches zero");
  const int n_r = static_cast<int>(v.modes.rows());
  const int L = v.basis->L;
  const Matrix& C = v.basis->cos_table;
  const Matrix& S = v.basis->sin_table;

  Matrix dt(n_r, L + 1), dtdt(n_r, L + 1), dxx_modes(n_r, L + 1), dtdx_modes(n_r, L + 1);
  for (int i = 0; i < n_r; ++i) {
    const double r = v.grid->node(i);
    dt.row(i) = r * v.d1.row(i);
    dtdt.row(i) = r * r * v.d2.row(i) + r * v.d1.row(i);
  }
  for (int l = 0; l <= L; ++l) {
    dxx_modes.col(l) = -static_cast<double>(l * l) * v.modes.col(l);
    dtdx_modes.col(l) = -static_cast<double>(l) * dt.col(l);
  }

  const Matrix val = v.modes * C;
  const Matrix lap = radial_laplacian(v) * C;
  const Matrix dt_phys = dt * C;
  const Matrix dtdt_phys = dtdt * C;
  const Matrix dxx_phys = dxx_modes * C;
  const Matrix dtdx_phys = dtdx_modes * S;  // d/dx of cos(lx) lands on sin(lx)

  const Eigen::ArrayXd one_h = (1.0 + h.h.array());
  const Eigen::ArrayXd hp = h.dh.array();
  const Eigen::ArrayXd hpp = h.d2h.array();
  const Eigen::ArrayXd c_lap = one_h.square();
  const Eigen::ArrayXd c_dtdt = lambda * (hp / one_h).square();
  const Eigen::ArrayXd c_dtdx = 2.0 * lambda * hp / one_h;
  const Eigen::ArrayXd c_dt = lambda * (hpp / one_h - (hp / one_h).square());

  Matrix out = pointwise_nonlinearity(val, mu_m, p) + lambda * dxx_phys;
  out.array() += lap.array().rowwise() * c_lap.transpose();
  out.array() += dtdt_phys.array().rowwise() * c_dtdt.transpose();
  out.array() += dtdx_phys.array().rowwise() * c_dtdx.transpose();
  out.array() += dt_phys.array().rowwise() * c_dt.transpose();
  return out;
}

TensorField apply_pullback(const TensorField& v, const PerturbationField& h, double lambda,
                           double mu_m, double p) {
  const Matrix phys = apply_pullback_physical(v, h, lambda, mu_m, p);
  Matrix modes(phys.rows(), v.basis->L + 1);
  for (int i = 0; i < phys.rows(); ++i)
    modes.row(i) = v.basis->to_modes(phys.row(i).transpose()).transpose();
  return TensorField::from_modes(v.N, v.grid, v.basis, std::move(modes));
}

TensorField apply_linearized(const TensorField& v, double lambda,
                             const BifurcationDatum& datum) {
  Matrix out = radial_laplacian(v);
  for (int i = 0; i < out.rows(); ++i) {
    const double q = datum.profile->q_at(v.grid->node(i));
    out.row(i) += q * v.modes.row(i);
  }
  for (int l = 0; l < out.cols(); ++l)
    out.col(l) -= lambda * static_cast<double>(l * l) * v.modes.col(l);
  return TensorField::from_modes(v.N, v.grid, v.basis, std::move(out));
}

PerturbationField trace_h(const TensorField& u, const RadialProfile& profile) {
  if (std::abs(profile.d2U_at_1) < 1e-12) throw ZeroDenominator("U''(1) below 1e-12");
  const int last = static_cast<int>(u.modes.rows()) - 1;
  Vector coeffs = u.d1.row(last).transpose() / profile.d2U_at_1;  // D_t u(e_1,.) = u_r(1,.)
  return make_perturbation(u.basis, std::move(coeffs));
}

namespace {

// jets of the kernel element v_m = V_m(|t|) cos x; V'' comes from the
// eigen-ODE so the discrete eigenrelation cancels exactly in the residual
TensorField kernel_field(const BifurcationDatum& datum,
                         std::shared_ptr<const CosineBasis> basis, double scale) {
  const auto& grid = datum.profile->grid;
  const int n_r = grid->size();
  if (datum.V_m.V.size() != n_r)
    throw InvalidParams("datum eigenpair does not live on the profile grid");
  Matrix modes = Matrix::Zero(n_r, basis->L + 1);
  Matrix d1 = modes, d2 = modes;
  const double gamma = -datum.lambda_m;
  for (int i = 0; i < n_r; ++i) {
    const double r = grid->node(i);
    const double q = datum.profile->q_at(r);
    const double V = datum.V_m.V[i], dV = datum.V_m.dV[i];
    modes(i, 1) = scale * V;
    d1(i, 1) = scale * dV;
    d2(i, 1) = (r < 1e-14) ? scale * (-(q + gamma) * V / datum.N)
                           : scale * (-(datum.N - 1) / r * dV - (q + gamma) * V);
  }
  return TensorField::from_jets(datum.N, grid, basis, std::move(modes), std::move(d1),
                                std::move(d2));
}

}  // namespace

TransversalityReport transversality_check(const BifurcationDatum& datum,
                                          std::shared_ptr<const CosineBasis> basis) {
  TensorField vm = kernel_field(datum, basis, 1.0);
  const auto& grid = datum.profile->grid;

  TransversalityReport rep;
  // int_{Omega_*} v_m . (d_lambda L) v_m = -omega_N pi int r^{N-1} V^2
  double mass = 0;
  for (int i = 0; i < grid->size(); ++i)
    mass += grid->weights()[i] * std::pow(grid->node(i), datum.N - 1) * vm.modes(i, 1) *
            vm.modes(i, 1);
  const double omega_N = 2.0 * std::pow(M_PI, datum.N / 2.0) / std::tgamma(datum.N / 2.0);
  rep.pairing = -omega_N * M_PI * mass;

  const double eps = 1e-4;
  TensorField lp = apply_linearized(vm, datum.lambda_m + eps, datum);
  TensorField lm = apply_linearized(vm, datum.lambda_m - eps, datum);
  Matrix diff = (lp.modes - lm.modes) / (2 * eps) + vm.modes;  // should vanish
  rep.fd_vs_exact_sup = (diff * basis->cos_table).cwiseAbs().maxCoeff();
  return rep;
}

PerturbedState build_first_order_state(double s, const BifurcationDatum& datum,
                                       std::shared_ptr<const CosineBasis> basis) {
  const auto& prof = *datum.profile;
  const auto& grid = prof.grid;
  const int n_r = grid->size();
  if (datum.V_m.V.size() != n_r)
    throw InvalidParams("datum eigenpair does not live on the profile grid");
  if (std::abs(s * datum.delta_m) >= 1.0)
    throw DomainCollapse("|s delta_m| >= 1: first-order boundary collapses");

  const int N = datum.N;
  const double p = datum.p, mu = datum.mu_m, lam = datum.lambda_m, gamma = -lam;
  const double delta = datum.delta_m;

  Matrix modes = Matrix::Zero(n_r, basis->L + 1);
  Matrix d1 = modes, d2 = modes;
  for (int i = 0; i < n_r; ++i) {
    const double r = grid->node(i);
    const double U = prof.U[i], dU = prof.dU[i];
    const double d2U = prof.d2U_at(r), d3U = prof.d3U_at(r);
    const double q = prof.q_at(r);
    const double V = datum.V_m.V[i], dV = datum.V_m.dV[i];
    const double d2V =
        (r < 1e-14) ? -(q + gamma) * V / N : -(N - 1) / r * dV - (q + gamma) * V;
    const double g = r * dU, dg = dU + r * d2U, d2g = 2 * d2U + r * d3U;
    modes(i, 0) = U;
    d1(i, 0) = dU;
    d2(i, 0) = d2U;
    modes(i, 1) = s * (V - delta * g);
    d1(i, 1) = s * (dV - delta * dg);
    d2(i, 1) = s * (d2V - delta * d2g);
  }

  PerturbedState st;
  st.s = s;
  st.datum = datum;
  st.basis = basis;
  Vector hcoef = Vector::Zero(basis->L + 1);
  hcoef[1] = s * delta;
  st.h_phi = make_perturbation(basis, hcoef);
  if (st.h_phi.floor <= 0) throw DomainCollapse("1 + h_phi touches zero");
  st.h_s_coeffs = st.h_phi.coeffs / std::sqrt(lam);
  st.h_s_coeffs[0] += 1.0 / std::sqrt(lam);
  st.phi_s = kernel_field(datum, basis, s);
  st.u_tilde =
      TensorField::from_jets(N, grid, basis, std::move(modes), std::move(d1), std::move(d2));

  st.residual_interior =
      apply_pullback_physical(st.u_tilde, st.h_phi, lam, mu, p).cwiseAbs().maxCoeff();
  const Vector bnd = st.u_tilde.d1.row(n_r - 1).transpose();  // D_t u_tilde(e_1,.) coefficients
  st.residual_boundary = (basis->cos_table.transpose() * bnd).cwiseAbs().maxCoeff();
  if (st.residual_boundary > 1e-10)
    throw SolverFailure("sign-convention audit failed: D_t u_tilde(e_1,.) does not vanish");
  return st;
}

ScalingReport residual_scaling_study(const BifurcationDatum& datum,
                                     const std::vector<double>& s_values,
                                     std::shared_ptr<const CosineBasis> basis) {
  if (s_values.size() < 2) throw InvalidParams("scaling study needs at least two s values");
  for (size_t i = 0; i + 1 < s_values.size(); ++i)
    if (!(s_values[i] > s_values[i + 1]) || !(s_values[i + 1] > 0))
      throw InvalidParams("s values must be strictly decreasing and positive");

  ScalingReport rep;
  for (double s : s_values) {
    PerturbedState st = build_first_order_state(s, datum, basis);
    rep.s.push_back(s);
    rep.residual_interior.push_back(st.residual_interior);
    rep.residual_boundary.push_back(st.residual_boundary);
  }
  const int n = static_cast<int>(rep.s.size());
  for (int i = 0; i + 1 < n; ++i)
    rep.pairwise_slopes.push_back(std::log(rep.residual_interior[i] / rep.residual_interior[i + 1]) /
                                  std::log(rep.s[i] / rep.s[i + 1]));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const double X = std::log(rep.s[i]), Y = std::log(rep.residual_interior[i]);
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
  }
  rep.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (rep.pairwise_slopes.back() < 0.5)
    throw FloorDominated("residuals plateau at grid error; refine the radial grid");
  return rep;
}

BoundaryCurve physical_boundary(const PerturbedState& state, int x_samples) {
  BoundaryCurve c;
  c.x.resize(x_samples);
  c.radius.resize(x_samples);
  c.w_boundary.resize(x_samples);
  const double p = state.datum.p, lam = state.datum.lambda_m;
  const double amp = std::pow(lam, -1.0 / (p - 2.0));
  const int last = static_cast<int>(state.u_tilde.modes.rows()) - 1;
  for (int k = 0; k < x_samples; ++k) {
    const double x = 2.0 * M_PI * k / x_samples;
    double hs = 0, ub = 0;
    for (int l = 0; l < state.h_s_coeffs.size(); ++l) {
      hs += state.h_s_coeffs[l] * std::cos(l * x);
      ub += state.u_tilde.modes(last, l) * std::cos(l * x);
    }
    c.x[k] = x;
    c.radius[k] = 1.0 / hs;
    c.w_boundary[k] = amp * ub;
  }
  return c;
}

CovarianceReport scaling_covariance_check(const TensorField& u, const PerturbationField& h,
                                          double lambda, double mu_m, double p) {
  const Matrix r_orig = apply_pullback_physical(u, h, lambda, mu_m, p);

  const double a = std::pow(lambda, -1.0 / (p - 2.0));
  TensorField u2 = u;
  u2.modes *= a;
  u2.d1 *= a;
  u2.d2 *= a;
  const double rl = std::sqrt(lambda);
  Vector c2 = h.coeffs / rl;
  c2[0] = (1.0 + h.coeffs[0]) / rl - 1.0;
  const PerturbationField h2 = make_perturbation(h.basis, std::move(c2));
  const Matrix r_tr = apply_pullback_physical(u2, h2, 1.0, mu_m, p);

  const double scale = std::pow(lambda, -(p - 1.0) / (p - 2.0));
  CovarianceReport rep;
  rep.residual_original = r_orig.cwiseAbs().maxCoeff();
  rep.residual_transformed = r_tr.cwiseAbs().maxCoeff();
  const double denom = std::max(scale * rep.residual_original, 1e-300);
  rep.rel_deviation = (r_tr - scale * r_orig).cwiseAbs().maxCoeff() / denom;
  return rep;
}

}  // namespace overdet
