#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "overdet/radial_grid.hpp"

namespace overdet {

/// Problem data for the radial initial value problem
///   u'' + (N-1)/r u' + |u|^{p-2} u = 0,   u(0) = 1, u'(0) = 0.
struct ProblemParams {
  int N = 3;
  double p = 3.0;
  double r_max = 50.0;
  double tol_ode = 1e-10;
  double tol_root = 1e-12;
  bool oracle_mode = false;  // admits the linear limit p = 2 for oracle tests

  /// Throws InvalidParams unless N, p are in the admissible range
  /// (2 < p < 2N/(N-2) for N >= 3, p > 2 for N = 2; p = 2 only in oracle mode)
  /// and horizon/tolerances are positive.
  void validate() const;
};

/// f = |u|^{p-2} u and its derivative df = (p-1)|u|^{p-2}.
struct Nonlinearity {
  double f;
  double df;
};
Nonlinearity nonlinearity(double u, double p);

struct CriticalPoint {
  double r;  // mu_m
  double u;  // u(mu_m), nonzero and alternating in sign
};

/// Dense trajectory of (u, u') on [0, r_max] with located zeros and critical
/// points. Evaluation anywhere in [0, r_max] goes through the integrator's
/// continuous extension (fifth-order pair, fourth-order interpolant).
class OdeSolution {
public:
  ProblemParams params;
  Vector nodes;      // accepted step points, strictly increasing, nodes[0] = 0
  Vector u_values;   // u at nodes
  Vector du_values;  // u' at nodes
  std::vector<double> zeros;             // r_1 < r_2 < ...
  std::vector<CriticalPoint> criticals;  // mu_1 < mu_2 < ...

  double u(double r) const;
  double du(double r) const;
  double d2u(double r) const;  // from the ODE
  double d3u(double r) const;  // from the differentiated ODE

  // internal dense representation (one record per accepted step)
  struct Segment {
    double r0, h;
    Eigen::Vector2d c1, c2, c3, c4, c5;
    Eigen::Vector2d eval(double theta) const;
  };
  std::vector<Segment> segments;
  double series_start = 1e-6;  // below this, the Taylor seed is used

  Eigen::Vector2d eval(double r) const;  // (u, u')
};

/// Integrates the IVP with an adaptive Dormand--Prince 5(4) pair, locating and
/// refining every sign change of u and u' on [0, r_max].
/// Throws StepFailure if the controller stalls, HorizonTooShort if no critical
/// point lies inside the horizon.
OdeSolution integrate_ivp(const ProblemParams& params);

/// First m_required critical points with |u(mu_m)| > tol_root, interlacing
/// against the zeros verified. Throws HorizonTooShort / DegenerateCritical.
std::vector<CriticalPoint> locate_critical_points(const OdeSolution& sol, int m_required);

/// Rescaled profile U_m(r) = u(mu_m r) on a piecewise Chebyshev grid over
/// [0,1] (panels split at the interior zeros of U_m), with the boundary data
/// c_m = U_m(1) and U_m''(1) recorded.
struct RadialProfile {
  int m = 0;
  int N = 3;
  double p = 3.0;
  double mu_m = 0;
  double c_m = 0;
  double d2U_at_1 = 0;  // = -mu_m^2 |c_m|^{p-2} c_m
  std::shared_ptr<const OdeSolution> sol;
  std::shared_ptr<const RadialGrid> grid;
  Vector U;   // at grid nodes
  Vector dU;  // at grid nodes
  std::vector<double> interior_zeros;  // zeros of U_m in (0,1)

  // dense evaluation through the trajectory; valid for r in [0, r_max/mu_m],
  // in particular beyond r = 1 (needed when 1 + h < 1)
  double U_at(double r) const { return sol->u(mu_m * r); }
  double dU_at(double r) const { return mu_m * sol->du(mu_m * r); }
  double d2U_at(double r) const { return mu_m * mu_m * sol->d2u(mu_m * r); }
  double d3U_at(double r) const { return mu_m * mu_m * mu_m * sol->d3u(mu_m * r); }
  /// q(r) = mu_m^2 (p-1) |U_m(r)|^{p-2}, the linearized potential.
  double q_at(double r) const;
};

RadialProfile build_profile(const OdeSolution& sol, int m, int n_grid);
RadialProfile build_profile(std::shared_ptr<const OdeSolution> sol, int m, int n_grid);

/// Least-squares fit of u(r) ~ 1 + a r^2 + b r^4 on dense samples near the
/// origin; returns 2a, the fitted u''(0) (exact value is -1/N).
double fit_origin_curvature(const OdeSolution& sol);

}  // namespace overdet
