#pragma once

// Test-only oracles, deliberately independent of the library's solvers:
//  - roots of tan r = r by bisection (critical points of sin r / r),
//  - fixed-step RK4 trajectories with Richardson-extrapolated event locations,
//  - a shooting oracle for the radial Dirichlet eigenproblem.

#include <functional>
#include <vector>

namespace oracle {

/// k-th positive root of tan r = r (bisection on r cos r - sin r).
double tan_equals_r_root(int k);

struct TrajectoryOracle {
  std::vector<double> zeros;
  std::vector<double> crits;
  std::vector<double> u_at_crit;
};

/// Fixed-step RK4 run of u'' + (N-1)/r u' + |u|^{p-2} u = 0, u(0)=1, u'(0)=0;
/// events located by bisection with local re-integration.
TrajectoryOracle rk4_trajectory(int N, double p, double r_max, double h);

/// Events from runs at h and h/2, Richardson-extrapolated at order 4.
TrajectoryOracle rk4_richardson(int N, double p, double r_max, double h);

/// u(r) by fixed-step RK4 (order-4 accurate at step h).
double rk4_u_at(int N, double p, double r, double h);

/// Sampled u on [0, r_hi] at spacing h with cubic Lagrange lookup, so the
/// shooting oracle's potential evaluations stay cheap.
struct UTable {
  double h = 0;
  std::vector<double> u;  // u(i h)
  double at(double r) const;
};
UTable rk4_u_table(int N, double p, double r_hi, double h);

struct ShootResult {
  double gamma = 0;
  double dV_at_1 = 0;  // V'(1) under sup-normalization, V > 0 on (0,1) lobes
  int interior_zeros = 0;
};

/// j-th Dirichlet eigenvalue of V'' + (N-1)/r V' + (q + gamma) V = 0,
/// V'(0) = 0, V(1) = 0, found by shooting: bisection on the number of
/// interior zeros of the IVP solution with V(0) = 1.
ShootResult shoot_eigenvalue(const std::function<double(double)>& q, int N, int j, double h);

}  // namespace oracle
