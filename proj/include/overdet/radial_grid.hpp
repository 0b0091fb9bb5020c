#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

#include "overdet/chebyshev.hpp"

namespace overdet {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One Chebyshev--Lobatto panel [lo, hi] with n+1 local nodes.
struct Panel {
  double lo = 0, hi = 1;
  int n = 0;       // polynomial degree (n+1 nodes)
  int offset = 0;  // global index of local node 0
  Matrix D1, D2;   // collocation derivative matrices on local nodes
  Vector cc_w;     // Clenshaw--Curtis weights on local nodes
};

// Piecewise Chebyshev--Lobatto grid on [0,1]. Panel boundaries sit at the
// interior zeros of the radial profile, where |U|^{p-2} loses smoothness;
// within a panel everything is analytic, so collocation and quadrature keep
// spectral accuracy. Interface nodes are shared between adjacent panels.
class RadialGrid {
public:
  RadialGrid(const std::vector<double>& interior_breaks, int n_total);

  int size() const { return static_cast<int>(nodes_.size()); }
  const Vector& nodes() const { return nodes_; }
  double node(int i) const { return nodes_[i]; }
  const std::vector<Panel>& panels() const { return panels_; }
  const std::vector<double>& breaks() const { return breaks_; }

  /// Global Clenshaw--Curtis weights (interface nodes carry both panels' share).
  const Vector& weights() const { return weights_; }
  double integrate(const Vector& values) const { return weights_.dot(values); }

  /// Per-panel spectral derivative of nodal values; interface nodes take the
  /// average of the two one-sided values (they agree for C^1 data).
  Vector derivative(const Vector& values) const;
  Vector second_derivative(const Vector& values) const;

  /// True if global node i is a panel interface or an endpoint of [0,1].
  bool is_panel_boundary(int i) const;

private:
  std::vector<Panel> panels_;
  std::vector<double> breaks_;  // 0, interior..., 1
  Vector nodes_, weights_;
};

std::shared_ptr<const RadialGrid> make_radial_grid(const std::vector<double>& interior_breaks,
                                                   int n_total);

/// Composite Simpson rule with n (even) subintervals.
double composite_simpson(const std::function<double(double)>& f, double a, double b, int n);

/// Simpson rule applied per panel; node budget distributed by panel length.
double panel_simpson(const std::function<double(double)>& f, const std::vector<double>& breaks,
                     int n_total);

/// Clenshaw--Curtis applied per panel; node budget distributed by panel length.
double panel_clenshaw_curtis(const std::function<double(double)>& f,
                             const std::vector<double>& breaks, int n_total);

}  // namespace overdet
