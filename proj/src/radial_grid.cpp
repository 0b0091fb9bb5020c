#include "overdet/radial_grid.hpp"

#include <algorithm>
#include <cmath>

#include "overdet/errors.hpp"

namespace overdet {

namespace {

// Split a total node budget across panels proportionally to panel length,
// with a floor that keeps every panel spectrally useful.
std::vector<int> distribute_degrees(const std::vector<double>& breaks, int n_total) {
  const int n_panels = static_cast<int>(breaks.size()) - 1;
  std::vector<int> deg(n_panels);
  const double total_len = breaks.back() - breaks.front();
  for (int k = 0; k < n_panels; ++k) {
    double len = breaks[k + 1] - breaks[k];
    deg[k] = std::max(16, static_cast<int>(std::llround((n_total - 1) * len / total_len)));
  }
  return deg;
}

}  // namespace

RadialGrid::RadialGrid(const std::vector<double>& interior_breaks, int n_total) {
  if (n_total < 17) throw GridTooCoarse("radial grid needs at least 17 nodes");
  breaks_.push_back(0.0);
  for (double b : interior_breaks) {
    if (!(b > breaks_.back() && b < 1.0))
      throw InvalidParams("panel breaks must be strictly increasing inside (0,1)");
    breaks_.push_back(b);
  }
  breaks_.push_back(1.0);

  const std::vector<int> deg = distribute_degrees(breaks_, n_total);
  int total = 1;
  for (int d : deg) total += d;
  nodes_.resize(total);
  weights_ = Vector::Zero(total);

  int offset = 0;
  for (size_t k = 0; k + 1 < breaks_.size(); ++k) {
    Panel p;
    p.lo = breaks_[k];
    p.hi = breaks_[k + 1];
    p.n = deg[k];
    p.offset = offset;
    Vector local = cheb_nodes<double>(p.n, p.lo, p.hi);
    p.D1 = cheb_diff<double>(p.n, p.lo, p.hi);
    p.D2 = p.D1 * p.D1;
    p.cc_w = cheb_weights<double>(p.n, p.lo, p.hi);
    for (int j = 0; j <= p.n; ++j) {
      nodes_[offset + j] = local[j];
      weights_[offset + j] += p.cc_w[j];
    }
    offset += p.n;
    panels_.push_back(std::move(p));
  }
}

Vector RadialGrid::derivative(const Vector& values) const {
  Vector out = Vector::Zero(size());
  Vector hits = Vector::Zero(size());
  for (const Panel& p : panels_) {
    Vector local = values.segment(p.offset, p.n + 1);
    Vector d = p.D1 * local;
    for (int j = 0; j <= p.n; ++j) {
      out[p.offset + j] += d[j];
      hits[p.offset + j] += 1.0;
    }
  }
  return out.cwiseQuotient(hits);
}

Vector RadialGrid::second_derivative(const Vector& values) const {
  Vector out = Vector::Zero(size());
  Vector hits = Vector::Zero(size());
  for (const Panel& p : panels_) {
    Vector local = values.segment(p.offset, p.n + 1);
    Vector d = p.D2 * local;
    for (int j = 0; j <= p.n; ++j) {
      out[p.offset + j] += d[j];
      hits[p.offset + j] += 1.0;
    }
  }
  return out.cwiseQuotient(hits);
}

bool RadialGrid::is_panel_boundary(int i) const {
  for (const Panel& p : panels_)
    if (i == p.offset || i == p.offset + p.n) return true;
  return false;
}

std::shared_ptr<const RadialGrid> make_radial_grid(const std::vector<double>& interior_breaks,
                                                   int n_total) {
  return std::make_shared<const RadialGrid>(interior_breaks, n_total);
}

double composite_simpson(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2 == 1) ++n;
  if (n < 2) n = 2;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

namespace {

// Quintic smoothstep pulled back onto a panel. Its double zeros of the
// derivative at both panel ends absorb the |r - rho|^{p-2} endpoint
// singularities that the potential carries at the profile zeros for
// non-integer p < 4; on analytic integrands it is just an analytic change of
// variables, so nothing is lost in the smooth case.
double graded_map(double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); }
double graded_map_d(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }

std::function<double(double)> graded_integrand(const std::function<double(double)>& f,
                                               double a, double b) {
  return [&f, a, b](double t) {
    return f(a + (b - a) * graded_map(t)) * (b - a) * graded_map_d(t);
  };
}

}  // namespace

double panel_simpson(const std::function<double(double)>& f, const std::vector<double>& breaks,
                     int n_total) {
  const double total_len = breaks.back() - breaks.front();
  double s = 0;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    double len = breaks[k + 1] - breaks[k];
    int n = std::max(32, static_cast<int>(std::llround(n_total * len / total_len)));
    s += composite_simpson(graded_integrand(f, breaks[k], breaks[k + 1]), 0.0, 1.0, n);
  }
  return s;
}

double panel_clenshaw_curtis(const std::function<double(double)>& f,
                             const std::vector<double>& breaks, int n_total) {
  const double total_len = breaks.back() - breaks.front();
  double s = 0;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) {
    double len = breaks[k + 1] - breaks[k];
    int n = std::max(32, static_cast<int>(std::llround(n_total * len / total_len)));
    auto g = graded_integrand(f, breaks[k], breaks[k + 1]);
    Vector nodes = cheb_nodes<double>(n, 0.0, 1.0);
    Vector w = cheb_weights<double>(n, 0.0, 1.0);
    for (int j = 0; j <= n; ++j) s += w[j] * g(nodes[j]);
  }
  return s;
}

}  // namespace overdet
