#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace overdet {

// Chebyshev--Lobatto machinery on an interval [a,b], nodes stored in
// ascending order (node 0 = a, node n = b). Templated on the scalar type;
// everything downstream instantiates double.

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// n+1 Lobatto nodes on [a,b], ascending.
template <typename Scalar>
VectorX<Scalar> cheb_nodes(int n, Scalar a, Scalar b) {
  VectorX<Scalar> r(n + 1);
  for (int j = 0; j <= n; ++j) {
    // x_j = cos(j pi / n) descending; r = a + (b-a)(1-x)/2 ascending
    Scalar x = std::cos(Scalar(M_PI) * Scalar(j) / Scalar(n));
    r[j] = a + (b - a) * (Scalar(1) - x) / Scalar(2);
  }
  r[0] = a;
  r[n] = b;
  return r;
}

/// First-derivative collocation matrix matching cheb_nodes(n, a, b).
template <typename Scalar>
MatrixX<Scalar> cheb_diff(int n, Scalar a, Scalar b) {
  // Trefethen's formula on x_j = cos(j pi / n); chain rule dx/dr = -2/(b-a).
  MatrixX<Scalar> D(n + 1, n + 1);
  VectorX<Scalar> x(n + 1), c(n + 1);
  for (int j = 0; j <= n; ++j) {
    x[j] = std::cos(Scalar(M_PI) * Scalar(j) / Scalar(n));
    c[j] = (j == 0 || j == n) ? Scalar(2) : Scalar(1);
    if (j % 2 == 1) c[j] = -c[j];
  }
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      if (i != j) D(i, j) = (c[i] / c[j]) / (x[i] - x[j]);
  for (int i = 0; i <= n; ++i) {
    Scalar s = 0;
    for (int j = 0; j <= n; ++j)
      if (i != j) s += D(i, j);
    D(i, i) = -s;  // negative row sums: exact on constants
  }
  return D * (Scalar(-2) / (b - a));
}

/// Clenshaw--Curtis quadrature weights for cheb_nodes(n, a, b).
template <typename Scalar>
VectorX<Scalar> cheb_weights(int n, Scalar a, Scalar b) {
  VectorX<Scalar> w = VectorX<Scalar>::Zero(n + 1);
  const Scalar pi = Scalar(M_PI);
  if (n % 2 == 0) {
    w[0] = w[n] = Scalar(1) / Scalar(n * n - 1);
    for (int i = 1; i < n; ++i) {
      Scalar theta = pi * Scalar(i) / Scalar(n);
      Scalar v = 1;
      for (int k = 1; k <= n / 2 - 1; ++k)
        v -= Scalar(2) * std::cos(Scalar(2 * k) * theta) / Scalar(4 * k * k - 1);
      v -= std::cos(Scalar(n) * theta) / Scalar(n * n - 1);
      w[i] = Scalar(2) * v / Scalar(n);
    }
  } else {
    w[0] = w[n] = Scalar(1) / Scalar(n * n);
    for (int i = 1; i < n; ++i) {
      Scalar theta = pi * Scalar(i) / Scalar(n);
      Scalar v = 1;
      for (int k = 1; k <= (n - 1) / 2; ++k)
        v -= Scalar(2) * std::cos(Scalar(2 * k) * theta) / Scalar(4 * k * k - 1);
      w[i] = Scalar(2) * v / Scalar(n);
    }
  }
  return w * ((b - a) / Scalar(2));
}

}  // namespace overdet
