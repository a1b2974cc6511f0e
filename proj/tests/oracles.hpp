#pragma once

// Independent reference computations used by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "overset/linalg.hpp"

namespace oracle {

using overset::SymMatrix;
using overset::Vector;

inline SymMatrix random_sym(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  SymMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, u(rng));
  return m;
}

inline Vector random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (double& x : v) x = g(rng);
  return v;
}

/// B B^T with B n x k Gaussian: PSD of rank <= k.
inline SymMatrix random_psd(std::mt19937_64& rng, int n, int rank = -1) {
  if (rank < 0) rank = n;
  SymMatrix m(n);
  for (int r = 0; r < rank; ++r) m += SymMatrix::outer(random_vec(rng, n));
  return m;
}

/// Symmetric matrix with at least one positive and one negative eigenvalue.
inline SymMatrix random_mixed(std::mt19937_64& rng, int n) {
  for (;;) {
    SymMatrix a = random_sym(rng, n);
    double lo = INFINITY, hi = -INFINITY;
    for (int k = 0; k < 200; ++k) {
      Vector x = random_vec(rng, n);
      const double q = a.quadratic(x) / overset::dot(x, x);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    if (lo < -0.05 && hi > 0.05) return a;
  }
}

inline double quad(const SymMatrix& m, const Vector& x) {
  double s = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) s += x[i] * m(i, j) * x[j];
  return s;
}

/// beta u^T A u - beta v^T A v + 2 u^T Su (u - v) + 2 v^T Sv (v - u), expanded term by term.
inline double interface_form(const SymMatrix& a, double beta, const SymMatrix& su, const SymMatrix& sv,
                             const Vector& u, const Vector& v) {
  const int n = a.size();
  double s = beta * quad(a, u) - beta * quad(a, v);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      s += 2.0 * u[i] * su(i, j) * (u[j] - v[j]);
      s += 2.0 * v[i] * sv(i, j) * (v[j] - u[j]);
    }
  return s;
}

/// Smallest eigenvalue of [[p, q], [q, r]], evaluated without cancellation.
inline double min_eig_2x2(double p, double q, double r) {
  const double m = 0.5 * (p + r);
  const double d = std::hypot(0.5 * (p - r), q);
  if (m <= 0.0) return m - d;
  return (p * r - q * q) / (m + d);
}

/// Random-direction search for the minimum of the interface form on the unit
/// sphere.  Each sample takes a direction x in the "mean" subspace (u = v) and
/// a direction y in the "jump" subspace (u = -v) and minimises exactly over
/// their span, so the cross term of an off-equality coupling is resolved even
/// when it is tiny.  Returns the smallest value found.
inline double brute_force_min(const SymMatrix& a, double beta, const SymMatrix& su, const SymMatrix& sv,
                              std::mt19937_64& rng, int samples = 10000) {
  const int n = a.size();
  const double r2 = 1.0 / std::sqrt(2.0);
  auto form = [&](const Vector& z) {
    Vector u(z.begin(), z.begin() + n), v(z.begin() + n, z.end());
    return interface_form(a, beta, su, sv, u, v);
  };
  double best = INFINITY;
  for (int s = 0; s < samples; ++s) {
    Vector x = random_vec(rng, n), y = random_vec(rng, n);
    const double nx = std::sqrt(overset::dot(x, x)), ny = std::sqrt(overset::dot(y, y));
    Vector z1(2 * n), z2(2 * n), z12(2 * n);
    for (int i = 0; i < n; ++i) {
      z1[i] = z1[n + i] = r2 * x[i] / nx;
      z2[i] = r2 * y[i] / ny;
      z2[n + i] = -r2 * y[i] / ny;
    }
    for (int i = 0; i < 2 * n; ++i) z12[i] = z1[i] + z2[i];
    const double p = form(z1), r = form(z2);
    const double q = 0.5 * (form(z12) - p - r);
    best = std::min(best, min_eig_2x2(p, q, r));
  }
  return best;
}

inline double fro(const SymMatrix& m) {
  double s = 0.0;
  for (int i = 0; i < m.size(); ++i)
    for (int j = 0; j < m.size(); ++j) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

}  // namespace oracle
