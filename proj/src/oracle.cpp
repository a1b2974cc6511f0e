#include "overset/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace overset {

double exact_scalar(double x, double t, double alpha, const ScalarProfile& omega0, double a, double d) {
  const double foot = x - alpha * t;
  if (foot < a || foot > d) return 0.0;
  return omega0(foot);
}

Vector exact_system_1d(double x, double t, const HyperbolicSystem& sys, const VectorProfile& omega0, double a,
                       double d) {
  const int n = sys.size();
  const EigenDecomp& e = sys.eig;
  Vector w(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const double foot = x - e.values[j] * t;
    if (foot < a || foot > d) continue;
    const Vector q = omega0(foot);
    if (static_cast<int>(q.size()) != n) throw std::invalid_argument("initial profile has wrong size");
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += e.p(i, j) * q[i];
    w[j] = s;
  }
  return from_characteristic(w, e);
}

Vector exact_plane_wave_2d(double x, double y, double t, const SymMatrix& a1, const SymMatrix& a2, double k1,
                           double k2, const ScalarProfile& g, std::span<const double> weights) {
  const EigenDecomp e = eig_sym(normal_matrix(a1, a2, k1, k2));
  if (static_cast<int>(weights.size()) != e.n) throw std::invalid_argument("one mode weight per eigenpair required");
  const double xi = k1 * x + k2 * y;
  Vector q(static_cast<std::size_t>(e.n), 0.0);
  for (int j = 0; j < e.n; ++j) {
    const double amp = weights[j] * g(xi - e.values[j] * t);
    for (int i = 0; i < e.n; ++i) q[i] += amp * e.p(i, j);
  }
  return q;
}

ScalarProfile gaussian(double x0, double sigma, double amplitude) {
  return [=](double x) {
    const double z = (x - x0) / sigma;
    return amplitude * std::exp(-z * z);
  };
}

}  // namespace overset
