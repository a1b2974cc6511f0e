#include "overset/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace overset {

const char* to_string(CouplingFailure f) {
  switch (f) {
    case CouplingFailure::none: return "none";
    case CouplingFailure::equality: return "equality";
    case CouplingFailure::psd: return "psd";
  }
  return "unknown";
}

namespace {

void require_same_size(const SymMatrix& a, const SymMatrix& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << "dimension mismatch: " << what << " (" << a.size() << " vs " << b.size() << ")";
    throw LinalgError(os.str());
  }
}

Vector largest_abs_eigenvector(const SymMatrix& m) {
  const EigenDecomp d = eig_sym(m);
  int best = 0;
  for (int k = 1; k < d.n; ++k) {
    if (std::abs(d.values[k]) > std::abs(d.values[best])) best = k;
  }
  return d.column(best);
}

}  // namespace

CouplingVerdict check_interface_coupling(const SymMatrix& a_n, double beta, const SymMatrix& sigma_u,
                                         const SymMatrix& sigma_v, double tol) {
  require_same_size(a_n, sigma_u, "A_n and Sigma_u");
  require_same_size(a_n, sigma_v, "A_n and Sigma_v");

  CouplingVerdict v;
  const SymMatrix flux = beta * a_n;
  v.scale = std::max({1.0, flux.frobenius_norm(), sigma_u.frobenius_norm(), sigma_v.frobenius_norm()});

  const SymMatrix defect = flux + sigma_u - sigma_v;
  v.equality_defect = defect.frobenius_norm();

  const SymMatrix m = 2.0 * sigma_v - flux;
  if (m.size() > 0) {
    const EigenDecomp d = eig_sym(m);
    v.min_eigenvalue = d.values.back();
    if (!is_psd(m, tol)) {
      v.failure = CouplingFailure::psd;
      v.witness = d.column(d.n - 1);
      std::ostringstream os;
      os << "2*Sigma_v - beta*A_n is not positive semidefinite (min eigenvalue " << v.min_eigenvalue << ")";
      v.reason = os.str();
    }
  }
  if (v.equality_defect > tol * v.scale) {
    v.failure = CouplingFailure::equality;
    v.witness = largest_abs_eigenvector(defect);
    std::ostringstream os;
    os << "beta*A_n + Sigma_u != Sigma_v (defect " << v.equality_defect << ")";
    v.reason = os.str();
  }
  v.pass = v.failure == CouplingFailure::none;
  return v;
}

InterfaceCoupling certify(InterfaceCoupling c, double tol) {
  c.verdict = check_interface_coupling(c.a_n, c.beta, c.sigma_u, c.sigma_v, tol);
  return c;
}

InterfaceCoupling make_upwind_coupling(const SymMatrix& a_n, double beta) {
  return make_dissipative_coupling(a_n, beta, SymMatrix(a_n.size()));
}

InterfaceCoupling make_dissipative_coupling(const SymMatrix& a_n, double beta, const SymMatrix& extra) {
  require_same_size(a_n, extra, "A_n and extra dissipation");
  const FluxSplit s = flux_split(beta * a_n);
  InterfaceCoupling c;
  c.sigma_u = s.abs_minus() + extra;
  c.sigma_v = s.plus + extra;
  c.beta = beta;
  c.a_n = a_n;
  return certify(std::move(c));
}

InterfaceCoupling complete_coupling(const SymMatrix& a_n, double beta, const SymMatrix& sigma_u) {
  require_same_size(a_n, sigma_u, "A_n and Sigma_u");
  InterfaceCoupling c;
  c.sigma_u = sigma_u;
  c.sigma_v = beta * a_n + sigma_u;
  c.beta = beta;
  c.a_n = a_n;
  return certify(std::move(c));
}

CouplingVerdict check_overlap_coupling(double eta, const SymMatrix& sigma_um, const SymMatrix& sigma_vm,
                                       double tol) {
  if (!(eta > 0.0 && eta < 1.0)) throw LinalgError("eta must lie in (0,1)");
  require_same_size(sigma_um, sigma_vm, "Sigma_u^m and Sigma_v^m");
  CouplingVerdict v;
  v.scale = std::max({1.0, sigma_um.frobenius_norm(), sigma_vm.frobenius_norm()});
  const SymMatrix defect = (1.0 - eta) * sigma_um - eta * sigma_vm;
  v.equality_defect = defect.frobenius_norm();
  if (sigma_um.size() > 0) {
    const EigenDecomp d = eig_sym(sigma_um);
    v.min_eigenvalue = d.values.back();
    if (!is_psd(sigma_um, tol)) {
      v.failure = CouplingFailure::psd;
      v.witness = d.column(d.n - 1);
      v.reason = "Sigma_u^m is not positive semidefinite";
    }
  }
  if (v.equality_defect > tol * v.scale) {
    v.failure = CouplingFailure::equality;
    v.witness = largest_abs_eigenvector(defect);
    std::ostringstream os;
    os << "(1-eta)*Sigma_u^m != eta*Sigma_v^m (defect " << v.equality_defect << ")";
    v.reason = os.str();
  }
  v.pass = v.failure == CouplingFailure::none;
  return v;
}

OverlapCoupling make_overlap_coupling(double eta, const SymMatrix& sigma_um) {
  if (!(eta > 0.0 && eta < 1.0)) throw LinalgError("eta must lie in (0,1)");
  OverlapCoupling c;
  c.sigma_um = sigma_um;
  c.sigma_vm = ((1.0 - eta) / eta) * sigma_um;
  c.eta = eta;
  c.verdict = check_overlap_coupling(eta, c.sigma_um, c.sigma_vm);
  return c;
}

double interface_quadratic_form(std::span<const double> u, std::span<const double> v,
                                const InterfaceCoupling& c) {
  const int n = c.a_n.size();
  Vector du(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) du[i] = u[i] - v[i];
  return c.beta * c.a_n.quadratic(u) - c.beta * c.a_n.quadratic(v) + 2.0 * c.sigma_u.bilinear(u, du) -
         2.0 * c.sigma_v.bilinear(v, du);
}

double interface_reduced_form(std::span<const double> u, std::span<const double> v,
                              const InterfaceCoupling& c) {
  const int n = c.a_n.size();
  Vector du(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) du[i] = u[i] - v[i];
  return c.sigma_u.quadratic(du) + c.sigma_v.quadratic(du);
}

double overlap_quadratic_form(std::span<const double> u, std::span<const double> v,
                              const OverlapCoupling& c) {
  const int n = c.sigma_um.size();
  Vector du(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) du[i] = u[i] - v[i];
  return 2.0 * (1.0 - c.eta) * c.sigma_um.bilinear(u, du) - 2.0 * c.eta * c.sigma_vm.bilinear(v, du);
}

SymMatrix coupling_matrix(const InterfaceCoupling& c) {
  const int n = c.a_n.size();
  SymMatrix m(2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      m.set(i, j, c.beta * c.a_n(i, j) + 2.0 * c.sigma_u(i, j));
      m.set(n + i, n + j, -c.beta * c.a_n(i, j) + 2.0 * c.sigma_v(i, j));
    }
    for (int j = 0; j < n; ++j) m.set(i, n + j, -(c.sigma_u(i, j) + c.sigma_v(i, j)));
  }
  return m;
}

}  // namespace overset
