#pragma once

#include <span>
#include <string>

#include "overset/linalg.hpp"

namespace overset {

inline constexpr double kCouplingTol = 1e-12;

enum class CouplingFailure { none, equality, psd };

const char* to_string(CouplingFailure f);

struct CouplingVerdict {
  bool pass = false;
  CouplingFailure failure = CouplingFailure::none;
  std::string reason;
  // PSD failure: eigenvector x with x^T M x < 0.  Equality failure: the
  // eigenvector of the defect matrix with the largest |eigenvalue|.
  Vector witness;
  double equality_defect = 0.0;  // Frobenius norm of the defect
  double min_eigenvalue = 0.0;   // of the PSD-tested matrix
  double scale = 1.0;
};

/// Penalty pair at one interface.  beta and A_n follow the geometry's
/// convention for that interface; this type only validates the tuple.
struct InterfaceCoupling {
  SymMatrix sigma_u;
  SymMatrix sigma_v;
  double beta = 0.5;
  SymMatrix a_n;
  CouplingVerdict verdict;

  bool certified() const { return verdict.pass; }
  /// beta * A_n
  SymMatrix flux() const { return beta * a_n; }
};

struct OverlapCoupling {
  SymMatrix sigma_um;
  SymMatrix sigma_vm;
  double eta = 0.5;
  CouplingVerdict verdict;

  bool certified() const { return verdict.pass; }
};

/// Pass iff beta A_n + Su = Sv and 2 Sv - beta A_n >= 0, both within
/// tol * max(1, largest Frobenius norm involved).
CouplingVerdict check_interface_coupling(const SymMatrix& a_n, double beta, const SymMatrix& sigma_u,
                                         const SymMatrix& sigma_v, double tol = kCouplingTol);

/// With B = beta A_n: Su = |B-|, Sv = B+.  beta = 1/2 gives Su = |A-|/2, Sv = A+/2.
InterfaceCoupling make_upwind_coupling(const SymMatrix& a_n, double beta = 0.5);

/// Upwind pair plus extra dissipation S >= 0 on both sides: Su = |B-| + S, Sv = B+ + S.
InterfaceCoupling make_dissipative_coupling(const SymMatrix& a_n, double beta, const SymMatrix& extra);

/// Sv := beta A_n + Su, verdict attached.
InterfaceCoupling complete_coupling(const SymMatrix& a_n, double beta, const SymMatrix& sigma_u);

/// Rebuild the verdict for a hand-assembled coupling.
InterfaceCoupling certify(InterfaceCoupling c, double tol = kCouplingTol);

/// Pass iff (1-eta) Sum = eta Svm and Sum >= 0.  Throws for eta outside (0,1).
CouplingVerdict check_overlap_coupling(double eta, const SymMatrix& sigma_um, const SymMatrix& sigma_vm,
                                       double tol = kCouplingTol);

/// Svm := (1-eta)/eta Sum.
OverlapCoupling make_overlap_coupling(double eta, const SymMatrix& sigma_um);

/// beta u^T A_n u - beta v^T A_n v + 2 u^T Su (u-v) + 2 v^T Sv (v-u)
double interface_quadratic_form(std::span<const double> u, std::span<const double> v,
                                const InterfaceCoupling& c);

/// (u-v)^T (Su + Sv) (u-v); equals the full form when certified.
double interface_reduced_form(std::span<const double> u, std::span<const double> v,
                              const InterfaceCoupling& c);

/// 2(1-eta) u^T Sum (u-v) + 2 eta v^T Svm (v-u)
double overlap_quadratic_form(std::span<const double> u, std::span<const double> v,
                              const OverlapCoupling& c);

/// The 2n x 2n matrix M with [u;v]^T M [u;v] equal to the interface form.
SymMatrix coupling_matrix(const InterfaceCoupling& c);

}  // namespace overset
