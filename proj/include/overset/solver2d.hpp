#pragma once

#include <functional>
#include <optional>

#include "overset/coupling.hpp"
#include "overset/geometry.hpp"
#include "overset/solver1d.hpp"

namespace overset {

using Profile2D = std::function<Vector(double x, double y)>;

/// Flux A1 q_x + A2 q_y with its normal splittings at the x-boundaries.
struct System2D {
  HyperbolicSystem a1;
  SymMatrix a2;
  double rho_y = 0.0;  // spectral radius of A2

  static System2D make(const SymMatrix& a1, const SymMatrix& a2);
  int size() const { return a1.size(); }
};

/// Overset channel problem with interface penalties on x = b and x = c and
/// optional point penalties inside the overlap strip.
class Problem2D : public Problem {
 public:
  /// at_b must carry beta = -eta with A_n = -A1, at_c beta = 1 - eta with A_n = A1.
  static Problem2D make(const System2D& sys, const OversetGeometry2D& geo, double eta, InterfaceCoupling at_b,
                        InterfaceCoupling at_c, std::optional<OverlapCoupling> overlap, Profile2D ic,
                        bool allow_uncertified = false);
  /// Upwind couplings at both lines; sigma_overlap > 0 adds Sigma_u^m = sigma I.
  static Problem2D upwind(const System2D& sys, const OversetGeometry2D& geo, double eta, Profile2D ic,
                          double sigma_overlap = 0.0);

  void set_initial_v(Profile2D ic_v) { ic_v_ = std::move(ic_v); }
  /// Same problem without the overlap penalties.
  Problem2D without_overlap() const;

  int ncomp() const override { return sys_.size(); }
  SimState initial_state() const override;
  void rhs(const SimState& s, SimState& out) const override;
  using Problem::rhs;
  double stable_dt(double cfl) const override;
  DiagnosticsRecord diagnose(const SimState& s, const SimState& rate) const override;

  /// (1/M) sum_m P_m over the overlap points.
  double overlap_dissipation(const SimState& s) const;

  const OversetGeometry2D& geometry() const { return geo_; }
  const InterfaceCoupling& coupling_b() const { return cb_; }
  const InterfaceCoupling& coupling_c() const { return cc_; }
  const std::optional<OverlapCoupling>& overlap() const { return overlap_; }
  double eta() const { return eta_; }
  const EnergyContext& energy_context() const { return ctx_; }

 private:
  Problem2D() = default;

  System2D sys_;
  OversetGeometry2D geo_;
  double eta_ = 0.5;
  InterfaceCoupling cb_, cc_;
  std::optional<OverlapCoupling> overlap_;
  Profile2D ic_u_, ic_v_;
  Grid1D op_u_, op_v_;
  SymMatrix a1_abs_minus_;
  EnergyContext ctx_;
};

/// Reference on one grid covering [a',d] x [0,Ly]; the field lives in SimState::u.
class SingleDomainProblem2D : public Problem {
 public:
  SingleDomainProblem2D(const System2D& sys, Grid1D grid_x, PeriodicGrid grid_y, Profile2D ic);

  int ncomp() const override { return sys_.size(); }
  SimState initial_state() const override;
  void rhs(const SimState& s, SimState& out) const override;
  using Problem::rhs;
  double stable_dt(double cfl) const override;
  DiagnosticsRecord diagnose(const SimState& s, const SimState& rate) const override;

  const Grid1D& grid_x() const { return gx_; }
  const PeriodicGrid& grid_y() const { return gy_; }

 private:
  System2D sys_;
  Grid1D gx_;
  PeriodicGrid gy_;
  Profile2D ic_;
  SymMatrix a1_abs_minus_;
};

/// x-grid on [a',d] sharing every x-node of both component grids.
Grid1D reference_grid(const OversetGeometry2D& g);

}  // namespace overset
