#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "overset/coupling.hpp"
#include "overset/diagnostics.hpp"
#include "overset/geometry.hpp"
#include "overset/linalg.hpp"
#include "overset/state.hpp"

namespace overset {

using Profile1D = std::function<Vector(double x)>;

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a run produces a non-finite value.
class NumericalAbort : public SolverError {
 public:
  NumericalAbort(const std::string& what, int step) : SolverError(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Semi-discrete problem driven by run_simulation.
class Problem {
 public:
  virtual ~Problem() = default;
  virtual int ncomp() const = 0;
  virtual SimState initial_state() const = 0;
  virtual void rhs(const SimState& s, SimState& out) const = 0;
  virtual double stable_dt(double cfl) const = 0;
  /// Everything except err_u / err_v, which the driver fills.
  virtual DiagnosticsRecord diagnose(const SimState& s, const SimState& rate) const = 0;

  SimState rhs(const SimState& s) const;
};

enum class CouplingMode { characteristic, penalty };

/// Two-grid 1D problem on an OversetGeometry1D.
class Problem1D : public Problem {
 public:
  /// Characteristic coupling imposed by SAT; strong = true replaces the
  /// incoming characteristic rates at the interface nodes instead.
  static Problem1D characteristic(const HyperbolicSystem& sys, const OversetGeometry1D& geo, Profile1D ic,
                                  bool strong = false);
  /// Throws SolverError for alpha <= 0.
  static Problem1D scalar_characteristic(double alpha, const OversetGeometry1D& geo,
                                         const std::function<double(double)>& ic);
  /// Penalty coupling at b and c.  Couplings must be certified unless
  /// allow_uncertified is set.
  static Problem1D penalty(const HyperbolicSystem& sys, const OversetGeometry1D& geo, double eta,
                           InterfaceCoupling at_b, InterfaceCoupling at_c, Profile1D ic,
                           bool allow_uncertified = false);

  /// Separate initial data on gridV.
  void set_initial_v(Profile1D ic_v) { ic_v_ = std::move(ic_v); }
  /// eta used for the composite energy in characteristic mode.
  void set_diagnostic_eta(double eta);

  int ncomp() const override { return sys_.size(); }
  SimState initial_state() const override;
  void rhs(const SimState& s, SimState& out) const override;
  using Problem::rhs;
  double stable_dt(double cfl) const override;
  DiagnosticsRecord diagnose(const SimState& s, const SimState& rate) const override;

  CouplingMode mode() const { return mode_; }
  bool strong() const { return strong_; }
  double eta() const { return eta_; }
  const HyperbolicSystem& system() const { return sys_; }
  const OversetGeometry1D& geometry() const { return geo_; }
  const Grid1D& operator_u() const { return op_u_; }
  const Grid1D& operator_v() const { return op_v_; }
  const std::optional<InterfaceCoupling>& coupling_b() const { return cb_; }
  const std::optional<InterfaceCoupling>& coupling_c() const { return cc_; }
  const EnergyContext& energy_context() const { return ctx_; }

 private:
  Problem1D() = default;

  HyperbolicSystem sys_;
  OversetGeometry1D geo_;
  CouplingMode mode_ = CouplingMode::characteristic;
  bool strong_ = false;
  double eta_ = 0.5;
  std::optional<InterfaceCoupling> cb_, cc_;
  Profile1D ic_u_, ic_v_;
  Grid1D op_u_, op_v_;
  EnergyContext ctx_;
};

/// Reference problem on one grid covering [a,d]; the field lives in SimState::u.
class SingleDomainProblem1D : public Problem {
 public:
  SingleDomainProblem1D(const HyperbolicSystem& sys, Grid1D grid, Profile1D ic);

  int ncomp() const override { return sys_.size(); }
  SimState initial_state() const override;
  void rhs(const SimState& s, SimState& out) const override;
  using Problem::rhs;
  double stable_dt(double cfl) const override;
  DiagnosticsRecord diagnose(const SimState& s, const SimState& rate) const override;

  const Grid1D& grid() const { return grid_; }

 private:
  HyperbolicSystem sys_;
  Grid1D grid_;
  Profile1D ic_;
};

/// Single-domain grid on [a,d] whose nodes include every node of both component grids.
Grid1D reference_grid(const OversetGeometry1D& g);

/// (A (x) I) applied node by node: out_i = A q_i.
void apply_node_matrix(const SymMatrix& a, std::span<const double> q, int ncomp, std::span<double> out);

using RhsFunction = std::function<void(const SimState&, SimState&)>;
using StageObserver = std::function<void(const SimState& stage, const SimState& rate, int stage_index)>;

/// Classical four-stage Runge-Kutta.  Throws std::invalid_argument for dt <= 0.
SimState step_rk4(const SimState& s, double dt, const RhsFunction& rhs, const StageObserver& observer = {});

struct RunOptions {
  /// Called for every stage of every step, with the step index.
  std::function<void(const SimState& stage, const SimState& rate, int step, int stage_index)> stage_observer;
  std::function<void(const DiagnosticsRecord&)> step_observer;
  /// Advanced in lock step; err_u / err_v come from equivalence against it.
  const Problem* reference = nullptr;
  /// Error against an exact solution; used when no reference problem is set.
  std::function<EquivalenceError(const SimState&)> exact_error;
  /// Equivalence against the reference problem's state.
  std::function<EquivalenceError(const SimState&, const SimState&)> reference_error;
};

struct RunResult {
  SimState state;
  SimState reference_state;
  DiagnosticsSeries series;
  int steps = 0;
};

/// Steps from the initial state to exactly t = T (last step shortened),
/// recording diagnostics at t = 0 and after every step.
RunResult run_simulation(const Problem& problem, double T, double dt, const RunOptions& options = {});

}  // namespace overset
