#include "overset/solver1d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace overset {

SimState Problem::rhs(const SimState& s) const {
  SimState out = s.zeros_like();
  rhs(s, out);
  return out;
}

void apply_node_matrix(const SymMatrix& a, std::span<const double> q, int ncomp, std::span<double> out) {
  const std::size_t nodes = q.size() / static_cast<std::size_t>(ncomp);
  if (ncomp == 1) {
    const double s = a(0, 0);
    for (std::size_t i = 0; i < nodes; ++i) out[i] = s * q[i];
    return;
  }
  for (std::size_t i = 0; i < nodes; ++i) {
    a.apply_into(q.subspan(i * ncomp, ncomp), out.subspan(i * ncomp, ncomp));
  }
}

namespace {

/// out -= scale * M q
void sub_scaled(std::span<double> out, double scale, const SymMatrix& m, std::span<const double> q) {
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += m(i, j) * q[j];
    out[i] -= scale * s;
  }
}

Vector diff(std::span<const double> p, std::span<const double> q) {
  Vector d(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) d[i] = p[i] - q[i];
  return d;
}

/// -A D q on one grid
void interior(const Grid1D& op, const SymMatrix& a, std::span<const double> q, int ncomp, std::span<double> out,
              Vector& scratch) {
  scratch.resize(q.size());
  op.derivative(q, ncomp, scratch);
  apply_node_matrix(a, scratch, ncomp, out);
  for (double& x : out) x = -x;
}

void fill(std::span<double> field, const Grid1D& grid, int ncomp, const Profile1D& ic, const char* which) {
  for (int i = 0; i < grid.size(); ++i) {
    const Vector q = ic(grid.x[i]);
    if (static_cast<int>(q.size()) != ncomp) {
      throw SolverError(std::string("initial condition on ") + which + " has wrong size");
    }
    std::copy(q.begin(), q.end(), field.begin() + static_cast<std::ptrdiff_t>(i) * ncomp);
  }
}

double max_eig(const SymMatrix& m) { return m.size() == 0 ? 0.0 : eig_sym(m).values.front(); }

Vector apply(const SymMatrix& m, std::span<const double> q) { return m.apply(q); }

void check_convention(const InterfaceCoupling& c, const SymMatrix& a, double beta, const char* where) {
  if (c.a_n.size() != a.size() || c.sigma_u.size() != a.size() || c.sigma_v.size() != a.size()) {
    throw SolverError(std::string("coupling at ") + where + " has the wrong dimension");
  }
  const double scale = std::max(1.0, a.frobenius_norm());
  if (std::abs(c.beta - beta) > 1e-12 || (c.a_n - a).frobenius_norm() > 1e-12 * scale) {
    std::ostringstream os;
    os << "coupling at " << where << " must use beta = " << beta << " and A_n = A";
    throw SolverError(os.str());
  }
}

}  // namespace

Problem1D Problem1D::characteristic(const HyperbolicSystem& sys, const OversetGeometry1D& geo, Profile1D ic,
                                    bool strong) {
  Problem1D p;
  p.sys_ = sys;
  p.geo_ = geo;
  p.mode_ = CouplingMode::characteristic;
  p.strong_ = strong;
  p.ic_u_ = ic;
  p.ic_v_ = std::move(ic);
  p.op_u_ = geo.grid_u;
  p.op_v_ = geo.grid_v;
  p.ctx_ = EnergyContext::from_geometry(geo, sys.size(), p.eta_);
  return p;
}

Problem1D Problem1D::scalar_characteristic(double alpha, const OversetGeometry1D& geo,
                                           const std::function<double(double)>& ic) {
  if (!(alpha > 0.0)) throw SolverError("scalar advection speed alpha must be positive");
  const double a[1] = {alpha};
  return characteristic(HyperbolicSystem::make(SymMatrix::diagonal(a)), geo,
                        [ic](double x) { return Vector{ic(x)}; });
}

Problem1D Problem1D::penalty(const HyperbolicSystem& sys, const OversetGeometry1D& geo, double eta,
                             InterfaceCoupling at_b, InterfaceCoupling at_c, Profile1D ic, bool allow_uncertified) {
  if (!(eta > 0.0 && eta < 1.0)) throw SolverError("eta must lie in (0,1)");
  check_convention(at_b, sys.a, OversetGeometry1D::beta_b(eta), "b");
  check_convention(at_c, sys.a, OversetGeometry1D::beta_c(eta), "c");
  at_b = certify(std::move(at_b));
  at_c = certify(std::move(at_c));
  if (!allow_uncertified) {
    if (!at_b.certified()) throw SolverError("coupling at b is not certified: " + at_b.verdict.reason);
    if (!at_c.certified()) throw SolverError("coupling at c is not certified: " + at_c.verdict.reason);
  }
  Problem1D p;
  p.sys_ = sys;
  p.geo_ = geo;
  p.mode_ = CouplingMode::penalty;
  p.eta_ = eta;
  p.cb_ = std::move(at_b);
  p.cc_ = std::move(at_c);
  p.ic_u_ = ic;
  p.ic_v_ = std::move(ic);
  auto w = geo.weighted(eta);
  p.op_u_ = std::move(w.u);
  p.op_v_ = std::move(w.v);
  p.ctx_ = EnergyContext::from_geometry(geo, sys.size(), eta);
  return p;
}

void Problem1D::set_diagnostic_eta(double eta) {
  if (mode_ == CouplingMode::penalty) throw SolverError("penalty problems fix eta at construction");
  eta_ = eta;
  ctx_ = EnergyContext::from_geometry(geo_, sys_.size(), eta);
}

SimState Problem1D::initial_state() const {
  SimState s;
  s.ncomp = ncomp();
  s.u.assign(static_cast<std::size_t>(geo_.grid_u.size() * s.ncomp), 0.0);
  s.v.assign(static_cast<std::size_t>(geo_.grid_v.size() * s.ncomp), 0.0);
  fill(s.u, geo_.grid_u, s.ncomp, ic_u_, "gridU");
  fill(s.v, geo_.grid_v, s.ncomp, ic_v_, "gridV");
  return s;
}

void Problem1D::rhs(const SimState& s, SimState& out) const {
  const int n = ncomp();
  const SymMatrix& a = sys_.a;
  thread_local Vector scratch;
  interior(op_u_, a, s.u, n, out.u, scratch);
  interior(op_v_, a, s.v, n, out.v, scratch);
  out.t = s.t;

  const int nv = op_v_.size();
  // physical boundaries: zero incoming characteristics
  sub_scaled(out.u_at(0), 1.0 / op_u_.norm[0], sys_.split.plus, s.u_at(0));
  sub_scaled(out.v_at(nv - 1), 1.0 / op_v_.norm[nv - 1], sys_.split.abs_minus(), s.v_at(nv - 1));

  const int ub = geo_.idx_u_b, uc = geo_.idx_u_c, vb = geo_.idx_v_b, vc = geo_.idx_v_c;
  if (mode_ == CouplingMode::penalty) {
    const Vector db = diff(s.u_at(ub), s.v_at(vb));
    const Vector dc = diff(s.u_at(uc), s.v_at(vc));
    sub_scaled(out.u_at(ub), 1.0 / op_u_.norm[ub], cb_->sigma_u, db);
    sub_scaled(out.u_at(uc), 1.0 / op_u_.norm[uc], cc_->sigma_u, dc);
    sub_scaled(out.v_at(vb), -1.0 / op_v_.norm[vb], cb_->sigma_v, db);
    sub_scaled(out.v_at(vc), -1.0 / op_v_.norm[vc], cc_->sigma_v, dc);
    return;
  }

  if (!strong_) {
    const Vector dc = diff(s.u_at(uc), s.v_at(vc));
    const Vector db = diff(s.v_at(vb), s.u_at(ub));
    sub_scaled(out.u_at(uc), 1.0 / op_u_.norm[uc], sys_.split.abs_minus(), dc);
    sub_scaled(out.v_at(vb), 1.0 / op_v_.norm[vb], sys_.split.plus, db);
    return;
  }

  // strong: incoming characteristic rates copied from the other grid
  const EigenDecomp& e = sys_.eig;
  const CharVector wu = char_transform(out.u_at(uc), e);
  const CharVector wvc = char_transform(out.v_at(vc), e);
  Vector wnew = wu.w;
  for (int k = 0; k < n; ++k) {
    if (wu.sign[k] < 0) wnew[k] = wvc.w[k];
  }
  Vector q = from_characteristic(wnew, e);
  std::copy(q.begin(), q.end(), out.u_at(uc).begin());

  const CharVector wv = char_transform(out.v_at(vb), e);
  const CharVector wub = char_transform(out.u_at(ub), e);
  wnew = wv.w;
  for (int k = 0; k < n; ++k) {
    if (wv.sign[k] > 0) wnew[k] = wub.w[k];
  }
  q = from_characteristic(wnew, e);
  std::copy(q.begin(), q.end(), out.v_at(vb).begin());
}

double Problem1D::stable_dt(double cfl) const {
  if (!(cfl > 0.0)) throw SolverError("CFL number must be positive");
  const double h = std::min(geo_.h_u, geo_.h_v);
  double rate = sys_.spectral_radius() / h;
  auto sat = [&](const SymMatrix& m, double weight) { rate = std::max(rate, max_eig(m) / (2.0 * weight)); };
  sat(sys_.split.plus, op_u_.norm.front());
  sat(sys_.split.abs_minus(), op_v_.norm.back());
  if (mode_ == CouplingMode::penalty) {
    sat(cb_->sigma_u, op_u_.norm[geo_.idx_u_b]);
    sat(cc_->sigma_u, op_u_.norm[geo_.idx_u_c]);
    sat(cb_->sigma_v, op_v_.norm[geo_.idx_v_b]);
    sat(cc_->sigma_v, op_v_.norm[geo_.idx_v_c]);
  } else {
    sat(sys_.split.abs_minus(), op_u_.norm[geo_.idx_u_c]);
    sat(sys_.split.plus, op_v_.norm[geo_.idx_v_b]);
  }
  if (rate == 0.0) return cfl * h;
  return cfl / rate;
}

DiagnosticsRecord Problem1D::diagnose(const SimState& s, const SimState& r) const {
  DiagnosticsRecord d;
  const int n = ncomp();
  d.t = s.t;
  d.E = composite_energy(s, ctx_);
  d.dEdt = energy_rate(s, r, ctx_);
  d.normU = weighted_square(s.u, ctx_.u.full, n, 1, 1.0);
  d.normV = weighted_square(s.v, ctx_.v.full, n, 1, 1.0);
  d.normU_O = weighted_square(s.u, ctx_.u.overlap, n, 1, 1.0);
  d.normV_O = weighted_square(s.v, ctx_.v.overlap, n, 1, 1.0);

  const int nv = geo_.grid_v.size();
  const auto ua = s.u_at(0);
  const auto vd = s.v_at(nv - 1);
  d.boundary_dissipation = sys_.split.abs.quadratic(ua) + sys_.split.abs.quadratic(vd);
  const Vector flux_in = apply(sys_.split.minus, ua);
  const Vector flux_out = apply(sys_.split.plus, vd);

  const int ub = geo_.idx_u_b, uc = geo_.idx_u_c, vb = geo_.idx_v_b, vc = geo_.idx_v_c;
  if (mode_ == CouplingMode::penalty) {
    d.P_b = interface_quadratic_form(s.u_at(ub), s.v_at(vb), *cb_);
    d.P_c = interface_quadratic_form(s.u_at(uc), s.v_at(vc), *cc_);
    d.ledger_residual = d.dEdt + d.P_b + d.P_c + d.boundary_dissipation;
    const ConservationResult c = conservation_residual(r, ctx_, flux_in, flux_out);
    d.cons_residual = c.residual;
  } else {
    const SymMatrix& a = sys_.a;
    const SymMatrix am = sys_.split.abs_minus();
    const auto uc_ = s.u_at(uc);
    const auto vc_ = s.v_at(vc);
    const auto ub_ = s.u_at(ub);
    const auto vb_ = s.v_at(vb);
    const Vector dc = diff(uc_, vc_);
    const Vector db = diff(vb_, ub_);
    // interface terms of d/dt (||u||^2_Hu + ||v||^2_Hv), sign flipped
    d.P_c = a.quadratic(uc_) + 2.0 * am.bilinear(uc_, dc);
    d.P_b = -a.quadratic(vb_) + 2.0 * sys_.split.plus.bilinear(vb_, db);
    const double uncoupled = 2.0 * weighted_inner(s.u, r.u, ctx_.u.full, n, 1, 1.0) +
                             2.0 * weighted_inner(s.v, r.v, ctx_.v.full, n, 1, 1.0);
    d.ledger_residual = uncoupled + d.P_b + d.P_c + d.boundary_dissipation;
    d.cons_residual = conservation_residual(r, ctx_, flux_in, flux_out).residual;
    const ParasiticTerms pt = parasitic_terms(s, sys_.split, geo_);
    d.parasitic_b = pt.term_b;
    d.parasitic_c = pt.term_c;
  }
  d.flux_in = flux_in;
  d.flux_out = flux_out;
  return d;
}

SingleDomainProblem1D::SingleDomainProblem1D(const HyperbolicSystem& sys, Grid1D grid, Profile1D ic)
    : sys_(sys), grid_(std::move(grid)), ic_(std::move(ic)) {}

SimState SingleDomainProblem1D::initial_state() const {
  SimState s;
  s.ncomp = ncomp();
  s.u.assign(static_cast<std::size_t>(grid_.size() * s.ncomp), 0.0);
  fill(s.u, grid_, s.ncomp, ic_, "the reference grid");
  return s;
}

void SingleDomainProblem1D::rhs(const SimState& s, SimState& out) const {
  thread_local Vector scratch;
  interior(grid_, sys_.a, s.u, ncomp(), out.u, scratch);
  out.t = s.t;
  const int n = grid_.size();
  sub_scaled(out.u_at(0), 1.0 / grid_.norm[0], sys_.split.plus, s.u_at(0));
  sub_scaled(out.u_at(n - 1), 1.0 / grid_.norm[n - 1], sys_.split.abs_minus(), s.u_at(n - 1));
}

double SingleDomainProblem1D::stable_dt(double cfl) const {
  if (!(cfl > 0.0)) throw SolverError("CFL number must be positive");
  const double h = grid_.spacing();
  double rate = sys_.spectral_radius() / h;
  rate = std::max(rate, max_eig(sys_.split.plus) / (2.0 * grid_.norm.front()));
  rate = std::max(rate, max_eig(sys_.split.abs_minus()) / (2.0 * grid_.norm.back()));
  if (rate == 0.0) return cfl * h;
  return cfl / rate;
}

DiagnosticsRecord SingleDomainProblem1D::diagnose(const SimState& s, const SimState& r) const {
  DiagnosticsRecord d;
  const int n = ncomp();
  d.t = s.t;
  d.E = weighted_square(s.u, grid_.norm, n, 1, 1.0);
  d.dEdt = 2.0 * weighted_inner(s.u, r.u, grid_.norm, n, 1, 1.0);
  d.normU = d.E;
  const int nn = grid_.size();
  d.boundary_dissipation = sys_.split.abs.quadratic(s.u_at(0)) + sys_.split.abs.quadratic(s.u_at(nn - 1));
  d.ledger_residual = d.dEdt + d.boundary_dissipation;
  d.flux_in = apply(sys_.split.minus, s.u_at(0));
  d.flux_out = apply(sys_.split.plus, s.u_at(nn - 1));
  Vector total(n, 0.0);
  for (int i = 0; i < nn; ++i) {
    for (int k = 0; k < n; ++k) total[k] += grid_.norm[i] * r.u[i * n + k];
  }
  for (int k = 0; k < n; ++k) {
    d.cons_residual = std::max(d.cons_residual, std::abs(total[k] - (d.flux_in[k] - d.flux_out[k])));
  }
  return d;
}

Grid1D reference_grid(const OversetGeometry1D& g) {
  const double h = std::min(g.h_u, g.h_v);
  for (double hh : {g.h_u, g.h_v}) {
    const double r = hh / h;
    if (std::abs(r - std::round(r)) > 1e-9 * r) {
      throw GeometryError("component spacings must be integer multiples of the finer one for a shared reference grid");
    }
  }
  const long n = std::lround((g.d - g.a) / h);
  return build_grid_1d(g.a, g.d, static_cast<int>(n) + 1, g.order);
}

SimState step_rk4(const SimState& s, double dt, const RhsFunction& rhs, const StageObserver& observer) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  SimState k1 = s.zeros_like(), k2 = s.zeros_like(), k3 = s.zeros_like(), k4 = s.zeros_like();
  rhs(s, k1);
  if (observer) observer(s, k1, 0);
  SimState tmp = s;
  axpy(tmp, 0.5 * dt, k1);
  tmp.t = s.t + 0.5 * dt;
  rhs(tmp, k2);
  if (observer) observer(tmp, k2, 1);
  tmp = s;
  axpy(tmp, 0.5 * dt, k2);
  tmp.t = s.t + 0.5 * dt;
  rhs(tmp, k3);
  if (observer) observer(tmp, k3, 2);
  tmp = s;
  axpy(tmp, dt, k3);
  tmp.t = s.t + dt;
  rhs(tmp, k4);
  if (observer) observer(tmp, k4, 3);

  SimState out = s;
  axpy(out, dt / 6.0, k1);
  axpy(out, dt / 3.0, k2);
  axpy(out, dt / 3.0, k3);
  axpy(out, dt / 6.0, k4);
  out.t = s.t + dt;
  return out;
}

namespace {

void check_finite(const SimState& s, int step) {
  const long idx = s.first_non_finite();
  if (idx >= 0) {
    std::ostringstream os;
    os << "non-finite value at step " << step << " (t = " << s.t << ", entry " << idx << ")";
    throw NumericalAbort(os.str(), step);
  }
}

}  // namespace

RunResult run_simulation(const Problem& problem, double T, double dt, const RunOptions& options) {
  if (!(T >= 0.0)) throw SolverError("final time must be non-negative");
  if (!(dt > 0.0)) throw SolverError("time step must be positive");

  RunResult res;
  res.state = problem.initial_state();
  check_finite(res.state, 0);
  if (options.reference) res.reference_state = options.reference->initial_state();

  auto record = [&]() {
    const SimState rate = problem.rhs(res.state);
    DiagnosticsRecord d = problem.diagnose(res.state, rate);
    if (options.reference && options.reference_error) {
      const EquivalenceError e = options.reference_error(res.state, res.reference_state);
      d.err_u = e.err_u;
      d.err_v = e.err_v;
    } else if (options.exact_error) {
      const EquivalenceError e = options.exact_error(res.state);
      d.err_u = e.err_u;
      d.err_v = e.err_v;
    }
    if (options.step_observer) options.step_observer(d);
    res.series.append(std::move(d));
  };
  record();

  const RhsFunction f = [&problem](const SimState& s, SimState& out) { problem.rhs(s, out); };
  const RhsFunction fref = [&options](const SimState& s, SimState& out) { options.reference->rhs(s, out); };
  int step = 0;
  while (res.state.t < T) {
    double h = dt;
    const bool last = res.state.t + dt >= T * (1.0 - 1e-14);
    if (last) h = T - res.state.t;
    if (!(h > 0.0)) break;
    StageObserver obs;
    if (options.stage_observer) {
      obs = [&options, step](const SimState& s, const SimState& r, int k) { options.stage_observer(s, r, step, k); };
    }
    res.state = step_rk4(res.state, h, f, obs);
    if (options.reference) res.reference_state = step_rk4(res.reference_state, h, fref);
    ++step;
    if (last) {
      res.state.t = T;
      if (options.reference) res.reference_state.t = T;
    }
    check_finite(res.state, step);
    record();
  }
  res.steps = step;
  return res;
}

}  // namespace overset
