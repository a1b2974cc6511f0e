#include "overset/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace overset {

namespace {

/// out = -(A1 Dx + A2 Dy) q on an nx x ny field
void interior_2d(const Grid1D& gx, const PeriodicGrid& gy, const System2D& sys, std::span<const double> q,
                 std::span<double> out) {
  const int n = sys.size();
  const int nx = gx.size();
  const int ny = gy.n;
  const std::size_t row = static_cast<std::size_t>(nx * n);
  thread_local Vector dx, dy;
  dx.resize(q.size());
  dy.assign(q.size(), 0.0);
  for (int j = 0; j < ny; ++j) {
    gx.derivative(q.subspan(j * row, row), n, std::span<double>(dx).subspan(j * row, row));
  }
  for (int j = 0; j < ny; ++j) {
    double* o = dy.data() + j * row;
    for (std::size_t s = 0; s < gy.offsets.size(); ++s) {
      const int jj = ((j + gy.offsets[s]) % ny + ny) % ny;
      const double cf = gy.coef[s];
      const double* src = q.data() + jj * row;
      for (std::size_t m = 0; m < row; ++m) o[m] += cf * src[m];
    }
  }
  const SymMatrix& a1 = sys.a1.a;
  const SymMatrix& a2 = sys.a2;
  const std::size_t nodes = q.size() / static_cast<std::size_t>(n);
  for (std::size_t p = 0; p < nodes; ++p) {
    const double* x1 = dx.data() + p * n;
    const double* y1 = dy.data() + p * n;
    double* o = out.data() + p * n;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += a1(i, k) * x1[k] + a2(i, k) * y1[k];
      o[i] = -s;
    }
  }
}

/// out -= scale * M (p - q)
void sub_diff(std::span<double> out, double scale, const SymMatrix& m, std::span<const double> p,
              std::span<const double> q) {
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += m(i, k) * (p[k] - q[k]);
    out[i] -= scale * s;
  }
}

/// out -= scale * M p
void sub_one(std::span<double> out, double scale, const SymMatrix& m, std::span<const double> p) {
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += m(i, k) * p[k];
    out[i] -= scale * s;
  }
}

void fill_2d(std::span<double> field, const Grid1D& gx, const PeriodicGrid& gy, int n, const Profile2D& ic,
             const char* which) {
  const int nx = gx.size();
  for (int j = 0; j < gy.n; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Vector q = ic(gx.x[i], gy.y[j]);
      if (static_cast<int>(q.size()) != n) {
        throw SolverError(std::string("initial condition on ") + which + " has wrong size");
      }
      std::copy(q.begin(), q.end(), field.begin() + static_cast<std::ptrdiff_t>((j * nx + i) * n));
    }
  }
}

double max_eig(const SymMatrix& m) { return m.size() == 0 ? 0.0 : eig_sym(m).values.front(); }

void check_convention(const InterfaceCoupling& c, const SymMatrix& a_n, double beta, const char* where) {
  if (c.a_n.size() != a_n.size() || c.sigma_u.size() != a_n.size() || c.sigma_v.size() != a_n.size()) {
    throw SolverError(std::string("coupling at ") + where + " has the wrong dimension");
  }
  const double scale = std::max(1.0, a_n.frobenius_norm());
  if (std::abs(c.beta - beta) > 1e-12 || (c.a_n - a_n).frobenius_norm() > 1e-12 * scale) {
    std::ostringstream os;
    os << "coupling at " << where << " must use beta = " << beta << " with the outward-normal flux matrix";
    throw SolverError(os.str());
  }
}

}  // namespace

System2D System2D::make(const SymMatrix& a1, const SymMatrix& a2) {
  if (a1.size() != a2.size()) throw SolverError("A1 and A2 must have the same size");
  System2D s;
  s.a1 = HyperbolicSystem::make(a1);
  s.a2 = a2;
  s.rho_y = a2.size() == 0 ? 0.0 : eig_sym(a2).spectral_radius();
  return s;
}

Problem2D Problem2D::make(const System2D& sys, const OversetGeometry2D& geo, double eta, InterfaceCoupling at_b,
                          InterfaceCoupling at_c, std::optional<OverlapCoupling> overlap, Profile2D ic,
                          bool allow_uncertified) {
  if (!(eta > 0.0 && eta < 1.0)) throw SolverError("eta must lie in (0,1)");
  const SymMatrix& a1 = sys.a1.a;
  const SymMatrix an_b = normal_matrix(a1, sys.a2, geo.normal_b.nx, geo.normal_b.ny);
  const SymMatrix an_c = normal_matrix(a1, sys.a2, geo.normal_c.nx, geo.normal_c.ny);
  check_convention(at_b, an_b, OversetGeometry2D::beta_b(eta), "Gamma_b");
  check_convention(at_c, an_c, OversetGeometry2D::beta_c(eta), "Gamma_c");
  at_b = certify(std::move(at_b));
  at_c = certify(std::move(at_c));
  if (overlap) {
    if (geo.overlap_points.empty()) throw SolverError("overlap coupling given but the geometry has no overlap points");
    if (std::abs(overlap->eta - eta) > 1e-15) throw SolverError("overlap coupling eta differs from the problem eta");
    overlap->verdict = check_overlap_coupling(eta, overlap->sigma_um, overlap->sigma_vm);
  }
  if (!allow_uncertified) {
    if (!at_b.certified()) throw SolverError("coupling at Gamma_b is not certified: " + at_b.verdict.reason);
    if (!at_c.certified()) throw SolverError("coupling at Gamma_c is not certified: " + at_c.verdict.reason);
    if (overlap && !overlap->certified()) {
      throw SolverError("overlap coupling is not certified: " + overlap->verdict.reason);
    }
  }
  for (const OverlapPoint& p : geo.overlap_points) {
    if (!(p.iu > geo.x.idx_u_b && p.iu < geo.x.idx_u_c && p.iv > geo.x.idx_v_b && p.iv < geo.x.idx_v_c)) {
      throw SolverError("overlap point is not a shared node strictly inside the overlap");
    }
  }

  Problem2D p;
  p.sys_ = sys;
  p.geo_ = geo;
  p.eta_ = eta;
  p.cb_ = std::move(at_b);
  p.cc_ = std::move(at_c);
  p.overlap_ = std::move(overlap);
  p.ic_u_ = ic;
  p.ic_v_ = std::move(ic);
  auto w = geo.x.weighted(eta);
  p.op_u_ = std::move(w.u);
  p.op_v_ = std::move(w.v);
  p.a1_abs_minus_ = sys.a1.split.abs_minus();
  p.ctx_ = EnergyContext::from_geometry(geo, sys.size(), eta);
  return p;
}

Problem2D Problem2D::upwind(const System2D& sys, const OversetGeometry2D& geo, double eta, Profile2D ic,
                            double sigma_overlap) {
  const SymMatrix& a1 = sys.a1.a;
  const SymMatrix an_b = normal_matrix(a1, sys.a2, geo.normal_b.nx, geo.normal_b.ny);
  const SymMatrix an_c = normal_matrix(a1, sys.a2, geo.normal_c.nx, geo.normal_c.ny);
  std::optional<OverlapCoupling> ov;
  if (sigma_overlap > 0.0) ov = make_overlap_coupling(eta, sigma_overlap * SymMatrix::identity(sys.size()));
  return make(sys, geo, eta, make_upwind_coupling(an_b, OversetGeometry2D::beta_b(eta)),
              make_upwind_coupling(an_c, OversetGeometry2D::beta_c(eta)), std::move(ov), std::move(ic));
}

Problem2D Problem2D::without_overlap() const {
  Problem2D p = *this;
  p.overlap_.reset();
  return p;
}

SimState Problem2D::initial_state() const {
  SimState s;
  s.ncomp = ncomp();
  s.ny = geo_.ny();
  s.u.assign(static_cast<std::size_t>(geo_.nx_u() * s.ny * s.ncomp), 0.0);
  s.v.assign(static_cast<std::size_t>(geo_.nx_v() * s.ny * s.ncomp), 0.0);
  fill_2d(s.u, geo_.x.grid_u, geo_.y, s.ncomp, ic_u_, "gridU");
  fill_2d(s.v, geo_.x.grid_v, geo_.y, s.ncomp, ic_v_, "gridV");
  return s;
}

void Problem2D::rhs(const SimState& s, SimState& out) const {
  interior_2d(op_u_, geo_.y, sys_, s.u, out.u);
  interior_2d(op_v_, geo_.y, sys_, s.v, out.v);
  out.t = s.t;

  const int nv = op_v_.size();
  const int ub = geo_.x.idx_u_b, uc = geo_.x.idx_u_c, vb = geo_.x.idx_v_b, vc = geo_.x.idx_v_c;
  const double iu0 = 1.0 / op_u_.norm[0];
  const double ivn = 1.0 / op_v_.norm[nv - 1];
  const double iub = 1.0 / op_u_.norm[ub], iuc = 1.0 / op_u_.norm[uc];
  const double ivb = 1.0 / op_v_.norm[vb], ivc = 1.0 / op_v_.norm[vc];
  for (int j = 0; j < geo_.ny(); ++j) {
    sub_one(out.u_at(0, j), iu0, sys_.a1.split.plus, s.u_at(0, j));
    sub_one(out.v_at(nv - 1, j), ivn, a1_abs_minus_, s.v_at(nv - 1, j));
    sub_diff(out.u_at(ub, j), iub, cb_.sigma_u, s.u_at(ub, j), s.v_at(vb, j));
    sub_diff(out.u_at(uc, j), iuc, cc_.sigma_u, s.u_at(uc, j), s.v_at(vc, j));
    sub_diff(out.v_at(vb, j), ivb, cb_.sigma_v, s.v_at(vb, j), s.u_at(ub, j));
    sub_diff(out.v_at(vc, j), ivc, cc_.sigma_v, s.v_at(vc, j), s.u_at(uc, j));
  }

  if (overlap_) {
    const double m = static_cast<double>(geo_.overlap_points.size());
    const double hy = geo_.y.weight();
    for (const OverlapPoint& p : geo_.overlap_points) {
      const double su = 1.0 / (m * geo_.x.norm_u_overlap[p.iu] * hy);
      const double sv = 1.0 / (m * geo_.x.norm_v_overlap[p.iv] * hy);
      sub_diff(out.u_at(p.iu, p.j), su, overlap_->sigma_um, s.u_at(p.iu, p.j), s.v_at(p.iv, p.j));
      sub_diff(out.v_at(p.iv, p.j), sv, overlap_->sigma_vm, s.v_at(p.iv, p.j), s.u_at(p.iu, p.j));
    }
  }
}

double Problem2D::stable_dt(double cfl) const {
  if (!(cfl > 0.0)) throw SolverError("CFL number must be positive");
  const double hx = std::min(geo_.x.h_u, geo_.x.h_v);
  const double hy = geo_.y.h;
  double pen = 0.0;
  auto sat = [&](const SymMatrix& m, double weight) { pen = std::max(pen, max_eig(m) / (2.0 * weight)); };
  const int nv = op_v_.size();
  sat(sys_.a1.split.plus, op_u_.norm.front());
  sat(a1_abs_minus_, op_v_.norm[nv - 1]);
  sat(cb_.sigma_u, op_u_.norm[geo_.x.idx_u_b]);
  sat(cc_.sigma_u, op_u_.norm[geo_.x.idx_u_c]);
  sat(cb_.sigma_v, op_v_.norm[geo_.x.idx_v_b]);
  sat(cc_.sigma_v, op_v_.norm[geo_.x.idx_v_c]);
  if (overlap_) {
    const double m = static_cast<double>(geo_.overlap_points.size());
    for (const OverlapPoint& p : geo_.overlap_points) {
      sat(overlap_->sigma_um, 0.5 * m * geo_.x.norm_u_overlap[p.iu] * hy);
      sat(overlap_->sigma_vm, 0.5 * m * geo_.x.norm_v_overlap[p.iv] * hy);
    }
  }
  const double rate = sys_.a1.spectral_radius() / hx + sys_.rho_y / hy + pen;
  if (rate == 0.0) return cfl * std::min(hx, hy);
  return cfl / rate;
}

double Problem2D::overlap_dissipation(const SimState& s) const {
  if (!overlap_ || geo_.overlap_points.empty()) return 0.0;
  double total = 0.0;
  for (const OverlapPoint& p : geo_.overlap_points) {
    total += overlap_quadratic_form(s.u_at(p.iu, p.j), s.v_at(p.iv, p.j), *overlap_);
  }
  return total / static_cast<double>(geo_.overlap_points.size());
}

DiagnosticsRecord Problem2D::diagnose(const SimState& s, const SimState& r) const {
  DiagnosticsRecord d;
  const int n = ncomp();
  const int ny = geo_.ny();
  const double hy = geo_.y.weight();
  d.t = s.t;
  d.E = composite_energy(s, ctx_);
  d.dEdt = energy_rate(s, r, ctx_);
  d.normU = weighted_square(s.u, ctx_.u.full, n, ny, hy);
  d.normV = weighted_square(s.v, ctx_.v.full, n, ny, hy);
  d.normU_O = weighted_square(s.u, ctx_.u.overlap, n, ny, hy);
  d.normV_O = weighted_square(s.v, ctx_.v.overlap, n, ny, hy);

  const int nv = geo_.nx_v();
  const int ub = geo_.x.idx_u_b, uc = geo_.x.idx_u_c, vb = geo_.x.idx_v_b, vc = geo_.x.idx_v_c;
  Vector flux_in(n, 0.0), flux_out(n, 0.0);
  const FluxSplit& sp = sys_.a1.split;
  for (int j = 0; j < ny; ++j) {
    d.P_b += hy * interface_quadratic_form(s.u_at(ub, j), s.v_at(vb, j), cb_);
    d.P_c += hy * interface_quadratic_form(s.u_at(uc, j), s.v_at(vc, j), cc_);
    d.boundary_dissipation += hy * (sp.abs.quadratic(s.u_at(0, j)) + sp.abs.quadratic(s.v_at(nv - 1, j)));
    const Vector fi = sp.minus.apply(s.u_at(0, j));
    const Vector fo = sp.plus.apply(s.v_at(nv - 1, j));
    for (int k = 0; k < n; ++k) {
      flux_in[k] += hy * fi[k];
      flux_out[k] += hy * fo[k];
    }
  }
  d.P_overlap = overlap_dissipation(s);
  d.ledger_residual = d.dEdt + d.P_b + d.P_c + d.P_overlap + d.boundary_dissipation;
  d.cons_residual = conservation_residual(r, ctx_, flux_in, flux_out).residual;
  d.flux_in = std::move(flux_in);
  d.flux_out = std::move(flux_out);
  return d;
}

SingleDomainProblem2D::SingleDomainProblem2D(const System2D& sys, Grid1D grid_x, PeriodicGrid grid_y, Profile2D ic)
    : sys_(sys), gx_(std::move(grid_x)), gy_(std::move(grid_y)), ic_(std::move(ic)) {
  a1_abs_minus_ = sys_.a1.split.abs_minus();
}

SimState SingleDomainProblem2D::initial_state() const {
  SimState s;
  s.ncomp = ncomp();
  s.ny = gy_.n;
  s.u.assign(static_cast<std::size_t>(gx_.size() * gy_.n * s.ncomp), 0.0);
  fill_2d(s.u, gx_, gy_, s.ncomp, ic_, "the reference grid");
  return s;
}

void SingleDomainProblem2D::rhs(const SimState& s, SimState& out) const {
  interior_2d(gx_, gy_, sys_, s.u, out.u);
  out.t = s.t;
  const int nx = gx_.size();
  for (int j = 0; j < gy_.n; ++j) {
    sub_one(out.u_at(0, j), 1.0 / gx_.norm[0], sys_.a1.split.plus, s.u_at(0, j));
    sub_one(out.u_at(nx - 1, j), 1.0 / gx_.norm[nx - 1], a1_abs_minus_, s.u_at(nx - 1, j));
  }
}

double SingleDomainProblem2D::stable_dt(double cfl) const {
  if (!(cfl > 0.0)) throw SolverError("CFL number must be positive");
  const double hx = gx_.spacing();
  double pen = std::max(max_eig(sys_.a1.split.plus) / (2.0 * gx_.norm.front()),
                        max_eig(a1_abs_minus_) / (2.0 * gx_.norm.back()));
  const double rate = sys_.a1.spectral_radius() / hx + sys_.rho_y / gy_.h + pen;
  if (rate == 0.0) return cfl * std::min(hx, gy_.h);
  return cfl / rate;
}

DiagnosticsRecord SingleDomainProblem2D::diagnose(const SimState& s, const SimState& r) const {
  DiagnosticsRecord d;
  const int n = ncomp();
  const double hy = gy_.weight();
  d.t = s.t;
  d.E = weighted_square(s.u, gx_.norm, n, gy_.n, hy);
  d.dEdt = 2.0 * weighted_inner(s.u, r.u, gx_.norm, n, gy_.n, hy);
  d.normU = d.E;
  const int nx = gx_.size();
  const FluxSplit& sp = sys_.a1.split;
  Vector flux_in(n, 0.0), flux_out(n, 0.0), total(n, 0.0);
  for (int j = 0; j < gy_.n; ++j) {
    d.boundary_dissipation += hy * (sp.abs.quadratic(s.u_at(0, j)) + sp.abs.quadratic(s.u_at(nx - 1, j)));
    const Vector fi = sp.minus.apply(s.u_at(0, j));
    const Vector fo = sp.plus.apply(s.u_at(nx - 1, j));
    for (int k = 0; k < n; ++k) {
      flux_in[k] += hy * fi[k];
      flux_out[k] += hy * fo[k];
    }
    for (int i = 0; i < nx; ++i) {
      for (int k = 0; k < n; ++k) total[k] += hy * gx_.norm[i] * r.u[(j * nx + i) * n + k];
    }
  }
  d.ledger_residual = d.dEdt + d.boundary_dissipation;
  for (int k = 0; k < n; ++k) {
    d.cons_residual = std::max(d.cons_residual, std::abs(total[k] - (flux_in[k] - flux_out[k])));
  }
  d.flux_in = std::move(flux_in);
  d.flux_out = std::move(flux_out);
  return d;
}

Grid1D reference_grid(const OversetGeometry2D& g) { return reference_grid(g.x); }

}  // namespace overset
