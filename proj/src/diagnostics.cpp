#include "overset/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace overset {

EnergyContext EnergyContext::from_geometry(const OversetGeometry1D& g, int ncomp, double eta) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");
  EnergyContext ctx;
  ctx.u = {g.grid_u.norm, g.norm_u_overlap};
  ctx.v = {g.grid_v.norm, g.norm_v_overlap};
  ctx.ncomp = ncomp;
  ctx.eta = eta;
  return ctx;
}

EnergyContext EnergyContext::from_geometry(const OversetGeometry2D& g, int ncomp, double eta) {
  EnergyContext ctx = from_geometry(g.x, ncomp, eta);
  ctx.ny = g.ny();
  ctx.hy = g.y.weight();
  return ctx;
}

double weighted_inner(std::span<const double> p, std::span<const double> q, std::span<const double> w, int ncomp,
                      int ny, double hy) {
  const int nx = static_cast<int>(w.size());
  if (p.size() != q.size() || static_cast<int>(p.size()) != nx * ny * ncomp) {
    throw std::invalid_argument("weighted_inner: size mismatch");
  }
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t base = static_cast<std::size_t>((j * nx + i) * ncomp);
      double s = 0.0;
      for (int k = 0; k < ncomp; ++k) s += p[base + k] * q[base + k];
      total += w[i] * s;
    }
  }
  return hy * total;
}

double weighted_square(std::span<const double> q, std::span<const double> w, int ncomp, int ny, double hy) {
  return weighted_inner(q, q, w, ncomp, ny, hy);
}

double composite_energy(const SimState& s, const EnergyContext& c) {
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw std::invalid_argument("eta must lie in (0,1)");
  const double uu = weighted_square(s.u, c.u.full, c.ncomp, c.ny, c.hy);
  const double vv = weighted_square(s.v, c.v.full, c.ncomp, c.ny, c.hy);
  const double uo = weighted_square(s.u, c.u.overlap, c.ncomp, c.ny, c.hy);
  const double vo = weighted_square(s.v, c.v.overlap, c.ncomp, c.ny, c.hy);
  return uu + vv - c.eta * uo - (1.0 - c.eta) * vo;
}

double energy_rate(const SimState& s, const SimState& r, const EnergyContext& c) {
  const double uu = weighted_inner(s.u, r.u, c.u.full, c.ncomp, c.ny, c.hy);
  const double vv = weighted_inner(s.v, r.v, c.v.full, c.ncomp, c.ny, c.hy);
  const double uo = weighted_inner(s.u, r.u, c.u.overlap, c.ncomp, c.ny, c.hy);
  const double vo = weighted_inner(s.v, r.v, c.v.overlap, c.ncomp, c.ny, c.hy);
  return 2.0 * uu + 2.0 * vv - 2.0 * c.eta * uo - 2.0 * (1.0 - c.eta) * vo;
}

namespace {

void add_totals(std::span<const double> q, const NormSet& n, double overlap_weight, const EnergyContext& c,
                Vector& out) {
  const int nx = static_cast<int>(n.full.size());
  for (int j = 0; j < c.ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double w = c.hy * (n.full[i] - overlap_weight * n.overlap[i]);
      const std::size_t base = static_cast<std::size_t>((j * nx + i) * c.ncomp);
      for (int k = 0; k < c.ncomp; ++k) out[k] += w * q[base + k];
    }
  }
}

}  // namespace

ConservationResult conservation_residual(const SimState& rate, const EnergyContext& c, const Vector& flux_in,
                                         const Vector& flux_out) {
  ConservationResult r;
  r.rate_total.assign(c.ncomp, 0.0);
  add_totals(rate.u, c.u, c.eta, c, r.rate_total);
  add_totals(rate.v, c.v, 1.0 - c.eta, c, r.rate_total);
  r.flux_in = flux_in;
  r.flux_out = flux_out;
  for (int k = 0; k < c.ncomp; ++k) {
    r.residual = std::max(r.residual, std::abs(r.rate_total[k] - (flux_in[k] - flux_out[k])));
  }
  return r;
}

ParasiticTerms parasitic_terms(std::span<const double> u_b, std::span<const double> v_b,
                               std::span<const double> u_c, std::span<const double> v_c, const FluxSplit& split) {
  const SymMatrix am = split.abs_minus();
  return {split.plus.quadratic(v_c) - split.plus.quadratic(u_c), am.quadratic(u_b) - am.quadratic(v_b)};
}

ParasiticTerms parasitic_terms(const SimState& s, const FluxSplit& split, const OversetGeometry1D& g) {
  return parasitic_terms(s.u_at(g.idx_u_b), s.v_at(g.idx_v_b), s.u_at(g.idx_u_c), s.v_at(g.idx_v_c), split);
}

namespace {

double grid_error(std::span<const double> q, int nx, const Grid1D& grid, std::span<const double> ref,
                  const Grid1D& grid_ref, int ncomp, int ny, double hy) {
  const int nr = grid_ref.size();
  if (static_cast<int>(ref.size()) != nr * ny * ncomp) throw std::invalid_argument("reference size mismatch");
  std::vector<int> map(nx);
  for (int i = 0; i < nx; ++i) {
    map[i] = grid_ref.find_node(grid.x[i]);
    if (map[i] < 0) {
      std::ostringstream os;
      os << "equivalence_error: node x=" << grid.x[i] << " is not a node of the reference grid";
      throw std::invalid_argument(os.str());
    }
  }
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double s = 0.0;
      for (int k = 0; k < ncomp; ++k) {
        const double e = q[(j * nx + i) * ncomp + k] - ref[(j * nr + map[i]) * ncomp + k];
        s += e * e;
      }
      total += grid.norm[i] * s;
    }
  }
  return std::sqrt(hy * total);
}

}  // namespace

EquivalenceError equivalence_error(const SimState& s, const SimState& reference, const Grid1D& grid_u,
                                   const Grid1D& grid_v, const Grid1D& grid_ref, double hy) {
  if (s.ncomp != reference.ncomp || s.ny != reference.ny) {
    throw std::invalid_argument("equivalence_error: state and reference shapes differ");
  }
  if (s.nu() != grid_u.size() || s.nv() != grid_v.size()) {
    throw std::invalid_argument("equivalence_error: state does not match its grids");
  }
  return {grid_error(s.u, grid_u.size(), grid_u, reference.u, grid_ref, s.ncomp, s.ny, hy),
          grid_error(s.v, grid_v.size(), grid_v, reference.u, grid_ref, s.ncomp, s.ny, hy)};
}

void DiagnosticsSeries::append(DiagnosticsRecord r) {
  if (!records_.empty() && !(r.t > records_.back().t)) {
    std::ostringstream os;
    os << "diagnostics time must increase strictly (" << records_.back().t << " then " << r.t << ")";
    throw std::logic_error(os.str());
  }
  records_.push_back(std::move(r));
}

}  // namespace overset
