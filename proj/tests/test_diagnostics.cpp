#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "overset/diagnostics.hpp"

using namespace overset;

namespace {

SimState filled(const OversetGeometry1D& g, int n, const std::function<double(double, int)>& f) {
  SimState s;
  s.ncomp = n;
  s.u.resize(g.grid_u.size() * n);
  s.v.resize(g.grid_v.size() * n);
  for (int i = 0; i < g.grid_u.size(); ++i)
    for (int k = 0; k < n; ++k) s.u[i * n + k] = f(g.grid_u.x[i], k);
  for (int i = 0; i < g.grid_v.size(); ++i)
    for (int k = 0; k < n; ++k) s.v[i * n + k] = f(g.grid_v.x[i], k);
  return s;
}

SimState random_state(const OversetGeometry1D& g, int n, std::mt19937_64& rng) {
  SimState s;
  s.ncomp = n;
  s.u = oracle::random_vec(rng, g.grid_u.size() * n);
  s.v = oracle::random_vec(rng, g.grid_v.size() * n);
  return s;
}

}  // namespace

TEST_CASE("composite energy of constants removes the double count") {
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.05, 0.1, 2);
  for (double eta : {0.1, 0.5, 0.9}) {
    const EnergyContext ctx = EnergyContext::from_geometry(g, 2, eta);
    const SimState s = filled(g, 2, [](double, int k) { return k == 0 ? 1.5 : -0.5; });
    CHECK(composite_energy(s, ctx) == doctest::Approx(3.0 * (1.5 * 1.5 + 0.25)).epsilon(1e-13));
    const SimState z = filled(g, 2, [](double, int) { return 0.0; });
    CHECK(composite_energy(z, ctx) == 0.0);
  }
}

TEST_CASE("composite energy lower bounds") {
  std::mt19937_64 rng(1);
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.05, 0.1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    const double eta = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
    const EnergyContext ctx = EnergyContext::from_geometry(g, 3, eta);
    const SimState s = random_state(g, 3, rng);
    const double e = composite_energy(s, ctx);
    const double nu = weighted_square(s.u, ctx.u.full, 3, 1, 1.0);
    const double nv = weighted_square(s.v, ctx.v.full, 3, 1, 1.0);
    CHECK(e >= 0.0);
    CHECK(e >= (1.0 - eta) * nu * (1 - 1e-14));
    CHECK(e >= eta * nv * (1 - 1e-14));
  }
}

TEST_CASE("energy rate is the derivative of the composite energy") {
  std::mt19937_64 rng(2);
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.1, 0.05, 2);
  const EnergyContext ctx = EnergyContext::from_geometry(g, 2, 0.3);
  const SimState s = random_state(g, 2, rng), r = random_state(g, 2, rng);
  const double eps = 1e-4;
  SimState p = s, m = s;
  axpy(p, eps, r);
  axpy(m, -eps, r);
  const double fd = (composite_energy(p, ctx) - composite_energy(m, ctx)) / (2 * eps);
  CHECK(energy_rate(s, r, ctx) == doctest::Approx(fd).epsilon(1e-9));
}

TEST_CASE("conservation residual") {
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.1, 0.1, 2);
  const EnergyContext ctx = EnergyContext::from_geometry(g, 2, 0.5);
  const SimState z = filled(g, 2, [](double, int) { return 0.0; });
  const ConservationResult c = conservation_residual(z, ctx, Vector{0, 0}, Vector{0, 0});
  CHECK(c.residual == 0.0);
  // constant rate 1 on both grids: weighted total is |Omega| = 3 per component
  const SimState one = filled(g, 2, [](double, int) { return 1.0; });
  const ConservationResult d = conservation_residual(one, ctx, Vector{3.0, 1.0}, Vector{0.0, -2.0});
  CHECK(d.rate_total[0] == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(d.residual <= 1e-13);
}

TEST_CASE("parasitic terms") {
  const FluxSplit sp = flux_split(SymMatrix::from_rows({{1, 2}, {2, 1}}));
  const Vector q{0.4, -0.3};
  const ParasiticTerms z = parasitic_terms(q, q, q, q, sp);
  CHECK(z.term_b == 0.0);
  CHECK(z.term_c == 0.0);

  const double a[1] = {2.0};
  const FluxSplit s1 = flux_split(SymMatrix::diagonal(a));
  const ParasiticTerms t = parasitic_terms(Vector{0.5}, Vector{0.1}, Vector{0.3}, Vector{0.7}, s1);
  CHECK(t.term_b == 0.0);
  CHECK(t.term_c == doctest::Approx(2.0 * (0.49 - 0.09)).epsilon(1e-14));

  // difference along an A+ eigenvector, evaluated two ways
  const EigenDecomp e = eig_sym(SymMatrix::from_rows({{1, 2}, {2, 1}}));
  const Vector p = e.column(0);
  const Vector uc{0.2, 0.9};
  Vector vc(2);
  for (int k = 0; k < 2; ++k) vc[k] = uc[k] + 0.01 * p[k];
  const ParasiticTerms pc = parasitic_terms(uc, uc, uc, vc, sp);
  const double direct = oracle::quad(sp.plus, vc) - oracle::quad(sp.plus, uc);
  CHECK(std::abs(pc.term_c - direct) <= 1e-12);
  const double lam = e.values[0];
  const double via_eigen = lam * (std::pow(dot(p, vc), 2) - std::pow(dot(p, uc), 2));
  CHECK(std::abs(pc.term_c - via_eigen) <= 1e-12);
}

TEST_CASE("equivalence error") {
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.1, 0.05, 2);
  const Grid1D ref = build_grid_1d(0, 3, 61, 2);
  auto f = [](double x, int) { return std::sin(x); };
  const SimState s = filled(g, 1, f);
  SimState r;
  r.u.resize(61);
  for (int i = 0; i < 61; ++i) r.u[i] = std::sin(ref.x[i]);
  const EquivalenceError e = equivalence_error(s, r, g.grid_u, g.grid_v, ref);
  CHECK(e.err_u <= 1e-15);
  CHECK(e.err_v <= 1e-15);
  SimState shifted = s;
  for (double& x : shifted.u) x += 1.0;
  const EquivalenceError e2 = equivalence_error(shifted, r, g.grid_u, g.grid_v, ref);
  CHECK(e2.err_u == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  const Grid1D coarse = build_grid_1d(0, 3, 16, 2);
  SimState rc;
  rc.u.resize(16);
  CHECK_THROWS(equivalence_error(s, rc, g.grid_u, g.grid_v, coarse));
}

TEST_CASE("diagnostics series requires increasing time") {
  DiagnosticsSeries s;
  DiagnosticsRecord r;
  r.t = 0.0;
  s.append(r);
  r.t = 0.1;
  s.append(r);
  CHECK(s.size() == 2);
  r.t = 0.1;
  CHECK_THROWS_AS(s.append(r), std::logic_error);
  CHECK(std::isnan(s.back().err_u));
}
