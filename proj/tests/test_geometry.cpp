#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "overset/geometry.hpp"

using namespace overset;

namespace {

double h_dot(const Grid1D& g, const Vector& p, const Vector& q) {
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s += g.norm[i] * p[i] * q[i];
  return s;
}

/// phi^T H D q + (D phi)^T H q - sum_i boundary_i phi_i q_i
double sbp_defect(const Grid1D& g, std::mt19937_64& rng) {
  const Vector p = oracle::random_vec(rng, g.size()), q = oracle::random_vec(rng, g.size());
  double b = 0.0;
  for (int i = 0; i < g.size(); ++i) b += g.boundary[i] * p[i] * q[i];
  const double lhs = h_dot(g, p, g.derivative(q)) + h_dot(g, g.derivative(p), q);
  return std::abs(lhs - b) / (norm2(p) * norm2(q));
}

Vector sample(const Grid1D& g, double (*f)(double)) {
  Vector v(g.size());
  for (int i = 0; i < g.size(); ++i) v[i] = f(g.x[i]);
  return v;
}

}  // namespace

TEST_CASE("single block: linears, constants, quadrature") {
  for (int order : {2, 4}) {
    const Grid1D g = build_grid_1d(0.0, 1.0, 11, order);
    CHECK(g.spacing() == doctest::Approx(0.1).epsilon(1e-14));
    const Vector dx = g.derivative(g.x);
    const Vector d1 = g.derivative(Vector(11, 1.0));
    double sum = 0.0;
    for (int i = 0; i < 11; ++i) {
      CHECK(std::abs(dx[i] - 1.0) <= 1e-13);
      CHECK(std::abs(d1[i]) <= 1e-13);
      sum += g.norm[i];
    }
    CHECK(std::abs(sum - 1.0) <= 1e-13);
    CHECK(g.x.back() == 1.0);
  }
}

TEST_CASE("SBP norm coefficients") {
  const double h = 0.1;
  const Grid1D g2 = build_grid_1d(0.0, 1.0, 11, 2);
  CHECK(g2.norm[0] == doctest::Approx(h / 2).epsilon(1e-14));
  CHECK(g2.norm[5] == doctest::Approx(h).epsilon(1e-14));
  CHECK(g2.norm[10] == doctest::Approx(h / 2).epsilon(1e-14));
  const Grid1D g4 = build_grid_1d(0.0, 1.0, 11, 4);
  const double w[4] = {17.0 / 48, 59.0 / 48, 43.0 / 48, 49.0 / 48};
  for (int i = 0; i < 4; ++i) {
    CHECK(g4.norm[i] == doctest::Approx(w[i] * h).epsilon(1e-14));
    CHECK(g4.norm[10 - i] == doctest::Approx(w[i] * h).epsilon(1e-14));
  }
  CHECK(g4.norm[5] == doctest::Approx(h).epsilon(1e-14));
}

TEST_CASE("minimum node counts") {
  CHECK(min_nodes_for_order(2) == 4);
  CHECK(min_nodes_for_order(4) == 8);
  CHECK_THROWS_AS(build_grid_1d(0, 1, 3, 2), GeometryError);
  CHECK_THROWS_AS(build_grid_1d(0, 1, 7, 4), GeometryError);
  CHECK_THROWS_AS(build_grid_1d(0, 1, 11, 3), GeometryError);
}

TEST_CASE("polynomial accuracy") {
  const Grid1D g2 = build_grid_1d(0.0, 1.0, 21, 2);
  const Grid1D g4 = build_grid_1d(0.0, 1.0, 21, 4);
  const Vector q2 = sample(g2, [](double x) { return x * x; });
  const Vector d2 = g2.derivative(q2);
  for (int i = 1; i < 20; ++i) CHECK(std::abs(d2[i] - 2 * g2.x[i]) <= 1e-12);
  // p = 4: boundary closure exact for quadratics, interior for quartics
  const Vector q4 = sample(g4, [](double x) { return x * x; });
  const Vector d4 = g4.derivative(q4);
  for (int i = 0; i < 21; ++i) CHECK(std::abs(d4[i] - 2 * g4.x[i]) <= 1e-11);
  const Vector r4 = sample(g4, [](double x) { return x * x * x * x; });
  const Vector e4 = g4.derivative(r4);
  for (int i = 4; i < 17; ++i) CHECK(std::abs(e4[i] - 4 * std::pow(g4.x[i], 3)) <= 1e-11);
}

TEST_CASE("interior convergence order") {
  for (int order : {2, 4}) {
    double prev = 0.0;
    for (int n : {41, 81, 161}) {
      const Grid1D g = build_grid_1d(0.0, 1.0, n, order);
      const Vector d = g.derivative(sample(g, [](double x) { return std::sin(3 * x); }));
      double err = 0.0;
      for (int i = 0; i < n; ++i) err += g.norm[i] * std::pow(d[i] - 3 * std::cos(3 * g.x[i]), 2);
      err = std::sqrt(err);
      if (prev > 0.0) CHECK(std::log2(prev / err) >= (order == 2 ? 1.4 : 2.4));
      prev = err;
    }
  }
}

TEST_CASE("overset 1D index examples") {
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.1, 0.1, 2);
  CHECK(g.idx_u_b == 10);
  CHECK(g.idx_u_c == 20);
  CHECK(g.idx_v_b == 0);
  CHECK(g.idx_v_c == 10);
  CHECK(g.grid_u.x[g.idx_u_b] == doctest::Approx(1.0));
  CHECK(g.grid_v.x[g.idx_v_c] == doctest::Approx(2.0));
  CHECK_NOTHROW(build_overset_1d(0, 1, 2, 3, 0.1, 0.05, 2));
  CHECK_THROWS_AS(build_overset_1d(0, 1, 2, 3, 0.3, 0.1, 2), GeometryError);
  try {
    build_overset_1d(0, 1, 2, 3, 0.3, 0.1, 2);
  } catch (const GeometryError& e) {
    CHECK(std::string(e.what()).find("[a,b]") != std::string::npos);
  }
  CHECK_THROWS_AS(build_overset_1d(0, 2, 1, 3, 0.1, 0.1, 2), GeometryError);
  const OversetGeometry1D n = build_overset_1d_nodes(0, 1, 2, 3, 51, 2);
  CHECK(n.h_u == doctest::Approx(0.04));
  CHECK(n.grid_u.size() == 51);
}

namespace {

std::vector<OversetGeometry1D> test_geometries() {
  std::vector<OversetGeometry1D> gs;
  for (int order : {2, 4}) {
    gs.push_back(build_overset_1d(0, 1, 2, 3, 0.1, 0.1, order));
    gs.push_back(build_overset_1d(0, 1, 2, 3, 0.05, 0.1, order));
    gs.push_back(build_overset_1d(0, 1, 2, 3, 0.1, 0.025, order));
    gs.push_back(build_overset_1d(-1, 0.5, 1.25, 2, 0.0625, 0.03125, order));
    gs.push_back(build_overset_1d(0, 1, 2, 3, 1.0 / 30, 0.025, order));
  }
  return gs;
}

}  // namespace

TEST_CASE("SBP identity on every constructed grid") {
  std::mt19937_64 rng(4);
  for (const OversetGeometry1D& g : test_geometries()) {
    std::vector<Grid1D> grids{g.grid_u, g.grid_v};
    for (const Grid1D& b : g.blocks_u) grids.push_back(b);
    for (const Grid1D& b : g.blocks_v) grids.push_back(b);
    for (const Grid1D& gr : grids)
      for (int i = 1; i + 1 < gr.size(); ++i) CHECK(gr.boundary[i] == 0.0);
    for (double eta : {0.25, 0.5, 0.75}) {
      const auto w = g.weighted(eta);
      grids.push_back(w.u);
      grids.push_back(w.v);
      // the weight jump leaves a junction term: eta at b on gridU, -(1-eta) at c on gridV
      for (int i = 1; i + 1 < w.u.size(); ++i)
        CHECK(w.u.boundary[i] == doctest::Approx(i == g.idx_u_b ? eta : 0.0));
      for (int i = 1; i + 1 < w.v.size(); ++i)
        CHECK(w.v.boundary[i] == doctest::Approx(i == g.idx_v_c ? -(1.0 - eta) : 0.0));
      // weighted boundary: -1 at the left end of gridU, (1-eta) at c; -eta at b, +1 at d
      CHECK(w.u.boundary.front() == doctest::Approx(-1.0));
      CHECK(w.u.boundary.back() == doctest::Approx(1.0 - eta));
      CHECK(w.v.boundary.front() == doctest::Approx(-eta));
      CHECK(w.v.boundary.back() == doctest::Approx(1.0));
    }
    for (const Grid1D& gr : grids) {
      for (int k = 0; k < 5; ++k) CHECK(sbp_defect(gr, rng) <= 1e-12);
    }
    CHECK(g.grid_u.boundary.front() == -1.0);
    CHECK(g.grid_u.boundary.back() == 1.0);
  }
}

TEST_CASE("norm additivity") {
  std::mt19937_64 rng(6);
  for (const OversetGeometry1D& g : test_geometries()) {
    for (int i = 0; i < g.grid_u.size(); ++i) {
      CHECK(std::abs(g.norm_u_bar[i] + g.norm_u_overlap[i] - g.grid_u.norm[i]) <= 1e-15);
    }
    for (int i = 0; i < g.grid_v.size(); ++i) {
      CHECK(std::abs(g.norm_v_bar[i] + g.norm_v_overlap[i] - g.grid_v.norm[i]) <= 1e-15);
    }
    const Vector q = oracle::random_vec(rng, g.grid_u.size());
    double full = 0, bar = 0, ov = 0;
    for (int i = 0; i < g.grid_u.size(); ++i) {
      full += g.grid_u.norm[i] * q[i] * q[i];
      bar += g.norm_u_bar[i] * q[i] * q[i];
      ov += g.norm_u_overlap[i] * q[i] * q[i];
    }
    CHECK(std::abs(full - bar - ov) <= 1e-12 * full);
    // overlap quadratures integrate 1 to c - b on both grids
    double su = 0, sv = 0;
    for (double w : g.norm_u_overlap) su += w;
    for (double w : g.norm_v_overlap) sv += w;
    CHECK(su == doctest::Approx(g.c - g.b).epsilon(1e-13));
    CHECK(sv == doctest::Approx(g.c - g.b).epsilon(1e-13));
    // weighted operators: H~ = H - eta H_O (u) and H - (1-eta) H_O (v)
    const auto w = g.weighted(0.3);
    for (int i = 0; i < g.grid_u.size(); ++i) {
      CHECK(std::abs(w.u.norm[i] - (g.grid_u.norm[i] - 0.3 * g.norm_u_overlap[i])) <= 1e-15);
    }
    for (int i = 0; i < g.grid_v.size(); ++i) {
      CHECK(std::abs(w.v.norm[i] - (g.grid_v.norm[i] - 0.7 * g.norm_v_overlap[i])) <= 1e-15);
    }
  }
}

TEST_CASE("shared interior nodes") {
  const OversetGeometry1D g = build_overset_1d(0, 1, 2, 3, 0.05, 0.1, 2);
  const auto s = g.shared_interior_nodes();
  CHECK(s.size() == 9);
  for (const auto& n : s) {
    CHECK(g.grid_u.x[n.iu] == doctest::Approx(g.grid_v.x[n.iv]).epsilon(1e-14));
    CHECK(n.x > 1.0);
    CHECK(n.x < 2.0);
  }
}

TEST_CASE("periodic grid") {
  const PeriodicGrid p = build_periodic_grid(1.0, 10, 2);
  CHECK(p.n == 10);
  CHECK(p.h == doctest::Approx(0.1));
  CHECK(p.y.front() == 0.0);
  for (int order : {2, 4}) {
    double prev = 0.0;
    for (int n : {16, 32, 64}) {
      const PeriodicGrid g = build_periodic_grid(1.0, n, order);
      double err = 0.0;
      for (int j = 0; j < n; ++j) {
        double d = 0.0;
        for (std::size_t s = 0; s < g.offsets.size(); ++s) {
          d += g.coef[s] * std::sin(2 * M_PI * g.y[((j + g.offsets[s]) % n + n) % n]);
        }
        err = std::max(err, std::abs(d - 2 * M_PI * std::cos(2 * M_PI * g.y[j])));
      }
      if (prev > 0.0) CHECK(std::log2(prev / err) == doctest::Approx(order).epsilon(0.05));
      prev = err;
    }
  }
  // skew-symmetry: q^T Dy q = 0
  std::mt19937_64 rng(2);
  const PeriodicGrid g = build_periodic_grid(2.0, 12, 4);
  const Vector q = oracle::random_vec(rng, 12);
  double s = 0.0;
  for (int j = 0; j < 12; ++j)
    for (std::size_t k = 0; k < g.offsets.size(); ++k) s += q[j] * g.coef[k] * q[((j + g.offsets[k]) % 12 + 12) % 12];
  CHECK(std::abs(s) <= 1e-12 * dot(q, q) / g.h);
}

TEST_CASE("overset 2D geometry") {
  const OversetGeometry2D g = build_overset_2d(0.5, 0.0, 1.0, 2.0, 3.0, 1.0, 0.1, 0.1, 0.1, 2, {3, 3});
  CHECK(g.ny() == 10);  // distinct periodic nodes; y = Ly is the image of y = 0
  CHECK(g.nx_u() == 16);
  CHECK(g.nx_v() == 21);
  CHECK(g.overlap_points.size() == 9);
  for (const OverlapPoint& p : g.overlap_points) {
    CHECK(g.x.grid_u.x[p.iu] == doctest::Approx(p.x).epsilon(1e-14));
    CHECK(g.x.grid_v.x[p.iv] == doctest::Approx(p.x).epsilon(1e-14));
    CHECK(g.y.y[p.j] == doctest::Approx(p.y).epsilon(1e-14));
    CHECK(p.iu > g.x.idx_u_b);
    CHECK(p.iu < g.x.idx_u_c);
  }
  int blanked = 0;
  for (std::size_t i = 0; i < g.base_x.size(); ++i)
    if (!g.base_active[i]) ++blanked;
  CHECK(blanked == 10);  // base nodes left of b
  const OversetGeometry2D none = build_overset_2d(0.5, 0.0, 1.0, 2.0, 3.0, 1.0, 0.1, 0.1, 0.1, 2);
  CHECK(none.overlap_points.empty());
  CHECK_THROWS_AS(build_overset_2d(1.0, 0.0, 1.0, 2.0, 3.0, 1.0, 0.1, 0.1, 0.1, 2), GeometryError);
  CHECK_THROWS_AS(build_overset_2d(-0.5, 0.0, 1.0, 2.0, 3.0, 1.0, 0.1, 0.1, 0.1, 2), GeometryError);
  CHECK(g.normal_b.nx == -1.0);
  CHECK(g.normal_c.nx == 1.0);
}

TEST_CASE("2D discrete divergence theorem") {
  std::mt19937_64 rng(15);
  const OversetGeometry2D g = build_overset_2d(0.5, 0.0, 1.0, 2.0, 3.0, 1.0, 0.05, 0.1, 0.1, 4);
  for (const Grid1D& gx : {g.x.grid_u, g.x.grid_v}) {
    const int nx = gx.size(), ny = g.ny();
    const Vector f = oracle::random_vec(rng, nx * ny), h = oracle::random_vec(rng, nx * ny);
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < ny; ++j) {
      const Vector row(f.begin() + j * nx, f.begin() + (j + 1) * nx);
      const Vector d = gx.derivative(row);
      for (int i = 0; i < nx; ++i) {
        double dy = 0.0;
        for (std::size_t s = 0; s < g.y.offsets.size(); ++s) {
          dy += g.y.coef[s] * h[((j + g.y.offsets[s]) % ny + ny) % ny * nx + i];
        }
        lhs += g.y.h * gx.norm[i] * (d[i] + dy);
      }
      rhs += g.y.h * (row.back() - row.front());
    }
    CHECK(std::abs(lhs - rhs) <= 1e-12 * norm2(f) * 10);
  }
}

TEST_CASE("transfer") {
  const Grid1D g = build_grid_1d(0.0, 1.0, 21, 4);
  const Vector cubic = sample(g, [](double x) { return 1 + x - 2 * x * x + 3 * x * x * x; });
  const Vector on = transfer(g, cubic, 1, Vector{g.x[7]});
  CHECK(on[0] == cubic[7]);
  const double xm = 0.5 * (g.x[7] + g.x[8]);
  const Vector mid = transfer(g, cubic, 1, Vector{xm, 0.0125, 0.9875});
  CHECK(std::abs(mid[0] - (1 + xm - 2 * xm * xm + 3 * xm * xm * xm)) <= 1e-13);
  CHECK_THROWS(transfer(g, cubic, 1, Vector{1.01}));
  CHECK_THROWS(transfer(g, cubic, 1, Vector{-0.01}));

  double prev = 0.0;
  for (int n : {21, 41, 81}) {
    const Grid1D gg = build_grid_1d(0.0, 1.0, n, 4);
    const Vector s = sample(gg, [](double x) { return std::sin(4 * x); });
    Vector targets;
    for (int i = 0; i + 1 < n; ++i) targets.push_back(0.5 * (gg.x[i] + gg.x[i + 1]));
    const Vector r = transfer(gg, s, 1, targets);
    double err = 0.0;
    for (std::size_t k = 0; k < targets.size(); ++k) err = std::max(err, std::abs(r[k] - std::sin(4 * targets[k])));
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 4.5);
    prev = err;
  }
  // two components
  Vector two(2 * g.size());
  for (int i = 0; i < g.size(); ++i) {
    two[2 * i] = g.x[i];
    two[2 * i + 1] = -g.x[i];
  }
  const Vector t = transfer(g, two, 2, Vector{0.33});
  CHECK(t.size() == 2);
  CHECK(t[0] == doctest::Approx(0.33).epsilon(1e-13));
  CHECK(t[1] == doctest::Approx(-0.33).epsilon(1e-13));
}
