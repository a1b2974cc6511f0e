#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "overset/linalg.hpp"

using namespace overset;

namespace {

SymMatrix ptp(const EigenDecomp& e) {
  SymMatrix m(e.n);
  for (int i = 0; i < e.n; ++i)
    for (int j = i; j < e.n; ++j) {
      double s = 0.0;
      for (int k = 0; k < e.n; ++k) s += e.p(k, i) * e.p(k, j);
      m.set(i, j, s);
    }
  return m;
}

}  // namespace

TEST_CASE("eig_sym: analytic 2x2") {
  const SymMatrix a = SymMatrix::from_rows({{1, 2}, {2, 1}});
  const EigenDecomp e = eig_sym(a);
  CHECK(e.values[0] == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(e.values[1] == doctest::Approx(-1.0).epsilon(1e-14));
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(e.p(0, 0) == doctest::Approx(r).epsilon(1e-14));
  CHECK(e.p(1, 0) == doctest::Approx(r).epsilon(1e-14));
  CHECK(e.p(0, 1) == doctest::Approx(r).epsilon(1e-14));
  CHECK(e.p(1, 1) == doctest::Approx(-r).epsilon(1e-14));
}

TEST_CASE("eig_sym: identity") {
  const EigenDecomp e = eig_sym(SymMatrix::identity(3));
  for (double l : e.values) CHECK(l == 1.0);
  CHECK(oracle::fro(e.reconstruct() - SymMatrix::identity(3)) <= 1e-15);
  CHECK(oracle::fro(ptp(e) - SymMatrix::identity(3)) <= 1e-15);
}

TEST_CASE("eig_sym: random reconstruction, orthogonality and invariants") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const SymMatrix a = oracle::random_sym(rng, n, 1.0 + trial % 7);
    const EigenDecomp e = eig_sym(a);
    const double na = oracle::fro(a);
    CHECK(oracle::fro(e.reconstruct() - a) <= 1e-12 * na);
    CHECK(oracle::fro(ptp(e) - SymMatrix::identity(n)) <= 1e-13);
    double tr = 0.0, sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) tr += a(i, i);
    for (double l : e.values) {
      sum += l;
      sq += l * l;
    }
    CHECK(std::abs(tr - sum) <= 1e-12 * std::max(1.0, na));
    CHECK(std::abs(std::sqrt(sq) - na) <= 1e-12 * na);
    for (int i = 1; i < n; ++i) CHECK(e.values[i - 1] >= e.values[i]);
  }
}

TEST_CASE("eig_sym: deterministic") {
  std::mt19937_64 rng(5);
  const SymMatrix a = oracle::random_sym(rng, 5);
  const EigenDecomp e1 = eig_sym(a), e2 = eig_sym(a);
  CHECK(e1.values == e2.values);
  CHECK(e1.vectors == e2.vectors);
}

TEST_CASE("from_rows rejects non-symmetric input") {
  CHECK_THROWS_AS(SymMatrix::from_rows({{1, 2}, {2.1, 1}}), LinalgError);
  CHECK_THROWS_AS(SymMatrix::from_rows({{1, 2}}), LinalgError);
}

TEST_CASE("flux_split examples") {
  const FluxSplit s = flux_split(SymMatrix::from_rows({{1, 2}, {2, 1}}));
  CHECK(oracle::fro(s.plus - 1.5 * SymMatrix::from_rows({{1, 1}, {1, 1}})) <= 1e-14);
  CHECK(oracle::fro(s.abs_minus() - 0.5 * SymMatrix::from_rows({{1, -1}, {-1, 1}})) <= 1e-14);

  const double d[2] = {2, -3};
  const FluxSplit t = flux_split(SymMatrix::diagonal(d));
  CHECK(oracle::fro(t.plus - SymMatrix::from_rows({{2, 0}, {0, 0}})) == 0.0);
  CHECK(oracle::fro(t.minus - SymMatrix::from_rows({{0, 0}, {0, -3}})) == 0.0);

  const FluxSplit z = flux_split(SymMatrix(3));
  CHECK(oracle::fro(z.plus) == 0.0);
  CHECK(oracle::fro(z.minus) == 0.0);
  CHECK(oracle::fro(z.abs) == 0.0);
}

TEST_CASE("flux_split properties") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + trial % 6;
    const SymMatrix a = oracle::random_sym(rng, n, 3.0);
    const HyperbolicSystem sys = HyperbolicSystem::make(a);
    const FluxSplit& s = sys.split;
    CHECK(oracle::fro(s.plus + s.minus - a) <= 1e-12 * std::max(1.0, oracle::fro(a)));
    CHECK(oracle::fro(s.plus - s.minus - s.abs) <= 1e-12 * std::max(1.0, oracle::fro(a)));
    CHECK(is_psd(s.plus, 1e-12));
    CHECK(is_psd(s.abs_minus(), 1e-12));

    const Vector q = oracle::random_vec(rng, n);
    const CharVector w = char_transform(q, sys.eig);
    CHECK(norm2(w.w) == doctest::Approx(norm2(q)).epsilon(1e-12));
    double lp = 0.0, lm = 0.0;
    for (int k = 0; k < n; ++k) {
      if (w.sign[k] > 0) lp += sys.eig.values[k] * w.w[k] * w.w[k];
      if (w.sign[k] < 0) lm += sys.eig.values[k] * w.w[k] * w.w[k];
    }
    const double scale = std::max(1.0, oracle::fro(a)) * dot(q, q);
    CHECK(std::abs(oracle::quad(s.plus, q) - lp) <= 1e-12 * scale);
    CHECK(std::abs(oracle::quad(s.minus, q) - lm) <= 1e-12 * scale);
    const Vector back = from_characteristic(w.w, sys.eig);
    for (int k = 0; k < n; ++k) CHECK(std::abs(back[k] - q[k]) <= 1e-12 * norm2(q));
  }
}

TEST_CASE("zero eigenvalues are in neither part") {
  const HyperbolicSystem sys = HyperbolicSystem::make(SymMatrix::from_rows({{1, 1}, {1, 1}}));
  CHECK(sys.has_zero_eigenvalue);
  const CharVector w = char_transform(Vector{1.0, -1.0}, sys.eig);
  CHECK(w.sign[1] == 0);
  CHECK(norm2(w.plus()) <= 1e-15);
  CHECK(norm2(w.minus()) <= 1e-15);
}

TEST_CASE("is_psd") {
  CHECK(is_psd(SymMatrix::identity(3), 1e-12));
  const double d[2] = {1.0, -1e-3};
  CHECK_FALSE(is_psd(SymMatrix::diagonal(d), 1e-12));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 6;
    const Vector v = oracle::random_vec(rng, n);
    const SymMatrix m = SymMatrix::outer(v);
    CHECK(is_psd(m, 1e-12));
    double worst = INFINITY;
    for (int k = 0; k < 1000; ++k) {
      const Vector x = oracle::random_vec(rng, n);
      worst = std::min(worst, oracle::quad(m, x) / dot(x, x));
    }
    CHECK(worst >= -1e-14 * dot(v, v));
  }
}

TEST_CASE("normal_matrix") {
  const SymMatrix a1 = SymMatrix::from_rows({{1, 2}, {2, 1}});
  const SymMatrix a2 = SymMatrix::from_rows({{1, 0}, {0, -1}});
  CHECK(oracle::fro(normal_matrix(a1, a2, 1, 0) - a1) == 0.0);
  CHECK(oracle::fro(normal_matrix(a1, a2, 0, -1) + a2) == 0.0);
  const double r = 1.0 / std::sqrt(2.0);
  const SymMatrix i2 = SymMatrix::identity(2);
  CHECK(oracle::fro(normal_matrix(i2, i2, r, r) - std::sqrt(2.0) * i2) <= 1e-15);
  CHECK_THROWS(normal_matrix(a1, a2, 1, 1));
}

TEST_CASE("char_transform examples") {
  const EigenDecomp e = eig_sym(SymMatrix::from_rows({{0, 1}, {1, 0}}));
  const CharVector w = char_transform(Vector{1.0, 0.0}, e);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(w.w[0] == doctest::Approx(r).epsilon(1e-15));
  CHECK(w.w[1] == doctest::Approx(r).epsilon(1e-15));
  CHECK(w.sign[0] == 1);
  CHECK(w.sign[1] == -1);
  CHECK(e.values[0] == doctest::Approx(1.0));
  const CharVector z = char_transform(Vector{0.0, 0.0}, e);
  CHECK(z.w == Vector{0.0, 0.0});
}
