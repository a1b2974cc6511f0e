#include "overset/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace overset {

SymMatrix::SymMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n * n), 0.0) {
  if (n < 0) throw LinalgError("negative matrix dimension");
}

SymMatrix SymMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const int n = static_cast<int>(rows.size());
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != n) throw LinalgError("matrix is not square");
  }
  double scale = 1.0;
  for (const auto& r : rows) {
    for (double x : r) {
      if (!std::isfinite(x)) throw LinalgError("matrix has non-finite entries");
      scale = std::max(scale, std::abs(x));
    }
  }
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double aij = rows[i][j];
      const double aji = rows[j][i];
      if (std::abs(aij - aji) > 1e-14 * scale) {
        throw LinalgError("matrix is not symmetric at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
      m.set(i, j, 0.5 * (aij + aji));
    }
  }
  return m;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) m.set(i, i, 1.0);
  return m;
}

SymMatrix SymMatrix::diagonal(std::span<const double> d) {
  SymMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.size(); ++i) m.set(i, i, d[i]);
  return m;
}

SymMatrix SymMatrix::outer(std::span<const double> v) {
  SymMatrix m(static_cast<int>(v.size()));
  for (int i = 0; i < m.size(); ++i) {
    for (int j = i; j < m.size(); ++j) m.set(i, j, v[i] * v[j]);
  }
  return m;
}

void SymMatrix::set(int i, int j, double value) {
  a_[static_cast<std::size_t>(i * n_ + j)] = value;
  a_[static_cast<std::size_t>(j * n_ + i)] = value;
}

std::vector<std::vector<double>> SymMatrix::rows() const {
  std::vector<std::vector<double>> r(n_, std::vector<double>(n_));
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) r[i][j] = (*this)(i, j);
  }
  return r;
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& o) {
  if (o.n_ != n_) throw LinalgError("dimension mismatch in matrix addition");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
  return *this;
}

SymMatrix& SymMatrix::operator-=(const SymMatrix& o) {
  if (o.n_ != n_) throw LinalgError("dimension mismatch in matrix subtraction");
  for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  for (double& x : a_) x *= s;
  return *this;
}

Vector SymMatrix::apply(std::span<const double> x) const {
  Vector out(static_cast<std::size_t>(n_));
  apply_into(x, out);
  return out;
}

void SymMatrix::apply_into(std::span<const double> x, std::span<double> out) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    const double* row = a_.data() + static_cast<std::ptrdiff_t>(i * n_);
    for (int j = 0; j < n_; ++j) s += row[j] * x[j];
    out[i] = s;
  }
}

double SymMatrix::quadratic(std::span<const double> x) const { return bilinear(x, x); }

double SymMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    double r = 0.0;
    for (int j = 0; j < n_; ++j) r += (*this)(i, j) * y[j];
    s += x[i] * r;
  }
  return s;
}

double SymMatrix::frobenius_norm() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return std::sqrt(s);
}

double SymMatrix::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::abs(x));
  return m;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
SymMatrix operator*(SymMatrix a, double s) { return a *= s; }

Vector EigenDecomp::column(int j) const {
  Vector c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) c[i] = p(i, j);
  return c;
}

SymMatrix EigenDecomp::reconstruct() const {
  SymMatrix m(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += p(i, k) * values[k] * p(j, k);
      m.set(i, j, s);
    }
  }
  return m;
}

double EigenDecomp::spectral_radius() const {
  double r = 0.0;
  for (double v : values) r = std::max(r, std::abs(v));
  return r;
}

EigenDecomp eig_sym(const SymMatrix& input) {
  const int n = input.size();
  std::vector<double> a(static_cast<std::size_t>(n * n));
  std::vector<double> v(static_cast<std::size_t>(n * n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[i * n + j] = input(i, j);
    v[i * n + i] = 1.0;
  }
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * n + j)]; };
  auto V = [&](int i, int j) -> double& { return v[static_cast<std::size_t>(i * n + j)]; };

  const double total = std::max(input.frobenius_norm(), 1e-300);
  constexpr int kMaxSweeps = 100;
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (std::sqrt(off) <= 1e-17 * total) {
      converged = true;
      break;
    }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (apq == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p);
          const double akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k);
          const double aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p);
          const double vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    }
    if (std::sqrt(off) > 1e-14 * total) throw LinalgError("Jacobi iteration did not converge");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x) > A(y, y); });

  EigenDecomp out;
  out.n = n;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors.resize(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j) {
    const int src = order[j];
    out.values[j] = A(src, src);
    double sign = 1.0;
    for (int i = 0; i < n; ++i) {
      if (std::abs(V(i, src)) > 1e-12) {
        sign = V(i, src) > 0.0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < n; ++i) out.vectors[i * n + j] = sign * V(i, src);
  }
  return out;
}

namespace {

int eigen_sign(double lambda, double scale) {
  if (std::abs(lambda) <= kZeroEigenvalueRel * scale) return 0;
  return lambda > 0.0 ? 1 : -1;
}

}  // namespace

FluxSplit flux_split(const EigenDecomp& d) {
  const int n = d.n;
  const double scale = d.spectral_radius();
  FluxSplit s{SymMatrix(n), SymMatrix(n), SymMatrix(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double plus = 0.0;
      double minus = 0.0;
      for (int k = 0; k < n; ++k) {
        const double pp = d.p(i, k) * d.p(j, k);
        switch (eigen_sign(d.values[k], scale)) {
          case 1: plus += pp * d.values[k]; break;
          case -1: minus += pp * d.values[k]; break;
          default: break;
        }
      }
      s.plus.set(i, j, plus);
      s.minus.set(i, j, minus);
      s.abs.set(i, j, plus - minus);
    }
  }
  return s;
}

FluxSplit flux_split(const SymMatrix& a) { return flux_split(eig_sym(a)); }

bool is_psd(const SymMatrix& m, double tol) {
  if (m.size() == 0) return true;
  const EigenDecomp d = eig_sym(m);
  return d.values.back() >= -tol * std::max(1.0, m.frobenius_norm());
}

SymMatrix normal_matrix(const SymMatrix& a1, const SymMatrix& a2, double n1, double n2) {
  if (std::abs(std::hypot(n1, n2) - 1.0) > 1e-12) {
    throw LinalgError("normal vector is not of unit length");
  }
  if (a1.size() != a2.size()) throw LinalgError("coefficient matrices differ in size");
  return n1 * a1 + n2 * a2;
}

Vector CharVector::plus() const {
  Vector out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (sign[k] > 0) out.push_back(w[k]);
  }
  return out;
}

Vector CharVector::minus() const {
  Vector out;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (sign[k] < 0) out.push_back(w[k]);
  }
  return out;
}

CharVector char_transform(std::span<const double> q, const EigenDecomp& d) {
  if (static_cast<int>(q.size()) != d.n) throw LinalgError("state size does not match system");
  CharVector cv;
  cv.w.assign(static_cast<std::size_t>(d.n), 0.0);
  cv.sign.resize(static_cast<std::size_t>(d.n));
  const double scale = d.spectral_radius();
  for (int j = 0; j < d.n; ++j) {
    double s = 0.0;
    for (int i = 0; i < d.n; ++i) s += d.p(i, j) * q[i];
    cv.w[j] = s;
    cv.sign[j] = eigen_sign(d.values[j], scale);
  }
  return cv;
}

Vector from_characteristic(std::span<const double> w, const EigenDecomp& d) {
  Vector q(static_cast<std::size_t>(d.n), 0.0);
  for (int i = 0; i < d.n; ++i) {
    for (int j = 0; j < d.n; ++j) q[i] += d.p(i, j) * w[j];
  }
  return q;
}

HyperbolicSystem HyperbolicSystem::make(const SymMatrix& a) {
  HyperbolicSystem s;
  s.a = a;
  s.eig = eig_sym(a);
  s.split = flux_split(s.eig);
  const double scale = s.eig.spectral_radius();
  for (double l : s.eig.values) {
    if (std::abs(l) <= kZeroEigenvalueRel * scale) s.has_zero_eigenvalue = true;
  }
  return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace overset
