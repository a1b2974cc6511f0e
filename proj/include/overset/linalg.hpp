#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace overset {

using Vector = std::vector<double>;

class LinalgError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Small dense symmetric matrix (dimension 1-8 in practice), stored full row-major.
/// Symmetry is checked on construction from general data and then enforced by
/// every mutating operation.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n);

  /// Validates |a_ij - a_ji| <= 1e-14 * max(1, max|a|) and stores the symmetric part.
  static SymMatrix from_rows(const std::vector<std::vector<double>>& rows);
  static SymMatrix identity(int n);
  static SymMatrix diagonal(std::span<const double> d);
  /// v v^T
  static SymMatrix outer(std::span<const double> v);

  int size() const { return n_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * n_ + j)]; }
  void set(int i, int j, double value);

  std::vector<std::vector<double>> rows() const;

  SymMatrix& operator+=(const SymMatrix& o);
  SymMatrix& operator-=(const SymMatrix& o);
  SymMatrix& operator*=(double s);

  Vector apply(std::span<const double> x) const;
  /// out = this * x, no allocation
  void apply_into(std::span<const double> x, std::span<double> out) const;
  double quadratic(std::span<const double> x) const;
  double bilinear(std::span<const double> x, std::span<const double> y) const;

  double frobenius_norm() const;
  double max_abs() const;

 private:
  int n_ = 0;
  std::vector<double> a_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(SymMatrix a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);
SymMatrix operator*(SymMatrix a, double s);

/// Eigenvalues sorted descending; column j of P is the eigenvector of values[j].
struct EigenDecomp {
  int n = 0;
  Vector values;
  std::vector<double> vectors;  // row-major n x n, P(i, j) = vectors[i*n + j]

  double p(int i, int j) const { return vectors[static_cast<std::size_t>(i * n + j)]; }
  Vector column(int j) const;
  SymMatrix reconstruct() const;
  double spectral_radius() const;
};

struct FluxSplit {
  SymMatrix plus;   // A+ >= 0
  SymMatrix minus;  // A- <= 0
  SymMatrix abs;    // |A| = A+ - A-

  /// |A-| = -A-
  SymMatrix abs_minus() const { return -1.0 * minus; }
};

/// Cyclic Jacobi.  Deterministic: descending order, first nonzero component of
/// each eigenvector made positive.  Throws LinalgError if the sweep limit is hit.
EigenDecomp eig_sym(const SymMatrix& a);

/// Relative threshold below which an eigenvalue counts as zero for splitting.
inline constexpr double kZeroEigenvalueRel = 1e-13;

FluxSplit flux_split(const SymMatrix& a);
FluxSplit flux_split(const EigenDecomp& decomp);

/// True iff lambda_min >= -tol * max(1, ||M||_F).
bool is_psd(const SymMatrix& m, double tol);

/// n1 A1 + n2 A2 for a unit normal (|n| = 1 within 1e-12).
SymMatrix normal_matrix(const SymMatrix& a1, const SymMatrix& a2, double n1, double n2);

/// Characteristic variables w = P^T q, with each entry tagged by the sign of
/// its eigenvalue (+1, -1, or 0 for eigenvalues treated as zero).
struct CharVector {
  Vector w;
  std::vector<int> sign;

  Vector plus() const;
  Vector minus() const;
};

CharVector char_transform(std::span<const double> q, const EigenDecomp& decomp);
/// q = P w
Vector from_characteristic(std::span<const double> w, const EigenDecomp& decomp);

/// Constant-coefficient symmetric flux matrix with its cached decomposition.
struct HyperbolicSystem {
  SymMatrix a;
  EigenDecomp eig;
  FluxSplit split;
  bool has_zero_eigenvalue = false;

  static HyperbolicSystem make(const SymMatrix& a);
  int size() const { return a.size(); }
  double spectral_radius() const { return eig.spectral_radius(); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace overset
