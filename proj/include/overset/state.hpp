#pragma once

#include <span>

#include "overset/linalg.hpp"

namespace overset {

/// Fields on gridU and gridV, node (i, j) component k stored at
/// (j * nx + i) * ncomp + k.  1D runs use ny = 1.  Single-domain runs
/// keep their field in u and leave v empty.
struct SimState {
  int ncomp = 1;
  int ny = 1;
  Vector u;
  Vector v;
  double t = 0.0;

  int nu() const { return static_cast<int>(u.size()) / (ncomp * ny); }
  int nv() const { return static_cast<int>(v.size()) / (ncomp * ny); }

  std::span<const double> u_at(int i, int j = 0) const {
    return {u.data() + static_cast<std::ptrdiff_t>((j * nu() + i) * ncomp), static_cast<std::size_t>(ncomp)};
  }
  std::span<const double> v_at(int i, int j = 0) const {
    return {v.data() + static_cast<std::ptrdiff_t>((j * nv() + i) * ncomp), static_cast<std::size_t>(ncomp)};
  }
  std::span<double> u_at(int i, int j = 0) {
    return {u.data() + static_cast<std::ptrdiff_t>((j * nu() + i) * ncomp), static_cast<std::size_t>(ncomp)};
  }
  std::span<double> v_at(int i, int j = 0) {
    return {v.data() + static_cast<std::ptrdiff_t>((j * nv() + i) * ncomp), static_cast<std::size_t>(ncomp)};
  }

  /// Same shape, all zeros.
  SimState zeros_like() const;
  bool all_finite() const;
  /// Index of the first non-finite entry in u then v, or -1.
  long first_non_finite() const;
};

/// y += a x (same shape)
void axpy(SimState& y, double a, const SimState& x);

}  // namespace overset
