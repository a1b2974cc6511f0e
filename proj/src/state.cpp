#include "overset/state.hpp"

#include <cmath>
#include <stdexcept>

namespace overset {

SimState SimState::zeros_like() const {
  SimState z;
  z.ncomp = ncomp;
  z.ny = ny;
  z.u.assign(u.size(), 0.0);
  z.v.assign(v.size(), 0.0);
  z.t = t;
  return z;
}

long SimState::first_non_finite() const {
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) return static_cast<long>(i);
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) return static_cast<long>(u.size() + i);
  }
  return -1;
}

bool SimState::all_finite() const { return first_non_finite() < 0; }

void axpy(SimState& y, double a, const SimState& x) {
  if (y.u.size() != x.u.size() || y.v.size() != x.v.size()) {
    throw std::invalid_argument("axpy: state shapes differ");
  }
  for (std::size_t i = 0; i < y.u.size(); ++i) y.u[i] += a * x.u[i];
  for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}

}  // namespace overset
