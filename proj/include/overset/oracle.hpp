#pragma once

#include <functional>
#include <limits>
#include <span>

#include "overset/linalg.hpp"

namespace overset {

using ScalarProfile = std::function<double(double)>;
using VectorProfile = std::function<Vector(double)>;

/// Solution of q_t + alpha q_x = 0 on [a,d] with zero inflow data:
/// omega0(x - alpha t), or 0 once the characteristic foot leaves [a,d].
double exact_scalar(double x, double t, double alpha, const ScalarProfile& omega0,
                    double a = -std::numeric_limits<double>::infinity(),
                    double d = std::numeric_limits<double>::infinity());

/// Each characteristic variable w_j = p_j^T omega0 advects at lambda_j.
Vector exact_system_1d(double x, double t, const HyperbolicSystem& sys, const VectorProfile& omega0,
                       double a = -std::numeric_limits<double>::infinity(),
                       double d = std::numeric_limits<double>::infinity());

/// sum_j c_j p_j g(k.x - lambda_j t) with (lambda_j, p_j) eigenpairs of k1 A1 + k2 A2.
Vector exact_plane_wave_2d(double x, double y, double t, const SymMatrix& a1, const SymMatrix& a2, double k1,
                           double k2, const ScalarProfile& g, std::span<const double> weights);

/// exp(-((x - x0)/sigma)^2)
ScalarProfile gaussian(double x0, double sigma, double amplitude = 1.0);

}  // namespace overset
