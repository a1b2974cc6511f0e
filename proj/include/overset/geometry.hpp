#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "overset/linalg.hpp"

namespace overset {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Minimum node count of a single SBP block.
int min_nodes_for_order(int order);

/// Diagonal-norm SBP first-derivative operator on one or more glued blocks.
/// D is stored as CSR rows; Q = H D satisfies Q + Q^T = diag(boundary).
struct Grid1D {
  double left = 0.0;
  double right = 0.0;
  int order = 2;
  Vector x;
  Vector norm;
  Vector boundary;
  std::vector<int> junctions;

  std::vector<int> row_ptr;
  std::vector<int> col;
  Vector val;

  int size() const { return static_cast<int>(x.size()); }
  double spacing() const { return size() > 1 ? x[1] - x[0] : 0.0; }

  /// out = (D (x) I_ncomp) f, node-major with ncomp values per node.
  void derivative(std::span<const double> f, int ncomp, std::span<double> out) const;
  Vector derivative(std::span<const double> f) const;

  /// Dense entry D(i,j), zero outside the stencil.
  double d(int i, int j) const;
  /// Node whose coordinate equals xv to within 1e-9 h, or -1.
  int find_node(double xv) const;
};

/// Single SBP block on [left,right] with n uniformly spaced nodes.
Grid1D build_grid_1d(double left, double right, int n, int order);

/// Blocks sharing end nodes merged into one operator: H = sum w_k H_k,
/// Q = sum w_k Q_k, D = H^{-1} Q.
Grid1D glue(std::span<const Grid1D> blocks, std::span<const double> weights);

/// y-periodic central difference.
struct PeriodicGrid {
  int n = 0;
  double length = 0.0;
  double h = 0.0;
  int order = 2;
  Vector y;
  std::vector<int> offsets;
  Vector coef;  // already divided by h

  /// Quadrature weight, identical at every node.
  double weight() const { return h; }
};

PeriodicGrid build_periodic_grid(double length, int n, int order);

/// Two component intervals gridU on [a,c] and gridV on [b,d], each glued
/// from SBP blocks at the interior interface node.
struct OversetGeometry1D {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  int order = 2;
  double h_u = 0.0, h_v = 0.0;

  Grid1D grid_u;
  Grid1D grid_v;
  int idx_u_b = 0, idx_u_c = 0, idx_v_b = 0, idx_v_c = 0;
  std::vector<bool> overlap_u, overlap_v;

  // Sub-interval quadratures sized to their grid, zero off the sub-interval.
  Vector norm_u_bar, norm_u_overlap;
  Vector norm_v_overlap, norm_v_bar;

  // [a,b],[b,c] and [b,c],[c,d]
  std::vector<Grid1D> blocks_u, blocks_v;

  struct Weighted {
    Grid1D u;
    Grid1D v;
  };
  /// Operators whose overlap block carries weight (1-eta) on gridU and eta on gridV.
  Weighted weighted(double eta) const;

  struct SharedNode {
    int iu;
    int iv;
    double x;
  };
  /// Nodes present on both grids strictly inside (b,c).
  std::vector<SharedNode> shared_interior_nodes() const;

  /// beta at x=b is eta, at x=c it is 1-eta; A_n = A on both.
  static double beta_b(double eta) { return eta; }
  static double beta_c(double eta) { return 1.0 - eta; }
};

OversetGeometry1D build_overset_1d(double a, double b, double c, double d, double h_u, double h_v, int order);

/// Spacing from a per-subdomain node count: h_u = (c-a)/(n-1), h_v = (d-b)/(n-1).
OversetGeometry1D build_overset_1d_nodes(double a, double b, double c, double d, int n_per_subdomain,
                                         int order);

struct OverlapPoint {
  double x = 0.0;
  double y = 0.0;
  int iu = 0;
  int iv = 0;
  int j = 0;
};

/// Uniform mx x my lattice in the overlap strip; 0 x 0 means no points.
struct OverlapPointSpec {
  int mx = 0;
  int my = 0;
};

/// y-periodic channel.  gridU covers [a',c], gridV is the active part [b,d]
/// of a base grid on [a,d] blanked left of b.
struct OversetGeometry2D {
  double a = 0.0;
  double a_prime = 0.0;
  double b = 0.0, c = 0.0, d = 0.0;
  double ly = 0.0;
  int order = 2;

  OversetGeometry1D x;
  PeriodicGrid y;

  Vector base_x;
  std::vector<bool> base_active;

  std::vector<OverlapPoint> overlap_points;

  struct Normal {
    double nx;
    double ny;
  };
  // outward normals: Gamma_a of Omega_u, Gamma_b of Omega_v, Gamma_c of Omega_u, Gamma_d of Omega_v
  Normal normal_a{-1.0, 0.0};
  Normal normal_b{-1.0, 0.0};
  Normal normal_c{1.0, 0.0};
  Normal normal_d{1.0, 0.0};

  int nx_u() const { return x.grid_u.size(); }
  int nx_v() const { return x.grid_v.size(); }
  int ny() const { return y.n; }

  static double beta_b(double eta) { return -eta; }
  static double beta_c(double eta) { return 1.0 - eta; }
};

OversetGeometry2D build_overset_2d(double a_prime, double a, double b, double c, double d, double ly,
                                   double hx_u, double hx_v, double hy, int order,
                                   OverlapPointSpec points = {});

/// Values of a node-major field (ncomp per node) at target coordinates:
/// injection on nodes, otherwise barycentric Lagrange through order+1 nodes.
Vector transfer(const Grid1D& source, std::span<const double> values, int ncomp,
                std::span<const double> targets);

}  // namespace overset
