#include "overset/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace overset {

namespace {

struct Closure {
  Vector h;                          // left-boundary norm weights (times h)
  std::vector<Vector> rows;          // left-boundary rows of D (times h)
  Vector interior;                   // centred interior stencil (times h), offsets -r..r
};

const Closure& closure(int order) {
  static const Closure p2{
      {0.5},
      {{-1.0, 1.0}},
      {-0.5, 0.0, 0.5},
  };
  static const Closure p4{
      {17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0},
      {
          {-24.0 / 17.0, 59.0 / 34.0, -4.0 / 17.0, -3.0 / 34.0},
          {-0.5, 0.0, 0.5},
          {4.0 / 43.0, -59.0 / 86.0, 0.0, 59.0 / 86.0, -4.0 / 43.0},
          {3.0 / 98.0, 0.0, -59.0 / 98.0, 0.0, 32.0 / 49.0, -4.0 / 49.0},
      },
      {1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0},
  };
  if (order == 2) return p2;
  if (order == 4) return p4;
  throw GeometryError("SBP order must be 2 or 4, got " + std::to_string(order));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

int interval_count(double left, double right, double h, const std::string& name) {
  const double r = (right - left) / h;
  const long n = std::lround(r);
  if (n < 1 || std::abs(r - static_cast<double>(n)) > 1e-9 * std::max(1.0, r)) {
    throw GeometryError("interval " + name + " = [" + fmt(left) + "," + fmt(right) +
                        "] is not an integer multiple of spacing " + fmt(h));
  }
  return static_cast<int>(n);
}

Grid1D block(double left, double right, int n, int order, const std::string& name) {
  if (n < min_nodes_for_order(order)) {
    throw GeometryError("interval " + name + " has " + std::to_string(n) + " nodes, order " +
                        std::to_string(order) + " needs at least " + std::to_string(min_nodes_for_order(order)));
  }
  return build_grid_1d(left, right, n, order);
}

}  // namespace

int min_nodes_for_order(int order) {
  if (order == 2) return 4;
  if (order == 4) return 8;
  throw GeometryError("SBP order must be 2 or 4, got " + std::to_string(order));
}

void Grid1D::derivative(std::span<const double> f, int ncomp, std::span<double> out) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    double* o = out.data() + static_cast<std::ptrdiff_t>(i) * ncomp;
    for (int k = 0; k < ncomp; ++k) o[k] = 0.0;
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      const double w = val[p];
      const double* src = f.data() + static_cast<std::ptrdiff_t>(col[p]) * ncomp;
      for (int k = 0; k < ncomp; ++k) o[k] += w * src[k];
    }
  }
}

Vector Grid1D::derivative(std::span<const double> f) const {
  Vector out(f.size());
  derivative(f, 1, out);
  return out;
}

double Grid1D::d(int i, int j) const {
  for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
    if (col[p] == j) return val[p];
  }
  return 0.0;
}

int Grid1D::find_node(double xv) const {
  const int n = size();
  if (n == 0) return -1;
  auto it = std::lower_bound(x.begin(), x.end(), xv);
  const int hi = static_cast<int>(it - x.begin());
  for (int i : {hi - 1, hi}) {
    if (i < 0 || i >= n) continue;
    const double local = i + 1 < n ? x[i + 1] - x[i] : x[i] - x[i - 1];
    if (std::abs(x[i] - xv) <= 1e-9 * local) return i;
  }
  return -1;
}

Grid1D build_grid_1d(double left, double right, int n, int order) {
  const Closure& cl = closure(order);
  if (n < min_nodes_for_order(order)) {
    throw GeometryError("order " + std::to_string(order) + " needs at least " +
                        std::to_string(min_nodes_for_order(order)) + " nodes, got " + std::to_string(n));
  }
  if (!(right > left)) throw GeometryError("grid interval must have right > left");

  Grid1D g;
  g.left = left;
  g.right = right;
  g.order = order;
  const double h = (right - left) / (n - 1);
  g.x.resize(n);
  for (int i = 0; i < n; ++i) g.x[i] = left + i * h;
  g.x[n - 1] = right;

  const int nb = static_cast<int>(cl.h.size());
  g.norm.assign(n, h);
  for (int i = 0; i < nb; ++i) {
    g.norm[i] = cl.h[i] * h;
    g.norm[n - 1 - i] = cl.h[i] * h;
  }
  g.boundary.assign(n, 0.0);
  g.boundary[0] = -1.0;
  g.boundary[n - 1] = 1.0;

  const int r = static_cast<int>(cl.interior.size()) / 2;
  g.row_ptr.push_back(0);
  for (int i = 0; i < n; ++i) {
    if (i < nb) {
      const Vector& row = cl.rows[i];
      for (int j = 0; j < static_cast<int>(row.size()); ++j) {
        if (row[j] == 0.0) continue;
        g.col.push_back(j);
        g.val.push_back(row[j] / h);
      }
    } else if (i >= n - nb) {
      const int mi = n - 1 - i;
      const Vector& row = cl.rows[mi];
      for (int j = static_cast<int>(row.size()) - 1; j >= 0; --j) {
        if (row[j] == 0.0) continue;
        g.col.push_back(n - 1 - j);
        g.val.push_back(-row[j] / h);
      }
    } else {
      for (int s = -r; s <= r; ++s) {
        const double cf = cl.interior[s + r];
        if (cf == 0.0) continue;
        g.col.push_back(i + s);
        g.val.push_back(cf / h);
      }
    }
    g.row_ptr.push_back(static_cast<int>(g.col.size()));
  }
  return g;
}

Grid1D glue(std::span<const Grid1D> blocks, std::span<const double> weights) {
  if (blocks.empty()) throw GeometryError("glue needs at least one block");
  if (blocks.size() != weights.size()) throw GeometryError("glue needs one weight per block");
  for (double w : weights) {
    if (!(w > 0.0)) throw GeometryError("block weights must be positive");
  }
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    if (blocks[k].order != blocks[0].order) throw GeometryError("glued blocks must share the SBP order");
    const double gap = std::abs(blocks[k].left - blocks[k - 1].right);
    if (gap > 1e-12 * std::max(1.0, std::abs(blocks[k].left))) {
      throw GeometryError("glued blocks must share their end nodes");
    }
  }

  int total = 0;
  std::vector<int> offset;
  for (const Grid1D& blk : blocks) {
    offset.push_back(total);
    total += blk.size() - 1;
  }
  total += 1;

  Grid1D g;
  g.left = blocks.front().left;
  g.right = blocks.back().right;
  g.order = blocks.front().order;
  g.x.assign(total, 0.0);
  g.norm.assign(total, 0.0);
  g.boundary.assign(total, 0.0);
  std::vector<std::map<int, double>> q(total);

  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Grid1D& blk = blocks[k];
    const double w = weights[k];
    const int off = offset[k];
    for (int i = 0; i < blk.size(); ++i) {
      if (k == 0 || i > 0) g.x[off + i] = blk.x[i];
      g.norm[off + i] += w * blk.norm[i];
      g.boundary[off + i] += w * blk.boundary[i];
      for (int p = blk.row_ptr[i]; p < blk.row_ptr[i + 1]; ++p) {
        q[off + i][off + blk.col[p]] += w * blk.norm[i] * blk.val[p];
      }
    }
    if (k > 0) g.junctions.push_back(off);
  }

  g.row_ptr.push_back(0);
  for (int i = 0; i < total; ++i) {
    for (const auto& [j, v] : q[i]) {
      if (v == 0.0) continue;
      g.col.push_back(j);
      g.val.push_back(v / g.norm[i]);
    }
    g.row_ptr.push_back(static_cast<int>(g.col.size()));
  }
  return g;
}

PeriodicGrid build_periodic_grid(double length, int n, int order) {
  PeriodicGrid g;
  if (!(length > 0.0)) throw GeometryError("periodic length must be positive");
  const Closure& cl = closure(order);
  const int r = static_cast<int>(cl.interior.size()) / 2;
  if (n < 2 * r + 1) {
    throw GeometryError("periodic grid of order " + std::to_string(order) + " needs at least " +
                        std::to_string(2 * r + 1) + " nodes");
  }
  g.n = n;
  g.length = length;
  g.h = length / n;
  g.order = order;
  g.y.resize(n);
  for (int j = 0; j < n; ++j) g.y[j] = j * g.h;
  for (int s = -r; s <= r; ++s) {
    const double cf = cl.interior[s + r];
    if (cf == 0.0) continue;
    g.offsets.push_back(s);
    g.coef.push_back(cf / g.h);
  }
  return g;
}

OversetGeometry1D::Weighted OversetGeometry1D::weighted(double eta) const {
  if (!(eta > 0.0 && eta < 1.0)) throw GeometryError("eta must lie in (0,1)");
  const double wu[2] = {1.0, 1.0 - eta};
  const double wv[2] = {eta, 1.0};
  return {glue(blocks_u, wu), glue(blocks_v, wv)};
}

std::vector<OversetGeometry1D::SharedNode> OversetGeometry1D::shared_interior_nodes() const {
  std::vector<SharedNode> out;
  for (int iu = idx_u_b + 1; iu < idx_u_c; ++iu) {
    const int iv = grid_v.find_node(grid_u.x[iu]);
    if (iv >= 0) out.push_back({iu, iv, grid_u.x[iu]});
  }
  return out;
}

OversetGeometry1D build_overset_1d(double a, double b, double c, double d, double h_u, double h_v, int order) {
  if (!(a < b && b < c && c < d)) {
    throw GeometryError("interface coordinates must satisfy a < b < c < d");
  }
  if (!(h_u > 0.0 && h_v > 0.0)) throw GeometryError("grid spacings must be positive");
  min_nodes_for_order(order);

  const int n_ab = interval_count(a, b, h_u, "[a,b] on gridU");
  const int n_bc_u = interval_count(b, c, h_u, "[b,c] on gridU");
  const int n_bc_v = interval_count(b, c, h_v, "[b,c] on gridV");
  const int n_cd = interval_count(c, d, h_v, "[c,d] on gridV");

  OversetGeometry1D g;
  g.a = a;
  g.b = b;
  g.c = c;
  g.d = d;
  g.order = order;
  g.h_u = h_u;
  g.h_v = h_v;
  g.blocks_u = {block(a, b, n_ab + 1, order, "[a,b]"), block(b, c, n_bc_u + 1, order, "[b,c] on gridU")};
  g.blocks_v = {block(b, c, n_bc_v + 1, order, "[b,c] on gridV"), block(c, d, n_cd + 1, order, "[c,d]")};
  const double ones[2] = {1.0, 1.0};
  g.grid_u = glue(g.blocks_u, ones);
  g.grid_v = glue(g.blocks_v, ones);

  g.idx_u_b = n_ab;
  g.idx_u_c = n_ab + n_bc_u;
  g.idx_v_b = 0;
  g.idx_v_c = n_bc_v;

  const int nu = g.grid_u.size();
  const int nv = g.grid_v.size();
  g.overlap_u.assign(nu, false);
  g.overlap_v.assign(nv, false);
  for (int i = g.idx_u_b; i <= g.idx_u_c; ++i) g.overlap_u[i] = true;
  for (int i = g.idx_v_b; i <= g.idx_v_c; ++i) g.overlap_v[i] = true;

  g.norm_u_bar.assign(nu, 0.0);
  g.norm_u_overlap.assign(nu, 0.0);
  for (int i = 0; i <= g.idx_u_b; ++i) g.norm_u_bar[i] = g.blocks_u[0].norm[i];
  for (int i = g.idx_u_b; i < nu; ++i) g.norm_u_overlap[i] = g.blocks_u[1].norm[i - g.idx_u_b];
  g.norm_v_overlap.assign(nv, 0.0);
  g.norm_v_bar.assign(nv, 0.0);
  for (int i = 0; i <= g.idx_v_c; ++i) g.norm_v_overlap[i] = g.blocks_v[0].norm[i];
  for (int i = g.idx_v_c; i < nv; ++i) g.norm_v_bar[i] = g.blocks_v[1].norm[i - g.idx_v_c];
  return g;
}

OversetGeometry1D build_overset_1d_nodes(double a, double b, double c, double d, int n_per_subdomain,
                                         int order) {
  if (n_per_subdomain < 2) throw GeometryError("node count per subdomain must be at least 2");
  return build_overset_1d(a, b, c, d, (c - a) / (n_per_subdomain - 1), (d - b) / (n_per_subdomain - 1), order);
}

OversetGeometry2D build_overset_2d(double a_prime, double a, double b, double c, double d, double ly,
                                   double hx_u, double hx_v, double hy, int order, OverlapPointSpec points) {
  if (!(a <= a_prime && a_prime < b)) throw GeometryError("Gamma_a must satisfy a <= a' < b");
  if (!(hy > 0.0)) throw GeometryError("hy must be positive");

  OversetGeometry2D g;
  g.a = a;
  g.a_prime = a_prime;
  g.b = b;
  g.c = c;
  g.d = d;
  g.ly = ly;
  g.order = order;
  g.x = build_overset_1d(a_prime, b, c, d, hx_u, hx_v, order);
  const int ny = interval_count(0.0, ly, hy, "[0,Ly]");
  g.y = build_periodic_grid(ly, ny, order);

  const int n_base_left = interval_count(a, b, hx_v, "[a,b] on the base grid");
  const int nv = g.x.grid_v.size();
  g.base_x.clear();
  g.base_active.clear();
  for (int i = 0; i < n_base_left; ++i) {
    g.base_x.push_back(a + i * hx_v);
    g.base_active.push_back(false);
  }
  for (int i = 0; i < nv; ++i) {
    g.base_x.push_back(g.x.grid_v.x[i]);
    g.base_active.push_back(true);
  }

  if (points.mx < 0 || points.my < 0 || (points.mx == 0) != (points.my == 0)) {
    throw GeometryError("overlap point lattice must be empty or have mx, my >= 1");
  }
  if (points.mx > 0) {
    const auto shared = g.x.shared_interior_nodes();
    if (shared.empty()) throw GeometryError("no shared nodes strictly inside the overlap");
    std::vector<int> used_x;
    for (int ix = 1; ix <= points.mx; ++ix) {
      const double target = b + (c - b) * ix / (points.mx + 1);
      int best = 0;
      for (int k = 1; k < static_cast<int>(shared.size()); ++k) {
        if (std::abs(shared[k].x - target) < std::abs(shared[best].x - target)) best = k;
      }
      if (std::find(used_x.begin(), used_x.end(), best) != used_x.end()) {
        throw GeometryError("overlap lattice has more x-lines than shared overlap nodes");
      }
      used_x.push_back(best);
    }
    std::vector<int> used_y;
    for (int iy = 0; iy < points.my; ++iy) {
      const double target = ly * (iy + 0.5) / points.my;
      const int j = static_cast<int>(std::lround(target / g.y.h)) % ny;
      if (std::find(used_y.begin(), used_y.end(), j) != used_y.end()) {
        throw GeometryError("overlap lattice has more y-lines than y-nodes");
      }
      used_y.push_back(j);
    }
    for (int k : used_x) {
      for (int j : used_y) {
        g.overlap_points.push_back({shared[k].x, g.y.y[j], shared[k].iu, shared[k].iv, j});
      }
    }
  }
  return g;
}

Vector transfer(const Grid1D& source, std::span<const double> values, int ncomp,
                std::span<const double> targets) {
  const int n = source.size();
  if (static_cast<int>(values.size()) != n * ncomp) throw GeometryError("transfer: value size mismatch");
  Vector out(targets.size() * static_cast<std::size_t>(ncomp), 0.0);
  const int width = source.order + 1;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double xt = targets[t];
    const double tol = 1e-12 * std::max(1.0, source.right - source.left);
    if (xt < source.left - tol || xt > source.right + tol) {
      throw GeometryError("transfer target " + fmt(xt) + " outside source grid [" + fmt(source.left) + "," +
                          fmt(source.right) + "]");
    }
    double* o = out.data() + t * ncomp;
    const int node = source.find_node(xt);
    if (node >= 0) {
      for (int k = 0; k < ncomp; ++k) o[k] = values[node * ncomp + k];
      continue;
    }
    if (n < width) throw GeometryError("transfer: source grid too small for interpolation width");
    const int below = static_cast<int>(std::upper_bound(source.x.begin(), source.x.end(), xt) - source.x.begin()) - 1;
    const int start = std::clamp(below - (width - 1) / 2, 0, n - width);
    Vector w(width);
    double sum = 0.0;
    for (int i = 0; i < width; ++i) {
      double p = 1.0;
      for (int j = 0; j < width; ++j) {
        if (j != i) p *= source.x[start + i] - source.x[start + j];
      }
      w[i] = 1.0 / (p * (xt - source.x[start + i]));
      sum += w[i];
    }
    for (int i = 0; i < width; ++i) {
      for (int k = 0; k < ncomp; ++k) o[k] += w[i] / sum * values[(start + i) * ncomp + k];
    }
  }
  return out;
}

}  // namespace overset
