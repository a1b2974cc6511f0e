#include "overset/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>

#include "overset/coupling.hpp"
#include "overset/geometry.hpp"
#include "overset/oracle.hpp"
#include "overset/solver1d.hpp"
#include "overset/solver2d.hpp"

namespace overset::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& need(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(join(path, key), "required field is missing");
  return j.at(key);
}

double num(const json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
  return v;
}

double num_or(const json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return num(j.at(key), join(path, key));
}

int int_or(const json& j, const std::string& key, const std::string& path, int fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool bool_or(const json& j, const std::string& key, const std::string& path, bool fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return v.get<bool>();
}

std::string str_or(const json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(join(path, key), "expected a string");
  return v.get<std::string>();
}

SymMatrix matrix(const json& j, const std::string& path) {
  if (j.is_number()) {
    const double a[1] = {num(j, path)};
    return SymMatrix::diagonal(a);
  }
  if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a non-empty nested array (row-major matrix)");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_array() || j[i].size() != j.size()) throw ConfigError(rp, "matrix must be square");
    std::vector<double> r;
    for (std::size_t k = 0; k < j[i].size(); ++k) r.push_back(num(j[i][k], rp + "[" + std::to_string(k) + "]"));
    rows.push_back(std::move(r));
  }
  try {
    return SymMatrix::from_rows(rows);
  } catch (const LinalgError& e) {
    throw ConfigError(path, e.what());
  }
}

Vector vec(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  Vector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(num(j[i], path + "[" + std::to_string(i) + "]"));
  return v;
}

json to_json(const SymMatrix& m) { return m.rows(); }

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// ---------------------------------------------------------------- initial data

struct Pulse {
  double x0 = 0.0;
  double sigma = 0.1;
  Vector weights;  // physical components (already mapped from modes)
};

struct InitialData {
  std::vector<Pulse> pulses;
  double y_modulation = 0.0;  // 1 + y_mod sin(2 pi y / Ly)
  double ly = 1.0;

  bool y_independent() const { return y_modulation == 0.0; }

  Vector at(double x) const {
    Vector q(pulses.empty() ? 0 : pulses.front().weights.size(), 0.0);
    for (const Pulse& p : pulses) {
      const double z = (x - p.x0) / p.sigma;
      const double g = std::exp(-z * z);
      for (std::size_t k = 0; k < q.size(); ++k) q[k] += g * p.weights[k];
    }
    return q;
  }
  Vector at(double x, double y) const {
    Vector q = at(x);
    if (y_modulation != 0.0) {
      const double f = 1.0 + y_modulation * std::sin(2.0 * M_PI * y / ly);
      for (double& v : q) v *= f;
    }
    return q;
  }
};

InitialData parse_ic(const json& j, const std::string& path, const SymMatrix& flux, double left, double right,
                     double ly, std::uint64_t seed) {
  const int n = flux.size();
  InitialData data;
  data.ly = ly;
  const std::string type = str_or(j, "type", path, "gaussian");
  if (type == "zero") {
    data.pulses.push_back({0.5 * (left + right), 1.0, Vector(n, 0.0)});
    return data;
  }
  if (type == "gaussian" || type == "planewave") {
    Pulse p;
    p.x0 = num(need(j, "x0", path), join(path, "x0"));
    p.sigma = num(need(j, "sigma", path), join(path, "sigma"));
    if (!(p.sigma > 0.0)) throw ConfigError(join(path, "sigma"), "must be positive");
    Vector w = j.contains("weights") ? vec(j.at("weights"), join(path, "weights")) : Vector(n, 1.0);
    if (static_cast<int>(w.size()) != n) {
      throw ConfigError(join(path, "weights"), "needs one entry per component (" + std::to_string(n) + ")");
    }
    if (type == "planewave") {
      Vector k = j.contains("k") ? vec(j.at("k"), join(path, "k")) : Vector{1.0, 0.0};
      if (k.size() != 2 || std::abs(std::hypot(k[0], k[1]) - 1.0) > 1e-12) {
        throw ConfigError(join(path, "k"), "expected a unit 2-vector");
      }
      if (k[1] != 0.0) throw ConfigError(join(path, "k"), "only x-aligned plane waves are y-periodic");
      // weights are mode weights in the eigenbasis of k1 A1
      const EigenDecomp e = eig_sym(k[0] * flux);
      p.weights = from_characteristic(w, e);
    } else {
      p.weights = w;
    }
    data.pulses.push_back(p);
    data.y_modulation = num_or(j, "y_modulation", path, 0.0);
    return data;
  }
  if (type == "random") {
    const int count = int_or(j, "count", path, 4);
    if (count < 1) throw ConfigError(join(path, "count"), "must be at least 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(left + 0.15 * (right - left), right - 0.15 * (right - left));
    std::uniform_real_distribution<double> width(0.08 * (right - left), 0.15 * (right - left));
    std::normal_distribution<double> amp(0.0, 1.0);
    for (int i = 0; i < count; ++i) {
      Pulse p;
      p.x0 = centre(rng);
      p.sigma = width(rng);
      p.weights.resize(n);
      for (double& w : p.weights) w = amp(rng);
      data.pulses.push_back(p);
    }
    data.y_modulation = num_or(j, "y_modulation", path, 0.0);
    return data;
  }
  throw ConfigError(join(path, "type"), "unknown initial condition type '" + type + "'");
}

// ---------------------------------------------------------------- geometry

OversetGeometry1D parse_geometry_1d(const json& g, const std::string& path, int factor) {
  const double a = num(need(g, "a", path), join(path, "a"));
  const double b = num(need(g, "b", path), join(path, "b"));
  const double c = num(need(g, "c", path), join(path, "c"));
  const double d = num(need(g, "d", path), join(path, "d"));
  const int order = int_or(g, "order", path, 2);
  if (order != 2 && order != 4) throw ConfigError(join(path, "order"), "must be 2 or 4");
  try {
    if (g.contains("N")) {
      const int n = int_or(g, "N", path, 0);
      return build_overset_1d_nodes(a, b, c, d, (n - 1) * factor + 1, order);
    }
    const double hu = num(need(g, "hU", path), join(path, "hU"));
    const double hv = num_or(g, "hV", path, hu);
    return build_overset_1d(a, b, c, d, hu / factor, hv / factor, order);
  } catch (const GeometryError& e) {
    throw ConfigError(path, e.what());
  }
}

OversetGeometry2D parse_geometry_2d(const json& g, const std::string& path, int factor) {
  const double a = num(need(g, "a", path), join(path, "a"));
  const double ap = num_or(g, "a_prime", path, a);
  const double b = num(need(g, "b", path), join(path, "b"));
  const double c = num(need(g, "c", path), join(path, "c"));
  const double d = num(need(g, "d", path), join(path, "d"));
  const double ly = num(need(g, "Ly", path), join(path, "Ly"));
  const double hu = num(need(g, "hU", path), join(path, "hU"));
  const double hv = num_or(g, "hV", path, hu);
  const double hy = num_or(g, "hy", path, hu);
  const int order = int_or(g, "order", path, 2);
  if (order != 2 && order != 4) throw ConfigError(join(path, "order"), "must be 2 or 4");
  OverlapPointSpec pts;
  if (g.contains("overlap_points")) {
    const json& op = g.at("overlap_points");
    const std::string pp = join(path, "overlap_points");
    if (op.is_string() && op.get<std::string>() == "none") {
    } else if (op.is_object()) {
      pts.mx = int_or(op, "mx", pp, 0);
      pts.my = int_or(op, "my", pp, 0);
    } else {
      throw ConfigError(pp, "expected \"none\" or {\"mx\":..,\"my\":..}");
    }
  }
  try {
    return build_overset_2d(ap, a, b, c, d, ly, hu / factor, hv / factor, hy / factor, order, pts);
  } catch (const GeometryError& e) {
    throw ConfigError(path, e.what());
  }
}

// ---------------------------------------------------------------- couplings

InterfaceCoupling parse_interface(const json& j, const std::string& path, const SymMatrix& a_n, double beta) {
  if (j.is_string()) {
    if (j.get<std::string>() != "upwind") throw ConfigError(path, "expected \"upwind\" or an object");
    return make_upwind_coupling(a_n, beta);
  }
  if (!j.is_object()) throw ConfigError(path, "expected \"upwind\" or an object");
  const SymMatrix su = matrix(need(j, "SigmaU", path), join(path, "SigmaU"));
  if (su.size() != a_n.size()) throw ConfigError(join(path, "SigmaU"), "dimension differs from the system");
  if (!j.contains("SigmaV")) return complete_coupling(a_n, beta, su);
  const SymMatrix sv = matrix(j.at("SigmaV"), join(path, "SigmaV"));
  if (sv.size() != a_n.size()) throw ConfigError(join(path, "SigmaV"), "dimension differs from the system");
  InterfaceCoupling c{su, sv, beta, a_n, {}};
  return certify(std::move(c));
}

std::pair<InterfaceCoupling, InterfaceCoupling> parse_couplings(const json& cfg, const SymMatrix& an_b, double beta_b,
                                                                const SymMatrix& an_c, double beta_c) {
  const json c = cfg.contains("coupling") ? cfg.at("coupling") : json("upwind");
  if (c.is_string()) return {parse_interface(c, "coupling", an_b, beta_b), parse_interface(c, "coupling", an_c, beta_c)};
  if (!c.is_object()) throw ConfigError("coupling", "expected \"upwind\" or an object with b and c");
  const json b = c.contains("b") ? c.at("b") : json("upwind");
  const json cc = c.contains("c") ? c.at("c") : json("upwind");
  return {parse_interface(b, "coupling.b", an_b, beta_b), parse_interface(cc, "coupling.c", an_c, beta_c)};
}

json verdict_json(const CouplingVerdict& v) {
  json j;
  j["pass"] = v.pass;
  j["failure"] = to_string(v.failure);
  j["reason"] = v.reason;
  j["equality_defect"] = v.equality_defect;
  j["min_eigenvalue"] = v.min_eigenvalue;
  if (!v.witness.empty()) j["witness"] = v.witness;
  return j;
}

json coupling_json(const InterfaceCoupling& c) {
  json j;
  j["beta"] = c.beta;
  j["A_n"] = to_json(c.a_n);
  j["SigmaU"] = to_json(c.sigma_u);
  j["SigmaV"] = to_json(c.sigma_v);
  j["verdict"] = verdict_json(c.verdict);
  return j;
}

// ---------------------------------------------------------------- experiment assembly

struct Built {
  std::unique_ptr<Problem> problem;
  std::unique_ptr<Problem> reference;
  std::function<EquivalenceError(const SimState&)> exact_error;
  std::function<EquivalenceError(const SimState&, const SimState&)> reference_error;
  int ncomp = 1;
  int order = 2;
  double h = 0.0;
  bool penalty = false;
  bool characteristic = false;
  json extra;
};

double grid_error_exact(std::span<const double> q, const Grid1D& g, const PeriodicGrid* gy, int n,
                        const std::function<Vector(double, double)>& exact) {
  const int ny = gy ? gy->n : 1;
  const double hy = gy ? gy->weight() : 1.0;
  const int nx = g.size();
  double total = 0.0;
  for (int j = 0; j < ny; ++j) {
    const double y = gy ? gy->y[j] : 0.0;
    for (int i = 0; i < nx; ++i) {
      const Vector e = exact(g.x[i], y);
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        const double dlt = q[(j * nx + i) * n + k] - e[k];
        s += dlt * dlt;
      }
      total += g.norm[i] * s;
    }
  }
  return std::sqrt(hy * total);
}

std::string reference_kind(const json& cfg, const std::string& fallback) {
  const std::string r = str_or(cfg, "reference", "", fallback);
  if (r != "exact" && r != "single-domain" && r != "none") {
    throw ConfigError("reference", "expected \"exact\", \"single-domain\" or \"none\"");
  }
  return r;
}

Built build_1d(const ExperimentConfig& cfg, const std::string& mode, int factor) {
  const json& j = cfg.raw;
  const json& sys_j = need(j, "system", "");
  Built out;
  OversetGeometry1D geo = parse_geometry_1d(need(j, "geometry", ""), "geometry", factor);
  SymMatrix a;
  if (mode == "scalar1d-char") {
    const double alpha = num(need(sys_j, "alpha", "system"), "system.alpha");
    if (!(alpha > 0.0)) throw ConfigError("system.alpha", "must be positive");
    const double d[1] = {alpha};
    a = SymMatrix::diagonal(d);
  } else {
    a = matrix(need(sys_j, "A", "system"), "system.A");
  }
  const HyperbolicSystem sys = HyperbolicSystem::make(a);
  const InitialData ic = parse_ic(need(j, "ic", ""), "ic", a, geo.a, geo.d, 1.0, cfg.seed);
  const Profile1D prof = [ic](double x) { return ic.at(x); };

  std::unique_ptr<Problem1D> p;
  if (mode == "system1d-penalty") {
    auto [cb, cc] = parse_couplings(j, a, OversetGeometry1D::beta_b(cfg.eta), a, OversetGeometry1D::beta_c(cfg.eta));
    out.extra["coupling_b"] = coupling_json(cb);
    out.extra["coupling_c"] = coupling_json(cc);
    const bool allow = bool_or(j, "allow_uncertified", "", false);
    try {
      p = std::make_unique<Problem1D>(Problem1D::penalty(sys, geo, cfg.eta, cb, cc, prof, allow));
    } catch (const SolverError& e) {
      throw ConfigError("coupling", e.what());
    }
    out.penalty = true;
  } else {
    p = std::make_unique<Problem1D>(Problem1D::characteristic(sys, geo, prof, bool_or(j, "strong", "", false)));
    p->set_diagnostic_eta(cfg.eta);
    out.characteristic = true;
  }
  if (j.contains("ic_v")) {
    const InitialData icv = parse_ic(j.at("ic_v"), "ic_v", a, geo.a, geo.d, 1.0, cfg.seed + 1);
    p->set_initial_v([icv](double x) { return icv.at(x); });
  }
  if (sys.has_zero_eigenvalue) out.extra["zero_eigenvalue"] = true;

  const std::string ref = reference_kind(j, "exact");
  if (ref == "exact") {
    const auto exact = [sys, ic, lo = geo.a, hi = geo.d](double t) {
      return [=](double x, double) { return exact_system_1d(x, t, sys, [&ic](double z) { return ic.at(z); }, lo, hi); };
    };
    const Grid1D gu = geo.grid_u, gv = geo.grid_v;
    const int n = sys.size();
    out.exact_error = [=](const SimState& s) {
      const auto f = exact(s.t);
      return EquivalenceError{grid_error_exact(s.u, gu, nullptr, n, f), grid_error_exact(s.v, gv, nullptr, n, f)};
    };
  } else if (ref == "single-domain") {
    Grid1D gref = reference_grid(geo);
    out.reference = std::make_unique<SingleDomainProblem1D>(sys, gref, prof);
    const Grid1D gu = geo.grid_u, gv = geo.grid_v;
    out.reference_error = [=](const SimState& s, const SimState& r) { return equivalence_error(s, r, gu, gv, gref); };
  }
  out.ncomp = sys.size();
  out.order = geo.order;
  out.h = geo.h_u;
  out.problem = std::move(p);
  return out;
}

Built build_2d(const ExperimentConfig& cfg, const std::string& mode, int factor) {
  const json& j = cfg.raw;
  const json& sys_j = need(j, "system", "");
  Built out;
  OversetGeometry2D geo = parse_geometry_2d(need(j, "geometry", ""), "geometry", factor);
  const SymMatrix a1 = matrix(need(sys_j, "A1", "system"), "system.A1");
  const SymMatrix a2 = matrix(need(sys_j, "A2", "system"), "system.A2");
  if (a1.size() != a2.size()) throw ConfigError("system.A2", "must match the size of A1");
  const System2D sys = System2D::make(a1, a2);
  const InitialData ic = parse_ic(need(j, "ic", ""), "ic", a1, geo.a_prime, geo.d, geo.ly, cfg.seed);
  const Profile2D prof = [ic](double x, double y) { return ic.at(x, y); };

  const SymMatrix an_b = normal_matrix(a1, a2, geo.normal_b.nx, geo.normal_b.ny);
  const SymMatrix an_c = normal_matrix(a1, a2, geo.normal_c.nx, geo.normal_c.ny);
  auto [cb, cc] = parse_couplings(j, an_b, OversetGeometry2D::beta_b(cfg.eta), an_c, OversetGeometry2D::beta_c(cfg.eta));
  out.extra["coupling_b"] = coupling_json(cb);
  out.extra["coupling_c"] = coupling_json(cc);

  std::optional<OverlapCoupling> ov;
  if (mode == "system2d-overlap") {
    if (geo.overlap_points.empty()) throw ConfigError("geometry.overlap_points", "overlap mode needs at least one point");
    const json& oj = need(j, "overlap", "");
    if (oj.contains("sigma")) {
      const double sigma = num(oj.at("sigma"), "overlap.sigma");
      if (!(sigma >= 0.0)) throw ConfigError("overlap.sigma", "must be non-negative");
      ov = make_overlap_coupling(cfg.eta, sigma * SymMatrix::identity(a1.size()));
    } else {
      const SymMatrix sum = matrix(need(oj, "SigmaUm", "overlap"), "overlap.SigmaUm");
      if (oj.contains("SigmaVm")) {
        OverlapCoupling o{sum, matrix(oj.at("SigmaVm"), "overlap.SigmaVm"), cfg.eta, {}};
        o.verdict = check_overlap_coupling(cfg.eta, o.sigma_um, o.sigma_vm);
        ov = o;
      } else {
        ov = make_overlap_coupling(cfg.eta, sum);
      }
    }
    out.extra["overlap"] = {{"points", geo.overlap_points.size()}, {"verdict", verdict_json(ov->verdict)}};
  }
  const bool allow = bool_or(j, "allow_uncertified", "", false);
  std::unique_ptr<Problem2D> p;
  try {
    p = std::make_unique<Problem2D>(Problem2D::make(sys, geo, cfg.eta, cb, cc, ov, prof, allow));
  } catch (const SolverError& e) {
    throw ConfigError("coupling", e.what());
  }
  if (j.contains("ic_v")) {
    const InitialData icv = parse_ic(j.at("ic_v"), "ic_v", a1, geo.a_prime, geo.d, geo.ly, cfg.seed + 1);
    p->set_initial_v([icv](double x, double y) { return icv.at(x, y); });
  }

  const std::string ref = reference_kind(j, "single-domain");
  if (ref == "exact") {
    if (!ic.y_independent()) throw ConfigError("reference", "exact solutions need y-independent initial data");
    const HyperbolicSystem s1 = sys.a1;
    const double lo = geo.a_prime, hi = geo.d;
    const Grid1D gu = geo.x.grid_u, gv = geo.x.grid_v;
    const PeriodicGrid gy = geo.y;
    const int n = sys.size();
    out.exact_error = [=](const SimState& s) {
      const auto f = [&](double x, double) {
        return exact_system_1d(x, s.t, s1, [&ic](double z) { return ic.at(z); }, lo, hi);
      };
      return EquivalenceError{grid_error_exact(s.u, gu, &gy, n, f), grid_error_exact(s.v, gv, &gy, n, f)};
    };
  } else if (ref == "single-domain") {
    Grid1D gref = reference_grid(geo);
    out.reference = std::make_unique<SingleDomainProblem2D>(sys, gref, geo.y, prof);
    const Grid1D gu = geo.x.grid_u, gv = geo.x.grid_v;
    const double hy = geo.y.weight();
    out.reference_error = [=](const SimState& s, const SimState& r) {
      return equivalence_error(s, r, gu, gv, gref, hy);
    };
  }
  out.ncomp = sys.size();
  out.order = geo.order;
  out.h = geo.x.h_u;
  out.penalty = true;
  out.problem = std::move(p);
  return out;
}

Built build_single(const ExperimentConfig& cfg, int factor) {
  const json& j = cfg.raw;
  const json& sys_j = need(j, "system", "");
  Built out;
  if (sys_j.contains("A2")) {
    OversetGeometry2D geo = parse_geometry_2d(need(j, "geometry", ""), "geometry", factor);
    const SymMatrix a1 = matrix(need(sys_j, "A1", "system"), "system.A1");
    const SymMatrix a2 = matrix(sys_j.at("A2"), "system.A2");
    if (a1.size() != a2.size()) throw ConfigError("system.A2", "must match the size of A1");
    const System2D sys = System2D::make(a1, a2);
    const InitialData ic = parse_ic(need(j, "ic", ""), "ic", a1, geo.a_prime, geo.d, geo.ly, cfg.seed);
    Grid1D gx = reference_grid(geo);
    out.problem = std::make_unique<SingleDomainProblem2D>(sys, gx, geo.y,
                                                          [ic](double x, double y) { return ic.at(x, y); });
    if (ic.y_independent()) {
      const HyperbolicSystem s1 = sys.a1;
      const PeriodicGrid gy = geo.y;
      const double lo = geo.a_prime, hi = geo.d;
      const int n = sys.size();
      out.exact_error = [=](const SimState& s) {
        const auto f = [&](double x, double) {
          return exact_system_1d(x, s.t, s1, [&ic](double z) { return ic.at(z); }, lo, hi);
        };
        return EquivalenceError{grid_error_exact(s.u, gx, &gy, n, f), kNaN};
      };
    }
    out.ncomp = sys.size();
    out.order = geo.order;
    out.h = gx.spacing();
    return out;
  }
  OversetGeometry1D geo = parse_geometry_1d(need(j, "geometry", ""), "geometry", factor);
  SymMatrix a;
  if (sys_j.contains("alpha")) {
    const double alpha = num(sys_j.at("alpha"), "system.alpha");
    const double d[1] = {alpha};
    a = SymMatrix::diagonal(d);
  } else {
    a = matrix(need(sys_j, "A", "system"), "system.A");
  }
  const HyperbolicSystem sys = HyperbolicSystem::make(a);
  const InitialData ic = parse_ic(need(j, "ic", ""), "ic", a, geo.a, geo.d, 1.0, cfg.seed);
  Grid1D gx = reference_grid(geo);
  out.problem = std::make_unique<SingleDomainProblem1D>(sys, gx, [ic](double x) { return ic.at(x); });
  const double lo = geo.a, hi = geo.d;
  const int n = sys.size();
  out.exact_error = [=](const SimState& s) {
    const auto f = [&](double x, double) {
      return exact_system_1d(x, s.t, sys, [&ic](double z) { return ic.at(z); }, lo, hi);
    };
    return EquivalenceError{grid_error_exact(s.u, gx, nullptr, n, f), kNaN};
  };
  out.ncomp = sys.size();
  out.order = geo.order;
  out.h = gx.spacing();
  return out;
}

Built build(const ExperimentConfig& cfg, int factor) {
  const std::string& m = cfg.mode;
  if (m == "scalar1d-char" || m == "system1d-char" || m == "system1d-penalty") return build_1d(cfg, m, factor);
  if (m == "system2d-boundary" || m == "system2d-overlap") return build_2d(cfg, m, factor);
  if (m == "single-domain-ref") return build_single(cfg, factor);
  throw ConfigError("mode", "mode '" + m + "' does not describe a simulation");
}

struct Monitor {
  double max_rate = -INFINITY;  // max dE/dt over steps and stages
  double max_cons = 0.0;
  double max_ledger = 0.0;
  double flux_scale = 0.0;
  double max_parasitic = 0.0;
};

struct Simulation {
  RunResult result;
  Monitor monitor;
  double dt = 0.0;
  Built built;
};

Simulation simulate(const ExperimentConfig& cfg, int factor) {
  Simulation sim;
  sim.built = build(cfg, factor);
  const Problem& p = *sim.built.problem;
  double dt = p.stable_dt(cfg.cfl);
  if (sim.built.reference) dt = std::min(dt, sim.built.reference->stable_dt(cfg.cfl));
  if (cfg.raw.contains("dt")) {
    dt = num(cfg.raw.at("dt"), "dt");
    if (!(dt > 0.0)) throw ConfigError("dt", "must be positive");
  }
  sim.dt = dt;

  Monitor& mon = sim.monitor;
  auto track = [&mon](const DiagnosticsRecord& d) {
    mon.max_rate = std::max(mon.max_rate, d.dEdt);
    mon.max_cons = std::max(mon.max_cons, d.cons_residual);
    mon.max_ledger = std::max(mon.max_ledger, std::abs(d.ledger_residual));
    for (double f : d.flux_in) mon.flux_scale = std::max(mon.flux_scale, std::abs(f));
    for (double f : d.flux_out) mon.flux_scale = std::max(mon.flux_scale, std::abs(f));
    if (std::isfinite(d.parasitic_b)) mon.max_parasitic = std::max(mon.max_parasitic, std::abs(d.parasitic_b));
    if (std::isfinite(d.parasitic_c)) mon.max_parasitic = std::max(mon.max_parasitic, std::abs(d.parasitic_c));
  };
  RunOptions opt;
  opt.stage_observer = [&p, &track](const SimState& s, const SimState& r, int, int) { track(p.diagnose(s, r)); };
  opt.step_observer = track;
  opt.reference = sim.built.reference.get();
  opt.exact_error = sim.built.exact_error;
  opt.reference_error = sim.built.reference_error;
  sim.result = run_simulation(p, cfg.T, dt, opt);
  return sim;
}

std::string fmt(double v) {
  if (!std::isfinite(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
}

json verdict_value(const std::optional<bool>& v) { return v ? json(*v) : json(nullptr); }

Outcome finish(json summary, const std::optional<bool>& energy, const std::optional<bool>& conservative,
               const std::optional<bool>& order) {
  summary["verdicts"] = {{"energy_bounded", verdict_value(energy)},
                         {"conservative", verdict_value(conservative)},
                         {"equivalence_order", verdict_value(order)}};
  bool ok = true;
  for (const auto& v : {energy, conservative, order}) {
    if (v && !*v) ok = false;
  }
  summary["pass"] = ok;
  return {ok ? 0 : 2, std::move(summary)};
}

Outcome run_simulation_mode(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  Simulation sim = simulate(cfg, 1);
  const DiagnosticsSeries& series = sim.result.series;
  const Monitor& mon = sim.monitor;
  const double e0 = series.records().front().E;
  const DiagnosticsRecord& last = series.back();

  std::ostringstream csv;
  write_csv(csv, series, sim.built.ncomp);
  write_file((std::filesystem::path(out_dir) / cfg.csv_name).string(), csv.str());

  json s;
  s["mode"] = cfg.mode;
  s["steps"] = sim.result.steps;
  s["dt"] = sim.dt;
  s["T"] = cfg.T;
  s["seed"] = cfg.seed;
  s["E0"] = e0;
  s["E_T"] = last.E;
  s["max_dEdt"] = mon.max_rate;
  s["max_dEdt_over_E0"] = e0 > 0.0 ? num_json(mon.max_rate / e0) : json(nullptr);
  s["max_conservation_residual"] = mon.max_cons;
  s["flux_scale"] = mon.flux_scale;
  s["max_ledger_residual"] = mon.max_ledger;
  s["err_u"] = num_json(last.err_u);
  s["err_v"] = num_json(last.err_v);
  if (sim.built.characteristic) s["max_abs_parasitic"] = mon.max_parasitic;
  for (auto& [k, v] : sim.built.extra.items()) s[k] = v;

  const Thresholds& th = cfg.thresholds;
  std::optional<bool> energy, conservative;
  if (sim.built.characteristic) {
    energy = last.normU <= e0 * (1.0 + th.energy_final) && last.normV <= e0 * (1.0 + th.energy_final);
  } else {
    energy = mon.max_rate <= th.energy * e0 && last.E <= e0 * (1.0 + th.energy_final);
    conservative = mon.max_cons <= th.conservation * std::max(mon.flux_scale, e0);
  }
  log << cfg.mode << ": " << sim.result.steps << " steps, E0=" << e0 << " E(T)=" << last.E
      << " max dE/dt=" << mon.max_rate << " max cons residual=" << mon.max_cons << "\n";
  return finish(std::move(s), energy, conservative, std::nullopt);
}

Outcome run_certify(const ExperimentConfig& cfg, std::ostream& log) {
  const json& j = cfg.raw;
  const SymMatrix a_n = j.contains("A_n") ? matrix(j.at("A_n"), "A_n") : matrix(need(need(j, "system", ""), "A", "system"), "system.A");
  const double beta = num_or(j, "beta", "", 0.5);
  const json c = j.contains("coupling") ? j.at("coupling") : json("upwind");
  const InterfaceCoupling ic = parse_interface(c, "coupling", a_n, beta);
  json s;
  s["mode"] = cfg.mode;
  s["coupling"] = coupling_json(ic);
  bool ok = ic.certified();
  if (j.contains("overlap")) {
    const json& o = j.at("overlap");
    const double eta = num_or(o, "eta", "overlap", cfg.eta);
    if (!(eta > 0.0 && eta < 1.0)) throw ConfigError("overlap.eta", "must lie in (0,1)");
    const SymMatrix sum = matrix(need(o, "SigmaUm", "overlap"), "overlap.SigmaUm");
    const SymMatrix svm = o.contains("SigmaVm") ? matrix(o.at("SigmaVm"), "overlap.SigmaVm")
                                                 : ((1.0 - eta) / eta) * sum;
    if (svm.size() != sum.size()) throw ConfigError("overlap.SigmaVm", "dimension differs from SigmaUm");
    const CouplingVerdict ov = check_overlap_coupling(eta, sum, svm);
    s["overlap"] = verdict_json(ov);
    ok = ok && ov.pass;
  }
  s["certified"] = ok;
  s["verdict"] = ok ? "pass" : "fail";
  log << "certify-coupling: " << (ok ? "pass" : "fail");
  if (!ic.certified()) log << " (" << ic.verdict.reason << ")";
  log << "\n";
  s["verdicts"] = {{"energy_bounded", nullptr}, {"conservative", nullptr}, {"equivalence_order", nullptr}};
  s["pass"] = ok;
  return {ok ? 0 : 2, std::move(s)};
}

Outcome run_convergence(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const json& j = cfg.raw;
  json inner = need(j, "study", "");
  if (!inner.is_object()) throw ConfigError("study", "expected an experiment object");
  if (!inner.contains("T")) inner["T"] = cfg.T;
  if (!inner.contains("eta")) inner["eta"] = cfg.eta;
  if (!inner.contains("cfl")) inner["cfl"] = cfg.cfl;
  const std::string imode = str_or(inner, "mode", "study", "");
  const bool oracle = imode == "oracle";
  if (oracle) inner["mode"] = "system1d-char";
  ExperimentConfig sub;
  try {
    sub = parse_config(inner);
  } catch (const ConfigError& e) {
    throw ConfigError("study." + e.path(), std::string(e.what()).substr(e.path().size() + 2));
  }
  sub.seed = cfg.seed;
  if (sub.mode == "certify-coupling" || sub.mode == "convergence-study") {
    throw ConfigError("study.mode", "must be a simulation mode");
  }
  const json& lv = need(j, "levels", "");
  if (!lv.is_array()) throw ConfigError("levels", "expected an array of refinement factors");
  std::vector<int> levels;
  for (std::size_t i = 0; i < lv.size(); ++i) {
    if (!lv[i].is_number_integer() || lv[i].get<int>() < 1) {
      throw ConfigError("levels[" + std::to_string(i) + "]", "expected a positive integer refinement factor");
    }
    levels.push_back(lv[i].get<int>());
  }
  if (levels.size() < 3) throw ConfigError("levels", "a convergence study needs at least 3 levels");

  std::vector<double> hs, eu, ev;
  int order = 2;
  for (int f : levels) {
    if (oracle) {
      Built b = build(sub, f);
      hs.push_back(b.h);
      eu.push_back(0.0);
      ev.push_back(0.0);
      order = b.order;
      continue;
    }
    Simulation sim = simulate(sub, f);
    if (!sim.built.exact_error && !sim.built.reference_error) {
      throw ConfigError("study.reference", "a convergence study needs an exact or single-domain reference");
    }
    hs.push_back(sim.built.h);
    eu.push_back(sim.result.series.back().err_u);
    ev.push_back(sim.result.series.back().err_v);
    order = sim.built.order;
    log << "level " << f << ": h=" << sim.built.h << " errU=" << eu.back() << " errV=" << ev.back() << "\n";
  }
  const std::vector<ConvergenceRow> rows = convergence_table(hs, eu, ev);

  std::ostringstream csv;
  csv << "h,errU,errV,order\n";
  json table = json::array();
  for (const ConvergenceRow& r : rows) {
    const std::string o = r.floor ? "floor" : (r.order ? fmt(*r.order) : "");
    csv << fmt(r.h) << "," << fmt(r.err_u) << "," << fmt(r.err_v) << "," << o << "\n";
    json row{{"h", r.h}, {"errU", r.err_u}, {"errV", r.err_v}};
    row["order"] = r.floor ? json("floor") : (r.order ? json(*r.order) : json(nullptr));
    table.push_back(row);
  }
  write_file((std::filesystem::path(out_dir) / "convergence.csv").string(), csv.str());

  const double need_order = cfg.thresholds.order.value_or(order - 0.5);
  const ConvergenceRow& fin = rows.back();
  const bool pass = fin.floor || (fin.order && *fin.order >= need_order);
  json s;
  s["mode"] = cfg.mode;
  s["study_mode"] = oracle ? "oracle" : sub.mode;
  s["levels"] = levels;
  s["table"] = table;
  s["required_order"] = need_order;
  s["observed_order"] = fin.floor ? json("floor") : num_json(fin.order.value_or(kNaN));
  log << "convergence-study: observed order " << (fin.floor ? std::string("floor") : fmt(fin.order.value_or(kNaN)))
      << " (required " << need_order << ")\n";
  return finish(std::move(s), std::nullopt, std::nullopt, pass);
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  ExperimentConfig c;
  c.raw = j;
  const json& m = need(j, "mode", "");
  if (!m.is_string()) throw ConfigError("mode", "expected a string");
  c.mode = m.get<std::string>();
  const auto& all = modes();
  if (std::find(all.begin(), all.end(), c.mode) == all.end() && c.mode != "oracle") {
    throw ConfigError("mode", "unknown mode '" + c.mode + "'");
  }
  c.eta = num_or(j, "eta", "", 0.5);
  if (!(c.eta > 0.0 && c.eta < 1.0)) throw ConfigError("eta", "must lie in (0,1)");
  c.T = num_or(j, "T", "", 1.0);
  if (!(c.T >= 0.0)) throw ConfigError("T", "must be non-negative");
  c.cfl = num_or(j, "cfl", "", 0.5);
  if (!(c.cfl > 0.0)) throw ConfigError("cfl", "must be positive");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    if (!t.is_object()) throw ConfigError("thresholds", "expected an object");
    c.thresholds.energy = num_or(t, "energy", "thresholds", c.thresholds.energy);
    c.thresholds.energy_final = num_or(t, "energy_final", "thresholds", c.thresholds.energy_final);
    c.thresholds.conservation = num_or(t, "conservation", "thresholds", c.thresholds.conservation);
    if (t.contains("order")) c.thresholds.order = num(t.at("order"), "thresholds.order");
  }
  if (j.contains("output")) {
    const json& o = j.at("output");
    c.csv_name = str_or(o, "csv", "output", c.csv_name);
    c.summary_name = str_or(o, "summary", "output", c.summary_name);
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  json j;
  try {
    f >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(j);
}

std::vector<ConvergenceRow> convergence_table(const std::vector<double>& h, const std::vector<double>& err_u,
                                              const std::vector<double>& err_v) {
  if (h.size() < 3) throw ConfigError("levels", "a convergence study needs at least 3 levels");
  if (err_u.size() != h.size() || err_v.size() != h.size()) {
    throw std::invalid_argument("convergence_table: one error pair per level required");
  }
  std::vector<ConvergenceRow> rows;
  for (std::size_t k = 0; k < h.size(); ++k) {
    ConvergenceRow r{h[k], err_u[k], err_v[k], std::nullopt, false};
    const double e = err_u[k] + err_v[k];
    if (k > 0) {
      const double ep = err_u[k - 1] + err_v[k - 1];
      if (e < kErrorFloor && ep < kErrorFloor) {
        r.floor = true;
      } else {
        r.order = std::log(ep / e) / std::log(h[k - 1] / h[k]);
      }
    }
    rows.push_back(r);
  }
  return rows;
}

void write_csv(std::ostream& os, const DiagnosticsSeries& series, int ncomp) {
  os << "t,E,dEdt,normU,normV,normU_O,normV_O,P_b,P_c,P_overlap,consResidual";
  for (int k = 1; k <= ncomp; ++k) os << ",fluxIn_" << k;
  for (int k = 1; k <= ncomp; ++k) os << ",fluxOut_" << k;
  os << ",errU,errV\n";
  for (const DiagnosticsRecord& r : series.records()) {
    os << fmt(r.t) << ',' << fmt(r.E) << ',' << fmt(r.dEdt) << ',' << fmt(r.normU) << ',' << fmt(r.normV) << ','
       << fmt(r.normU_O) << ',' << fmt(r.normV_O) << ',' << fmt(r.P_b) << ',' << fmt(r.P_c) << ','
       << fmt(r.P_overlap) << ',' << fmt(r.cons_residual);
    for (int k = 0; k < ncomp; ++k) os << ',' << fmt(k < static_cast<int>(r.flux_in.size()) ? r.flux_in[k] : kNaN);
    for (int k = 0; k < ncomp; ++k) os << ',' << fmt(k < static_cast<int>(r.flux_out.size()) ? r.flux_out[k] : kNaN);
    os << ',' << fmt(r.err_u) << ',' << fmt(r.err_v) << '\n';
  }
}

Outcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& log) {
  ensure_dir(out_dir);
  Outcome out;
  if (cfg.mode == "certify-coupling") {
    out = run_certify(cfg, log);
  } else if (cfg.mode == "convergence-study") {
    out = run_convergence(cfg, out_dir, log);
  } else {
    out = run_simulation_mode(cfg, out_dir, log);
  }
  write_file((std::filesystem::path(out_dir) / cfg.summary_name).string(), out.summary.dump(2) + "\n");
  return out;
}

int run(const std::string& config_path, const std::string& out_dir, std::optional<std::uint64_t> seed,
        std::ostream& log, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    return run_experiment(cfg, out_dir, log).exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
  } catch (const NumericalAbort& e) {
    err << "numerical abort: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace overset::cli
