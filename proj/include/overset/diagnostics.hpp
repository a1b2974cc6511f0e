#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "overset/geometry.hpp"
#include "overset/linalg.hpp"
#include "overset/state.hpp"

namespace overset {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// x-direction quadratures of one component grid.
struct NormSet {
  Vector full;     // H on the whole grid
  Vector overlap;  // H_O, zero off the overlap
};

struct EnergyContext {
  NormSet u;
  NormSet v;
  int ncomp = 1;
  int ny = 1;
  double hy = 1.0;  // y-quadrature weight, 1 in 1D
  double eta = 0.5;

  static EnergyContext from_geometry(const OversetGeometry1D& g, int ncomp, double eta);
  static EnergyContext from_geometry(const OversetGeometry2D& g, int ncomp, double eta);
};

/// ||q||^2 with x-weights w (size nx) and y-weight hy over ny rows.
double weighted_square(std::span<const double> q, std::span<const double> w, int ncomp, int ny, double hy);
/// <p, q> with the same weights.
double weighted_inner(std::span<const double> p, std::span<const double> q, std::span<const double> w, int ncomp,
                      int ny, double hy);

/// ||u||^2_Hu + ||v||^2_Hv - eta ||u||^2_O - (1-eta) ||v||^2_O
double composite_energy(const SimState& s, const EnergyContext& ctx);

/// 2<u,u'> + 2<v,v'> - 2 eta <u,u'>_O - 2 (1-eta) <v,v'>_O
double energy_rate(const SimState& s, const SimState& rate, const EnergyContext& ctx);

struct ConservationResult {
  double residual = 0.0;  // max over components
  Vector rate_total;      // d/dt of the weighted total per component
  Vector flux_in;
  Vector flux_out;
};

/// residual = d/dt[1^T H u + 1^T H v - eta 1^T H_O u - (1-eta) 1^T H_O v] - (fluxIn - fluxOut)
ConservationResult conservation_residual(const SimState& rate, const EnergyContext& ctx, const Vector& flux_in,
                                         const Vector& flux_out);

struct ParasiticTerms {
  double term_c = 0.0;  // {v^T A+ v - u^T A+ u} at c
  double term_b = 0.0;  // {u^T |A-| u - v^T |A-| v} at b
};

ParasiticTerms parasitic_terms(std::span<const double> u_b, std::span<const double> v_b,
                               std::span<const double> u_c, std::span<const double> v_c, const FluxSplit& split);
ParasiticTerms parasitic_terms(const SimState& s, const FluxSplit& split, const OversetGeometry1D& g);

struct EquivalenceError {
  double err_u = 0.0;
  double err_v = 0.0;
};

/// H-norms of u - omega on gridU and v - omega on gridV, where omega lives on
/// a single grid sharing every node of both.  Throws on node mismatch.
EquivalenceError equivalence_error(const SimState& s, const SimState& reference, const Grid1D& grid_u,
                                   const Grid1D& grid_v, const Grid1D& grid_ref, double hy = 1.0);

struct DiagnosticsRecord {
  double t = 0.0;
  double E = 0.0;
  double dEdt = 0.0;
  double normU = 0.0;
  double normV = 0.0;
  double normU_O = 0.0;
  double normV_O = 0.0;
  double P_b = 0.0;
  double P_c = 0.0;
  double P_overlap = 0.0;
  double cons_residual = 0.0;
  Vector flux_in;
  Vector flux_out;
  double err_u = kNaN;
  double err_v = kNaN;

  double boundary_dissipation = 0.0;  // q_a^T |A| q_a + q_d^T |A| q_d (y-weighted in 2D)
  double ledger_residual = 0.0;       // dEdt + P_b + P_c + P_overlap + boundary_dissipation
  double parasitic_c = kNaN;
  double parasitic_b = kNaN;
};

class DiagnosticsSeries {
 public:
  /// Throws std::logic_error unless t is strictly larger than the last record's.
  void append(DiagnosticsRecord r);
  const std::vector<DiagnosticsRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const DiagnosticsRecord& back() const { return records_.back(); }

 private:
  std::vector<DiagnosticsRecord> records_;
};

}  // namespace overset
