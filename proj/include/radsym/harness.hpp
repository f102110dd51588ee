#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "radsym/energy.hpp"
#include "radsym/grid.hpp"
#include "radsym/model.hpp"
#include "radsym/optimize.hpp"
#include "radsym/rearrange.hpp"

namespace radsym {

struct Alignment {
  GridFunction shifted;
  Index shift{0, 0, 0};
};

/// Integer-cell translate of u_star moving its value-weighted centroid onto
/// that of u. Ball domains always get a zero shift.
Alignment align(const GridFunction& u, const GridFunction& u_star);

/// out(i) = v(i - shift); cells pulled from outside the box read 0.
GridFunction shift_cells(const GridFunction& v, const Index& shift);

struct VerifyThresholds {
  double rel_lp = 0.05;
  double cstar_fraction = 0.02;
  /// C* tolerances relative to max(u*): eps_val = rel * max, eps_grad = rel * max / h.
  double cstar_eps_rel = 1e-6;
  int test_count = 10;
  std::uint64_t test_seed = 11;
};

struct SymmetryReport {
  double rel_lp_distance = 0.0;
  double energy_gap = 0.0;     // E(u) - E(u*)
  double grad_norm_gap = 0.0;  // ||Du||_p - ||Du*||_p
  double j_gap = 0.0;          // J(u) - J(u*)
  double cstar_measure = 0.0;
  double support_measure = 0.0;
  Index shift{0, 0, 0};
  bool verdict = false;
  /// E(u*) <= E(u) + 1e-8 (|J| + |Fterm|).
  bool energy_chain_ok = false;
  double energy_scale = 0.0;
  EnergyBreakdown e_u;
  EnergyBreakdown e_star;
  VerifyThresholds thresholds;
  LambdaEstimate lambda;
  ELReport el;
  // Optimizer summary (zero when built from a given u).
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  double proj_grad_norm = 0.0;
};

/// Report for a given (approximate) minimizer u.
SymmetryReport symmetry_report(const VariationalModel& model, const GridFunction& u,
                               const VerifyThresholds& thresholds = {});

struct VerifyOutcome {
  MinimizeResult minimize;
  GridFunction u_star;
  GridFunction aligned_star;
  SymmetryReport report;
};

VerifyOutcome verify_theorem(const VariationalModel& model, const GridFunction& u0,
                             const MinimizeOptions& opts, const VerifyThresholds& thresholds = {});

struct AuditRow {
  int n = 0;
  double distance = 0.0;
  double W = 0.0;
  double grad_p = 0.0;
  double J = 0.0;
  double Fterm = 0.0;
  double E = 0.0;
  double lambda = 0.0;
};

struct PolarizationAudit {
  std::vector<AuditRow> rows;
  std::vector<std::string> flags;
  double lambda_cv = 0.0;
  bool ok() const { return flags.empty(); }
};

/// Polarizes u along seq for n_max steps (stopping at u*), tabulating the
/// step-I quantities and flagging W drift, increases of J or of the
/// p-Dirichlet energy beyond 1e-10 * scale, and rises of the distance to u*.
PolarizationAudit polarization_audit(const GridFunction& u, const VariationalModel& model,
                                     const PolarizerSequence& seq, int n_max,
                                     int test_count = 10, std::uint64_t test_seed = 11);

struct RefinementProtocol {
  /// Smooth family on the box [-family_L, family_L]^N: anisotropic Gaussians
  /// exp(-|A(x - delta)|^2 / width), delta in +-family_shift, A = diag in
  /// [1 - aniso, 1 + aniso].
  int family_size = 12;
  std::uint64_t family_seed = 7;
  double family_L = 3.0;
  double family_width = 1.0;
  double family_shift = 0.3;
  double family_aniso = 0.03;
  /// Polarization gap uses the axis-0 polarizer at this distance from the origin.
  double polarizer_offset = 0.75;
  /// verify_theorem protocol: ball of radius R, feasible start off center.
  double ball_R = 3.0;
  double s0 = 0.5;
  Point start_center{0.6, -0.4, 0.0};
  MinimizeOptions opts;
  bool run_verify = true;
};

struct RefinementRow {
  double h = 0.0;
  double ps_gap = 0.0;      // mean over the family of max(0, J(u*) - J(u)) / J(u)
  double ps_gap_max = 0.0;
  double pol_gap = 0.0;     // mean of (grad_p(u) - grad_p(u^H)) / grad_p(u)
  double rel_lp = 0.0;      // verify_theorem rel_lp_distance (NaN if not run)
};

std::vector<RefinementRow> refinement_study(const VariationalModel& model, const std::vector<double>& h_list,
                                            const RefinementProtocol& protocol);

}  // namespace radsym
