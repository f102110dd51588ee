#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "radsym/energy.hpp"
#include "radsym/grid.hpp"
#include "radsym/model.hpp"

namespace radsym {

/// Metric used to turn the gradient into a search direction.
///   None: plain gradient, Barzilai-Borwein initial step.
///   Laplacian: fixed weighted graph Laplacian of the stencil.
///   Reweighted: Laplacian with corner weights j_t(s, t)/t frozen at the
///   current iterate (lagged diffusivity), refreshed every iteration.
enum class Preconditioner { None, Laplacian, Reweighted };

Preconditioner parse_preconditioner(const std::string& name);
std::string to_string(Preconditioner p);

struct MinimizeOptions {
  int max_iters = 1000;
  /// Threshold on the L2 norm of the projected gradient density.
  double grad_tol = 1e-4;
  /// Stop after 3 consecutive iterations with relative decrease below this
  /// (0 disables the test).
  double energy_tol = 0.0;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  /// 0 disables the symmetrize-restart; otherwise its period in iterations.
  int symmetrize_every = 0;
  std::uint64_t seed = 0;
  Preconditioner preconditioner = Preconditioner::Reweighted;
  /// Gradient magnitudes are floored at irls_floor * max(u) / h inside the
  /// reweighted metric.
  double irls_floor = 1e-3;
  /// Energies below this are treated as divergence.
  double energy_floor = -1e12;

  void validate() const;
};

enum class StopReason { GradTol, EnergyTol, MaxIters, LineSearch, EnergyFloor };
std::string to_string(StopReason r);

struct HistoryRow {
  int iter = 0;
  double E = 0, J = 0, Fterm = 0, W = 0;
  double proj_grad_norm = 0;
  double step = 0;
  bool restart = false;
};

struct MinimizeResult {
  GridFunction u_final;
  EnergyBreakdown energy;
  int iterations = 0;
  bool converged = false;
  StopReason stop = StopReason::MaxIters;
  double lambda = 0.0;
  double proj_grad_norm = 0.0;
  std::vector<HistoryRow> history;
};

/// theta u with int G(theta u) = 1; closed form for pure powers, otherwise
/// bisection on theta in [1e-12, 1e12].
GridFunction project_constraint(const GridFunction& u, const VariationalModel& model);

GridFunction clip_nonneg(const GridFunction& u);

struct ProjectedGradient {
  double norm = 0.0;
  double lambda = 0.0;
};

/// Multiplier lambda = <dE, dW>/<dW, dW> over free cells and the L2 norm of
/// (dE - lambda dW)/h^N, skipping cells at the u = 0 bound where the
/// descent direction points outward.
ProjectedGradient projected_gradient(const GridFunction& u, const VariationalModel& model);

MinimizeResult minimize(const VariationalModel& model, const GridFunction& u0,
                        const MinimizeOptions& opts);

/// Columns iter,E,J,Fterm,W,proj_grad_norm,step,restart.
void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out);

}  // namespace radsym
