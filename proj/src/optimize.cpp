#include "radsym/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "radsym/error.hpp"
#include "radsym/json_out.hpp"
#include "radsym/rearrange.hpp"
#include "stencil.hpp"

namespace radsym {

Preconditioner parse_preconditioner(const std::string& name) {
  if (name == "none") return Preconditioner::None;
  if (name == "laplacian") return Preconditioner::Laplacian;
  if (name == "reweighted") return Preconditioner::Reweighted;
  throw UsageError("unknown preconditioner '" + name + "' (none, laplacian, reweighted)");
}

std::string to_string(Preconditioner p) {
  switch (p) {
    case Preconditioner::None: return "none";
    case Preconditioner::Laplacian: return "laplacian";
    case Preconditioner::Reweighted: return "reweighted";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::GradTol: return "grad_tol";
    case StopReason::EnergyTol: return "energy_tol";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::LineSearch: return "line_search";
    case StopReason::EnergyFloor: return "energy_floor";
  }
  return "?";
}

void MinimizeOptions::validate() const {
  if (max_iters < 0) throw UsageError("max_iters must be >= 0");
  if (!(grad_tol >= 0.0)) throw UsageError("grad_tol must be >= 0");
  if (!(energy_tol >= 0.0)) throw UsageError("energy_tol must be >= 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw UsageError("armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0))
    throw UsageError("backtrack_factor must lie in (0, 1)");
  if (max_backtracks < 1) throw UsageError("max_backtracks must be >= 1");
  if (symmetrize_every < 0) throw UsageError("symmetrize_every must be >= 0");
  if (!(irls_floor > 0.0)) throw UsageError("irls_floor must be positive");
}

GridFunction clip_nonneg(const GridFunction& u) {
  std::vector<double> v(u.values().begin(), u.values().end());
  for (double& x : v) {
    if (x < 0.0) x = 0.0;
  }
  return GridFunction(u.domain_ptr(), std::move(v));
}

GridFunction project_constraint(const GridFunction& u, const VariationalModel& model) {
  bool any = false;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] < 0.0) throw InvariantError("project_constraint: negative value at cell " + std::to_string(c));
    if (u[c] > 0.0) any = true;
  }
  if (!any) throw UsageError("project_constraint: u is identically zero");
  const auto W = [&](double theta) {
    return integrate_composite(u, [&](double, double s) { return model.g.G(theta * s); });
  };
  if (model.g.power) {
    const double q = *model.g.power;
    const double I = integrate_composite(u, [q](double, double s) { return std::pow(std::abs(s), q); });
    return u.scaled(std::pow(I, -1.0 / q));
  }
  double lo = std::log(1e-12), hi = std::log(1e12);
  if (!(W(std::exp(lo)) < 1.0) || !(W(std::exp(hi)) > 1.0))
    throw UsageError("project_constraint: no scaling in [1e-12, 1e12] brackets W = 1");
  double theta = 1.0;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    theta = std::exp(mid);
    const double w = W(theta);
    if (std::abs(w - 1.0) <= 1e-12) break;
    (w < 1.0 ? lo : hi) = mid;
  }
  return u.scaled(theta);
}

namespace {

struct Gradients {
  std::vector<double> g, gw;
  ProjectedGradient pg;
  std::vector<double> residual;  // g - lambda gw on free cells, 0 elsewhere
};

Gradients gradients(const GridFunction& u, const VariationalModel& model) {
  const GridDomain& d = u.domain();
  Gradients out;
  const CellField g = energy_gradient(u, model);
  const CellField gw = constraint_gradient(u, model);
  out.g.assign(g.values().begin(), g.values().end());
  out.gw.assign(gw.values().begin(), gw.values().end());
  const double lambda = pairing(out.g, out.gw, d) / pairing(out.gw, out.gw, d);
  out.pg.lambda = lambda;
  out.residual.assign(u.size(), 0.0);
  std::vector<double> sq;
  sq.reserve(d.unmasked_count());
  const double vol = d.cell_volume();
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (d.masked(c)) continue;
    const double r = out.g[c] - lambda * out.gw[c];
    if (u[c] <= 0.0 && r >= 0.0) continue;  // pinned at the bound
    out.residual[c] = r;
    sq.push_back((r / vol) * (r / vol));
  }
  out.pg.norm = std::sqrt(vol * compensated_sum(sq));
  return out;
}

using SpMat = Eigen::SparseMatrix<double>;

class Metric {
 public:
  Metric(const GridDomain& d) : d_(d), unknown_(d.cell_count(), -1) {
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
      if (!d.masked(c)) unknown_[c] = count_++;
    }
  }

  // Corner weights j_t(s, t~)/t~ with t~ floored; `constant` replaces them by
  // their mean (fixed Laplacian).
  void assemble(const GridFunction& u, const VariationalModel& model, double floor_rel, bool constant) {
    const std::vector<double> U = detail::padded_values(u);
    double umax = 0.0;
    for (double v : u.values()) umax = std::max(umax, std::abs(v));
    const double h = d_.spacing();
    const double t_floor = std::max(floor_rel * umax / h, 1e-300);
    const double scale = d_.cell_volume() / detail::orientation_count(d_.dim()) / (h * h);

    std::vector<double> weights;
    detail::for_each_corner(d_, U, [&](std::size_t pc, unsigned, const double*, double t) {
      const double tt = std::max(t, t_floor);
      weights.push_back(model.j.j_t(U[pc], tt) / tt);
    });
    if (constant) {
      const double mean = compensated_sum(weights) / static_cast<double>(weights.size());
      std::fill(weights.begin(), weights.end(), mean);
    }

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> diag(count_, 0.0);
    std::size_t k = 0;
    detail::for_each_corner(d_, U, [&](std::size_t pc, unsigned s, const double*, double) {
      const double w = scale * weights[k++];
      const std::ptrdiff_t a_cell = d_.unknown_of_padded(pc);
      const int ia = a_cell >= 0 ? unknown_[a_cell] : -1;
      for (int a = 0; a < d_.dim(); ++a) {
        const std::ptrdiff_t b_cell = d_.unknown_of_padded(detail::corner_neighbor(d_, pc, s, a));
        const int ib = b_cell >= 0 ? unknown_[b_cell] : -1;
        if (ia >= 0) diag[ia] += w;
        if (ib >= 0) diag[ib] += w;
        if (ia >= 0 && ib >= 0) {
          trip.emplace_back(ia, ib, -w);
          trip.emplace_back(ib, ia, -w);
        }
      }
    });
    double dmax = 0.0;
    for (double v : diag) dmax = std::max(dmax, v);
    for (int i = 0; i < count_; ++i) trip.emplace_back(i, i, diag[i] + 1e-12 * dmax);
    SpMat M(count_, count_);
    M.setFromTriplets(trip.begin(), trip.end());
    solver_.compute(M);
    if (solver_.info() != Eigen::Success) throw InvariantError("preconditioner factorization failed");
  }

  std::vector<double> solve(const std::vector<double>& rhs) const {
    Eigen::VectorXd b(count_);
    for (std::size_t c = 0; c < rhs.size(); ++c) {
      if (unknown_[c] >= 0) b[unknown_[c]] = rhs[c];
    }
    const Eigen::VectorXd x = solver_.solve(b);
    std::vector<double> out(rhs.size(), 0.0);
    for (std::size_t c = 0; c < rhs.size(); ++c) {
      if (unknown_[c] >= 0) out[c] = x[unknown_[c]];
    }
    return out;
  }

 private:
  const GridDomain& d_;
  std::vector<int> unknown_;
  int count_ = 0;
  Eigen::SimplicialLDLT<SpMat> solver_;
};

HistoryRow make_row(int iter, const EnergyBreakdown& e, double pg, double step, bool restart) {
  return HistoryRow{iter, e.E, e.J, e.Fterm, e.W, pg, step, restart};
}

}  // namespace

ProjectedGradient projected_gradient(const GridFunction& u, const VariationalModel& model) {
  return gradients(u, model).pg;
}

MinimizeResult minimize(const VariationalModel& model, const GridFunction& u0, const MinimizeOptions& opts) {
  opts.validate();
  const GridDomain& d = u0.domain();
  if (d.dim() != model.dim) throw UsageError("model and grid dimensions differ");

  GridFunction u = project_constraint(clip_nonneg(u0), model);
  EnergyBreakdown e = energy(u, model);
  Gradients gr = gradients(u, model);
  MinimizeResult res{u, e, 0, false, StopReason::MaxIters, gr.pg.lambda, gr.pg.norm, {}};
  res.history.push_back(make_row(0, e, gr.pg.norm, 0.0, false));

  Metric metric(d);
  if (opts.preconditioner == Preconditioner::Laplacian) metric.assemble(u, model, opts.irls_floor, true);

  std::vector<double> prev_u, prev_res;
  int small_decreases = 0;
  int it = 0;
  for (; it < opts.max_iters; ++it) {
    if (gr.pg.norm <= opts.grad_tol) {
      res.stop = StopReason::GradTol;
      res.converged = true;
      break;
    }

    std::vector<double> dir(u.size(), 0.0);
    double t = 1.0;
    if (opts.preconditioner == Preconditioner::None) {
      double dinf = 0.0;
      for (std::size_t c = 0; c < u.size(); ++c) {
        dir[c] = gr.g[c] - gr.pg.lambda * gr.gw[c];
        dinf = std::max(dinf, std::abs(dir[c]));
      }
      t = dinf > 0.0 ? 1.0 / dinf : 1.0;
      if (!prev_u.empty()) {
        double ss = 0.0, sy = 0.0;
        for (std::size_t c = 0; c < u.size(); ++c) {
          const double s = u[c] - prev_u[c];
          const double y = gr.residual[c] - prev_res[c];
          ss += s * s;
          sy += s * y;
        }
        if (sy > 0.0 && std::isfinite(ss / sy)) t = ss / sy;
      }
    } else {
      if (opts.preconditioner == Preconditioner::Reweighted) metric.assemble(u, model, opts.irls_floor, false);
      // Direction tangent to the constraint in the metric: M^-1 g - mu M^-1 gw
      // with mu chosen so that <dir, gw> = 0.
      const std::vector<double> d1 = metric.solve(gr.g);
      const std::vector<double> d2 = metric.solve(gr.gw);
      const double mu = pairing(d1, gr.gw, d) / pairing(d2, gr.gw, d);
      for (std::size_t c = 0; c < u.size(); ++c) dir[c] = d1[c] - mu * d2[c];
    }

    bool accepted = false;
    GridFunction cand = u;
    EnergyBreakdown ce;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      std::vector<double> v(u.size(), 0.0);
      for (std::size_t c = 0; c < u.size(); ++c) {
        if (!d.masked(c)) v[c] = std::max(0.0, u[c] - t * dir[c]);
      }
      GridFunction trial(u.domain_ptr(), std::move(v));
      bool nonzero = false;
      for (double x : trial.values()) nonzero = nonzero || x > 0.0;
      if (nonzero) {
        trial = project_constraint(trial, model);
        const EnergyBreakdown te = energy(trial, model);
        std::vector<double> step(u.size());
        for (std::size_t c = 0; c < u.size(); ++c) step[c] = trial[c] - u[c];
        const double pred = std::min(0.0, pairing(gr.residual, step, d));
        if (te.E <= e.E + opts.armijo_c * pred) {
          cand = std::move(trial);
          ce = te;
          accepted = true;
          break;
        }
      }
      t *= opts.backtrack_factor;
    }
    if (!accepted) {
      res.stop = StopReason::LineSearch;
      break;
    }

    prev_u.assign(u.values().begin(), u.values().end());
    prev_res = gr.residual;
    const double rel = (e.E - ce.E) / std::max(std::abs(ce.E), 1e-300);
    u = std::move(cand);
    e = ce;
    gr = gradients(u, model);
    res.history.push_back(make_row(it + 1, e, gr.pg.norm, t, false));

    if (e.E < opts.energy_floor) {
      res.stop = StopReason::EnergyFloor;
      ++it;
      break;
    }

    if (opts.symmetrize_every > 0 && (it + 1) % opts.symmetrize_every == 0) {
      const GridFunction us = project_constraint(schwarz_symmetrize(u), model);
      const EnergyBreakdown es = energy(us, model);
      if (es.E <= e.E) {
        u = us;
        e = es;
        gr = gradients(u, model);
        prev_u.clear();
        res.history.push_back(make_row(it + 1, e, gr.pg.norm, 0.0, true));
      }
    }

    small_decreases = rel < opts.energy_tol ? small_decreases + 1 : 0;
    if (small_decreases >= 3 && gr.pg.norm > opts.grad_tol) {
      res.stop = StopReason::EnergyTol;
      res.converged = true;
      ++it;
      break;
    }
  }
  if (it >= opts.max_iters && res.stop == StopReason::MaxIters && gr.pg.norm <= opts.grad_tol) {
    res.stop = StopReason::GradTol;
    res.converged = true;
  }
  res.u_final = u;
  res.energy = e;
  res.iterations = it;
  res.lambda = gr.pg.lambda;
  res.proj_grad_norm = gr.pg.norm;
  return res;
}

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out) {
  out << "iter,E,J,Fterm,W,proj_grad_norm,step,restart\n";
  for (const auto& r : history) {
    out << r.iter << ',' << format_double(r.E) << ',' << format_double(r.J) << ','
        << format_double(r.Fterm) << ',' << format_double(r.W) << ',' << format_double(r.proj_grad_norm)
        << ',' << format_double(r.step) << ',' << (r.restart ? 1 : 0) << '\n';
  }
}

}  // namespace radsym
