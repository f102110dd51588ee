#include "radsym/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "radsym/error.hpp"

namespace radsym {

GridFunction shift_cells(const GridFunction& v, const Index& shift) {
  const GridDomain& d = v.domain();
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (d.masked(c)) continue;
    Index src = d.index(c);
    for (int a = 0; a < d.dim(); ++a) src[a] -= shift[a];
    if (d.in_box(src)) out[c] = v[d.linear(src)];
  }
  return GridFunction(v.domain_ptr(), std::move(out));
}

Alignment align(const GridFunction& u, const GridFunction& u_star) {
  const GridDomain& d = u.domain();
  if (!d.same_lattice(u_star.domain())) throw UsageError("align: functions live on different lattices");
  if (d.shape() == Shape::Ball) return {u_star, {0, 0, 0}};
  const auto centroid = [&](const GridFunction& v) {
    std::array<std::vector<double>, 3> moments;
    std::vector<double> mass;
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (d.masked(c)) continue;
      mass.push_back(v[c]);
      for (int a = 0; a < d.dim(); ++a) moments[a].push_back(v[c] * d.center(c, a));
    }
    const double m = compensated_sum(mass);
    if (!(m > 0.0)) throw UsageError("align: zero-mass input");
    Point x{0, 0, 0};
    for (int a = 0; a < d.dim(); ++a) x[a] = compensated_sum(moments[a]) / m;
    return x;
  };
  const Point cu = centroid(u);
  const Point cs = centroid(u_star);
  Index shift{0, 0, 0};
  for (int a = 0; a < d.dim(); ++a) shift[a] = static_cast<int>(std::lround((cu[a] - cs[a]) / d.spacing()));
  return {shift_cells(u_star, shift), shift};
}

namespace {

GridFunction difference(const GridFunction& a, const GridFunction& b) {
  std::vector<double> v(a.size());
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = a[c] - b[c];
  return GridFunction(a.domain_ptr(), std::move(v));
}

}  // namespace

SymmetryReport symmetry_report(const VariationalModel& model, const GridFunction& u,
                               const VerifyThresholds& th) {
  const double p = model.p();
  const GridDomain& d = u.domain();
  SymmetryReport rep;
  rep.thresholds = th;
  const GridFunction u_star = schwarz_symmetrize(u);
  const Alignment al = align(u, u_star);
  rep.shift = al.shift;
  rep.rel_lp_distance = lp_norm(difference(u, al.shifted), p) / lp_norm(u, p);
  rep.e_u = energy(u, model);
  rep.e_star = energy(u_star, model);
  rep.energy_gap = rep.e_u.E - rep.e_star.E;
  rep.j_gap = rep.e_u.J - rep.e_star.J;
  rep.grad_norm_gap = grad_lp_norm(u, p) - grad_lp_norm(u_star, p);
  rep.energy_scale = std::abs(rep.e_u.J) + std::abs(rep.e_u.Fterm);
  rep.energy_chain_ok = rep.e_star.E <= rep.e_u.E + 1e-8 * rep.energy_scale;
  const double mx = u_star.max();
  rep.cstar_measure = critical_set_measure(u_star, th.cstar_eps_rel * mx / d.spacing(), th.cstar_eps_rel * mx);
  rep.support_measure = distribution_function(u_star, 0.0);
  rep.verdict = rep.rel_lp_distance <= th.rel_lp && rep.cstar_measure <= th.cstar_fraction * rep.support_measure;
  const auto tests = make_test_bank(u, th.test_count, th.test_seed);
  rep.lambda = estimate_lambda(u, model, tests);
  rep.el = el_residual(u, rep.lambda.lambda, model, tests);
  return rep;
}

VerifyOutcome verify_theorem(const VariationalModel& model, const GridFunction& u0, const MinimizeOptions& opts,
                             const VerifyThresholds& th) {
  MinimizeResult res = minimize(model, u0, opts);
  SymmetryReport rep = symmetry_report(model, res.u_final, th);
  rep.iterations = res.iterations;
  rep.converged = res.converged;
  rep.stop_reason = to_string(res.stop);
  rep.proj_grad_norm = res.proj_grad_norm;
  GridFunction u_star = schwarz_symmetrize(res.u_final);
  GridFunction aligned = shift_cells(u_star, rep.shift);
  return VerifyOutcome{std::move(res), std::move(u_star), std::move(aligned), std::move(rep)};
}

PolarizationAudit polarization_audit(const GridFunction& u, const VariationalModel& model,
                                     const PolarizerSequence& seq, int n_max, int test_count,
                                     std::uint64_t test_seed) {
  const double p = model.p();
  const GridFunction u_star = schwarz_symmetrize(u);
  const auto tests = make_test_bank(u, test_count, test_seed);
  const double norm_u = lp_norm(u, p);

  PolarizationAudit audit;
  const auto row = [&](int n, const GridFunction& v) {
    AuditRow r;
    r.n = n;
    r.distance = lp_norm(difference(v, u_star), p);
    const EnergyBreakdown e = energy(v, model);
    r.W = e.W;
    r.J = e.J;
    r.Fterm = e.Fterm;
    r.E = e.E;
    r.grad_p = dirichlet_energy(v, p);
    r.lambda = estimate_lambda(v, model, tests).lambda;
    return r;
  };
  GridFunction cur = u;
  audit.rows.push_back(row(0, cur));
  const double scale = std::abs(audit.rows[0].J) + std::abs(audit.rows[0].Fterm);
  const auto flag = [&](int n, const std::string& what) {
    std::ostringstream o;
    o << "step " << n << ": " << what;
    audit.flags.push_back(o.str());
  };
  for (int n = 1; n <= n_max; ++n) {
    if (audit.rows.back().distance <= 1e-14 * norm_u) break;
    if (seq.items.empty()) throw UsageError("polarization_audit: empty polarizer sequence");
    cur = polarize(cur, seq.items[static_cast<std::size_t>(n - 1) % seq.items.size()]);
    audit.rows.push_back(row(n, cur));
    const AuditRow& a = audit.rows[audit.rows.size() - 2];
    const AuditRow& b = audit.rows.back();
    if (std::abs(b.W - audit.rows[0].W) > 1e-10 * std::abs(audit.rows[0].W)) flag(n, "W drifted");
    if (b.J > a.J + 1e-10 * scale) flag(n, "J increased");
    if (b.grad_p > a.grad_p + 1e-10 * audit.rows[0].grad_p) flag(n, "p-Dirichlet energy increased");
    if (b.Fterm < a.Fterm - 1e-12 * scale) flag(n, "Fterm decreased");
    if (b.E > a.E + 1e-10 * scale) flag(n, "E increased");
    if (b.distance > a.distance + 1e-12 * norm_u) flag(n, "distance to u* increased");
  }
  double mean = 0.0;
  for (const auto& r : audit.rows) mean += r.lambda;
  mean /= static_cast<double>(audit.rows.size());
  double var = 0.0;
  for (const auto& r : audit.rows) var += (r.lambda - mean) * (r.lambda - mean);
  var /= static_cast<double>(audit.rows.size());
  audit.lambda_cv = mean != 0.0 ? std::sqrt(var) / std::abs(mean) : 0.0;
  return audit;
}

std::vector<RefinementRow> refinement_study(const VariationalModel& model, const std::vector<double>& h_list,
                                            const RefinementProtocol& pr) {
  if (h_list.empty()) throw UsageError("refinement_study: empty h list");
  for (std::size_t k = 1; k < h_list.size(); ++k) {
    if (!(h_list[k] < h_list[k - 1])) throw UsageError("refinement_study: h list must be decreasing");
  }
  const int N = model.dim;
  const double p = model.p();
  std::vector<RefinementRow> rows;
  for (double h : h_list) {
    RefinementRow row;
    row.h = h;
    const DomainPtr box = make_domain(N, Shape::Box, pr.family_L, h);
    // Same family at every h: the generator is reseeded per row.
    std::mt19937_64 rng(pr.family_seed);
    const auto uniform = [&](double lo, double hi) {
      return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    GridExactPolarizer pol{GridExactPolarizer::Kind::Axis, 0, 1,
                           std::max(1, static_cast<int>(std::lround(pr.polarizer_offset / h)))};
    double ps_sum = 0.0, pol_sum = 0.0;
    for (int k = 0; k < pr.family_size; ++k) {
      Point delta{0, 0, 0}, aniso{1, 1, 1};
      for (int a = 0; a < N; ++a) delta[a] = uniform(-pr.family_shift, pr.family_shift);
      for (int a = 0; a < N; ++a) aniso[a] = uniform(1.0 - pr.family_aniso, 1.0 + pr.family_aniso);
      const GridFunction u = GridFunction::sample(box, [&](const Point& x) {
        double q = 0.0;
        for (int a = 0; a < N; ++a) q += std::pow(aniso[a] * (x[a] - delta[a]), 2);
        return std::exp(-q / pr.family_width);
      });
      const double J = gradient_energy(u, model);
      const double Js = gradient_energy(schwarz_symmetrize(u), model);
      const double gap = J > 0.0 ? std::max(0.0, (Js - J) / J) : 0.0;
      ps_sum += gap;
      row.ps_gap_max = std::max(row.ps_gap_max, gap);
      const double gp = dirichlet_energy(u, p);
      const double gph = dirichlet_energy(polarize(u, pol), p);
      pol_sum += gp > 0.0 ? (gp - gph) / gp : 0.0;
    }
    row.ps_gap = ps_sum / pr.family_size;
    row.pol_gap = pol_sum / pr.family_size;
    row.rel_lp = std::numeric_limits<double>::quiet_NaN();
    if (pr.run_verify) {
      const DomainPtr ball = make_domain(N, Shape::Ball, pr.ball_R, h, pr.ball_R);
      const GridFunction u0 = feasible_start(model, pr.s0, ball, pr.start_center);
      row.rel_lp = verify_theorem(model, u0, pr.opts).report.rel_lp_distance;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace radsym
