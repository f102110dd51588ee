#include "radsym/energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "radsym/error.hpp"
#include "stencil.hpp"

namespace radsym {

namespace {

void check_k(double k) {
  if (!(k >= 1.0)) throw UsageError("cutoff level k must be >= 1");
}

double check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvariantError(std::string("non-finite ") + what);
  return v;
}

void check_model(const GridFunction& u, const VariationalModel& model) {
  if (u.domain().dim() != model.dim) {
    std::ostringstream msg;
    msg << "model '" << model.name << "' is " << model.dim << "-dimensional, grid is "
        << u.domain().dim() << "-dimensional";
    throw UsageError(msg.str());
  }
}

}  // namespace

double cutoff(double s, double k) {
  check_k(k);
  const double x = std::abs(s) / k;
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double t = 2.0 - x;
  return std::min(1.0, t * t * t * (10.0 - 15.0 * t + 6.0 * t * t));
}

double cutoff_derivative(double s, double k) {
  check_k(k);
  const double x = std::abs(s) / k;
  if (x <= 1.0 || x >= 2.0) return 0.0;
  const double t = 2.0 - x;
  const double dq = 30.0 * t * t * (1.0 - t) * (1.0 - t);
  return -dq * (s > 0 ? 1.0 : -1.0) / k;
}

double gradient_energy(const GridFunction& u, const VariationalModel& model) {
  check_model(u, model);
  const GridDomain& d = u.domain();
  const std::vector<double> U = detail::padded_values(u);
  std::vector<double> terms;
  terms.reserve(d.stencil_cells().size() * detail::orientation_count(d.dim()));
  detail::for_each_corner(d, U, [&](std::size_t pc, unsigned, const double*, double t) {
    terms.push_back(model.j.j(U[pc], t));
  });
  const double J = d.cell_volume() / detail::orientation_count(d.dim()) * compensated_sum(terms);
  return check_finite(J, "gradient energy J");
}

EnergyBreakdown energy(const GridFunction& u, const VariationalModel& model) {
  EnergyBreakdown e;
  e.J = gradient_energy(u, model);
  e.Fterm = check_finite(integrate_composite(u, model.f.F), "nonlinear term");
  e.W = check_finite(integrate_composite(u, [&](double, double s) { return model.g.G(s); }),
                     "constraint integral W");
  e.E = e.J - e.Fterm;
  return e;
}

CellField energy_gradient(const GridFunction& u, const VariationalModel& model) {
  check_model(u, model);
  const GridDomain& d = u.domain();
  const std::vector<double> U = detail::padded_values(u);
  std::vector<double> G(d.padded_count(), 0.0);
  const double w = d.cell_volume() / detail::orientation_count(d.dim());
  const double inv_h = 1.0 / d.spacing();
  detail::for_each_corner(d, U, [&](std::size_t pc, unsigned s, const double* D, double t) {
    const double base = U[pc];
    G[pc] += w * model.j.j_s(base, t);
    if (t > 0.0) {
      const double jt = w * model.j.j_t(base, t) / t;
      for (int a = 0; a < d.dim(); ++a) {
        const double coef = jt * D[a] * detail::orientation_sign(s, a) * inv_h;
        G[detail::corner_neighbor(d, pc, s, a)] += coef;
        G[pc] -= coef;
      }
    }
  });
  std::vector<double> out(d.cell_count(), 0.0);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    if (d.masked(c)) continue;
    out[c] = G[d.padded_of(c)] - d.cell_volume() * model.f.f(d.center_radius(c), u[c]);
    check_finite(out[c], "energy gradient");
  }
  return CellField(u.domain_ptr(), std::move(out));
}

CellField constraint_gradient(const GridFunction& u, const VariationalModel& model) {
  const GridDomain& d = u.domain();
  std::vector<double> out(d.cell_count(), 0.0);
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    if (!d.masked(c)) out[c] = d.cell_volume() * model.g.g(u[c]);
  }
  return CellField(u.domain_ptr(), std::move(out));
}

double pairing(std::span<const double> a, std::span<const double> b, const GridDomain& domain) {
  std::vector<double> terms;
  terms.reserve(domain.unmasked_count());
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (!domain.masked(c)) terms.push_back(a[c] * b[c]);
  }
  return compensated_sum(terms);
}

// ---------------------------------------------------------------------------

GridFunction TestFunction::realize(const GridFunction& u) const {
  std::vector<double> v(u.size(), 0.0);
  for (std::size_t c = 0; c < v.size(); ++c) v[c] = cutoff(u[c], k) * base[c];
  return GridFunction(u.domain_ptr(), std::move(v));
}

std::vector<TestFunction> make_test_bank(const GridFunction& u, int count, std::uint64_t seed) {
  if (count < 1) throw UsageError("test bank needs at least one function");
  const GridDomain& d = u.domain();
  const double mx = u.max();
  if (!(mx > 0.0)) throw UsageError("test bank needs a function with positive values");
  std::vector<std::size_t> support;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!d.masked(c) && u[c] > 0.05 * mx) support.push_back(c);
  }
  const double measure = d.cell_volume() * static_cast<double>(support.size());
  const double unit_ball = d.dim() == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
  const double support_radius = std::pow(measure / unit_ball, 1.0 / d.dim());

  std::mt19937_64 rng(seed);
  const auto uniform01 = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<TestFunction> bank;
  for (int i = 0; i < count; ++i) {
    const Point c0 = d.center(support[rng() % support.size()]);
    const double sigma = support_radius * (0.1 + 0.17 * uniform01());
    const double rho = std::max(3.0 * sigma, 3.0 * d.spacing());
    GridFunction v = GridFunction::sample(u.domain_ptr(), [&](const Point& x) {
      double r2 = 0.0;
      for (int a = 0; a < d.dim(); ++a) r2 += (x[a] - c0[a]) * (x[a] - c0[a]);
      const double q = 1.0 - r2 / (rho * rho);
      return q > 0.0 ? q * q * q : 0.0;
    });
    bank.push_back(TestFunction{std::move(v), std::max(1.0, mx)});
  }
  return bank;
}

double w1p_norm(const GridFunction& phi, double p) {
  const double a = std::pow(lp_norm(phi, p), p);
  return std::pow(a + dirichlet_energy(phi, p), 1.0 / p);
}

namespace {

struct Pairings {
  std::vector<double> A, B, phi_inf;
  std::vector<GridFunction> phis;
};

Pairings pair_tests(const GridFunction& u, const VariationalModel& model,
                    const std::vector<TestFunction>& tests) {
  const CellField gE = energy_gradient(u, model);
  const CellField gW = constraint_gradient(u, model);
  Pairings out;
  for (const auto& t : tests) {
    GridFunction phi = t.realize(u);
    out.A.push_back(pairing(gE.values(), phi.values(), u.domain()));
    out.B.push_back(pairing(gW.values(), phi.values(), u.domain()));
    double inf = 0.0;
    for (double v : phi.values()) inf = std::max(inf, std::abs(v));
    out.phi_inf.push_back(inf);
    out.phis.push_back(std::move(phi));
  }
  return out;
}

}  // namespace

LambdaEstimate estimate_lambda(const GridFunction& u, const VariationalModel& model,
                               const std::vector<TestFunction>& tests) {
  if (tests.empty()) throw UsageError("estimate_lambda needs at least one test function");
  const Pairings pr = pair_tests(u, model, tests);
  const double g1 = integrate_composite(u, [&](double, double s) { return std::abs(model.g.g(s)); });
  LambdaEstimate est;
  est.A = pr.A;
  est.B = pr.B;
  std::vector<double> ab, bb;
  double eps_max = 0.0;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const double eps = 1e-8 * g1 * pr.phi_inf[i];
    eps_max = std::max(eps_max, eps);
    if (std::abs(pr.B[i]) > eps) {
      ab.push_back(pr.A[i] * pr.B[i]);
      bb.push_back(pr.B[i] * pr.B[i]);
      est.per_test.push_back(pr.A[i] / pr.B[i]);
      ++est.usable;
    } else {
      est.per_test.push_back(std::nan(""));
    }
  }
  est.eps_den = eps_max;
  if (est.usable == 0) {
    throw InvariantError("all constraint pairings below the denominator guard; g(u) is ~0");
  }
  est.lambda = compensated_sum(ab) / compensated_sum(bb);
  double mean = 0.0;
  for (double l : est.per_test) {
    if (!std::isnan(l)) mean += l;
  }
  mean /= est.usable;
  double var = 0.0;
  for (double l : est.per_test) {
    if (!std::isnan(l)) var += (l - mean) * (l - mean);
  }
  var /= est.usable;
  est.spread_cv = mean != 0.0 ? std::sqrt(var) / std::abs(mean) : std::sqrt(var);
  return est;
}

ELReport el_residual(const GridFunction& u, double lambda, const VariationalModel& model,
                     const std::vector<TestFunction>& tests) {
  if (tests.empty()) throw UsageError("el_residual needs at least one test function");
  const Pairings pr = pair_tests(u, model, tests);
  ELReport rep;
  rep.lambda = lambda;
  rep.A = pr.A;
  rep.B = pr.B;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    const double r = pr.A[i] - lambda * pr.B[i];
    const double nrm = w1p_norm(pr.phis[i], model.p());
    rep.residual.push_back(r);
    rep.phi_norm.push_back(nrm);
    const double normalized = nrm > 0.0 ? std::abs(r) / nrm : 0.0;
    rep.normalized.push_back(normalized);
    rep.normalized_max = std::max(rep.normalized_max, normalized);
  }
  return rep;
}

double critical_set_measure(const GridFunction& u_star, double eps_grad, double eps_val) {
  const GridDomain& d = u_star.domain();
  const CellField gm = gradient_magnitude(u_star);
  const double mx = u_star.max();
  std::size_t count = 0;
  for (std::size_t c = 0; c < u_star.size(); ++c) {
    if (d.masked(c)) continue;
    const double v = u_star[c];
    if (gm[c] < eps_grad && v > eps_val && v < mx - eps_val) ++count;
  }
  return d.cell_volume() * static_cast<double>(count);
}

}  // namespace radsym
