#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "radsym/error.hpp"
#include "radsym/optimize.hpp"

using namespace radsym;

namespace {

double W_of(const GridFunction& u, const VariationalModel& m) {
  return integrate_composite(u, [&](double, double s) { return m.g.G(s); });
}

GridFunction random_positive(const DomainPtr& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.1, 1.0);
  return GridFunction::sample(d, [&](const Point&) { return U(rng); });
}

}  // namespace

TEST_CASE("closed-form projection") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.5);
  const VariationalModel m = preset("plaplace");
  // 16 cells of area 1/4 with |u|^1.5 = 8 gives int |u|^p = 32.
  const GridFunction u = GridFunction::sample(d, [](const Point&) { return 4.0; });
  CHECK(std::pow(lp_norm(u, 1.5), 1.5) == doctest::Approx(32.0));
  const GridFunction v = project_constraint(u, m);
  const double theta = v[0] / u[0];
  CHECK(theta == doctest::Approx(std::pow(32.0, -2.0 / 3.0)).epsilon(1e-14));
  CHECK(theta == doctest::Approx(0.0992125657).epsilon(1e-9));

  // Same model without the power hint goes through bisection.
  VariationalModel mb = m;
  mb.g.power.reset();
  const GridFunction w = project_constraint(u, mb);
  CHECK(w[0] / u[0] == doctest::Approx(theta).epsilon(1e-11));
  CHECK(std::abs(W_of(w, mb) - 1.0) <= 1e-12);
}

TEST_CASE("projection fixed point and degenerate input") {
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 32, 3.0);
  const VariationalModel m = preset("quasilinear");
  const GridFunction u = feasible_start(m, 0.5, d);
  const GridFunction v = project_constraint(u, m);
  for (std::size_t c = 0; c < u.size(); ++c) CHECK(std::abs(v[c] - u[c]) <= 1e-12 * u.max());
  CHECK_THROWS_AS(project_constraint(GridFunction(d), m), UsageError);
}

TEST_CASE("clip_nonneg") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.25);
  const GridFunction pos = random_positive(d, 1);
  const GridFunction a = clip_nonneg(pos);
  for (std::size_t c = 0; c < a.size(); ++c) CHECK(a[c] == pos[c]);
  const GridFunction b = clip_nonneg(GridFunction::sample(d, [](const Point&) { return -1.0; }));
  for (std::size_t c = 0; c < b.size(); ++c) CHECK(b[c] == 0.0);
  const GridFunction mixed = GridFunction::sample(d, [](const Point& x) { return x[0] + 0.1 * x[1]; });
  const GridFunction m = clip_nonneg(mixed);
  for (std::size_t c = 0; c < m.size(); ++c) CHECK(m[c] == (mixed[c] < 0 ? 0.0 : mixed[c]));
}

TEST_CASE("option validation") {
  MinimizeOptions o;
  CHECK_NOTHROW(o.validate());
  o.armijo_c = 1.0;
  CHECK_THROWS_AS(o.validate(), UsageError);
  o = {};
  o.backtrack_factor = 0.0;
  CHECK_THROWS_AS(o.validate(), UsageError);
  CHECK(parse_preconditioner("reweighted") == Preconditioner::Reweighted);
  CHECK_THROWS_AS(parse_preconditioner("magic"), UsageError);
}

TEST_CASE("first Dirichlet eigenvalue of the unit ball") {
  const VariationalModel m = preset("eigen3d");
  auto d = make_domain(3, Shape::Ball, 1.0, 1.0 / 12, 1.0);
  const MinimizeResult r = minimize(m, random_positive(d, 42), MinimizeOptions{});
  const double pi2 = std::numbers::pi * std::numbers::pi;
  INFO("E = ", r.energy.E, " iterations ", r.iterations);
  CHECK(r.converged);
  CHECK(std::abs(r.energy.E - pi2) <= 0.05 * pi2);
  CHECK(std::abs(r.energy.W - 1.0) <= 1e-10);

  // For j = t^2, G = s^2, F = 0 the multiplier is the Rayleigh quotient.
  const auto tests = make_test_bank(r.u_final, 10, 11);
  const LambdaEstimate lam = estimate_lambda(r.u_final, m, tests);
  CHECK(std::abs(lam.lambda - pi2) <= 0.05 * pi2);
  CHECK(lam.spread_cv <= 0.10);
  const ELReport el = el_residual(r.u_final, lam.lambda, m, tests);
  CHECK(el.normalized_max <= 10 * MinimizeOptions{}.grad_tol);
}

TEST_CASE("plaplace descent from an off-centre start") {
  const VariationalModel m = preset("plaplace");
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 16, 3.0);
  const GridFunction u0 = feasible_start(m, 0.5, d, {0.6, -0.4, 0.0});
  const MinimizeResult r = minimize(m, u0, MinimizeOptions{});
  CHECK(r.energy.E <= energy(u0, m).E);
  CHECK(std::abs(r.energy.W - 1.0) <= 1e-10);
  CHECK(r.u_final.nonnegative());
  CHECK(r.converged);
  CHECK(to_string(r.stop) == "grad_tol");
  for (std::size_t k = 1; k < r.history.size(); ++k) {
    CHECK(r.history[k].E <= r.history[k - 1].E);
    CHECK(std::abs(r.history[k].W - 1.0) <= 1e-10);
  }

  const MinimizeResult again = minimize(m, u0, MinimizeOptions{});
  CHECK(again.iterations == r.iterations);
  for (std::size_t c = 0; c < r.u_final.size(); ++c) CHECK(again.u_final[c] == r.u_final[c]);

  std::ostringstream csv;
  write_history_csv(r.history, csv);
  CHECK(csv.str().rfind("iter,E,J,Fterm,W,proj_grad_norm,step", 0) == 0);
}

TEST_CASE("symmetrize-restart reaches the same energy") {
  const VariationalModel m = preset("plaplace");
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 16, 3.0);
  const GridFunction u0 = feasible_start(m, 0.5, d, {0.6, -0.4, 0.0});
  MinimizeOptions o;
  const MinimizeResult plain = minimize(m, u0, o);
  o.symmetrize_every = 10;
  const MinimizeResult sym = minimize(m, u0, o);
  CHECK(std::abs(sym.energy.E - plain.energy.E) <= 1e-3 * std::abs(plain.energy.E));
  for (std::size_t k = 1; k < sym.history.size(); ++k) {
    CHECK(sym.history[k].E <= sym.history[k - 1].E + 1e-8 * (std::abs(sym.history[k - 1].J) +
                                                             std::abs(sym.history[k - 1].Fterm)));
    CHECK(std::abs(sym.history[k].W - 1.0) <= 1e-10);
  }
}

TEST_CASE("every preconditioner descends") {
  const VariationalModel m = preset("quasilinear");
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 8, 3.0);
  const GridFunction u0 = feasible_start(m, 0.5, d, {0.6, -0.4, 0.0});
  for (Preconditioner p : {Preconditioner::None, Preconditioner::Laplacian, Preconditioner::Reweighted}) {
    MinimizeOptions o;
    o.preconditioner = p;
    o.max_iters = 30;
    const MinimizeResult r = minimize(m, u0, o);
    INFO(to_string(p));
    CHECK(r.energy.E < energy(u0, m).E);
    CHECK(std::abs(r.energy.W - 1.0) <= 1e-10);
    CHECK(projected_gradient(r.u_final, m).norm == doctest::Approx(r.proj_grad_norm));
  }
}

TEST_CASE("energy floor stops the run") {
  // Any finite grid keeps E bounded, so the floor is placed just under E(u0).
  const VariationalModel m = preset("plaplace", ModelParams{std::nullopt, 4.0, std::nullopt});
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 16, 3.0);
  const GridFunction u0 = feasible_start(m, 0.5, d);
  const double E0 = energy(u0, m).E;
  MinimizeOptions o;
  o.energy_floor = E0 - 1e-3 * std::abs(E0);
  const MinimizeResult r = minimize(m, u0, o);
  CHECK_FALSE(r.converged);
  CHECK(r.stop == StopReason::EnergyFloor);
  CHECK(std::abs(r.energy.W - 1.0) <= 1e-10);
}
