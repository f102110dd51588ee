#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "radsym/energy.hpp"
#include "radsym/error.hpp"
#include "radsym/rearrange.hpp"

using namespace radsym;

namespace {

GridFunction smooth_random(const DomainPtr& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.2, 1.0);
  const double R = d->radius();
  return GridFunction::sample(d, [&](const Point& x) {
    const double r = std::hypot(x[0], x[1], x[2]);
    return std::max(0.0, 1.0 - r / R) * U(rng);
  });
}

GridFunction bump(const DomainPtr& d, Point c, double rho) {
  return GridFunction::sample(d, [&](const Point& x) {
    double r2 = 0.0;
    for (int a = 0; a < d->dim(); ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    const double q = 1.0 - r2 / (rho * rho);
    return q > 0.0 ? q * q * q : 0.0;
  });
}

GridFunction with_cell(const GridFunction& u, std::size_t c, double value) {
  std::vector<double> v(u.values().begin(), u.values().end());
  v[c] = value;
  return GridFunction(u.domain_ptr(), std::move(v));
}

// Normwise central-difference error of energy_gradient:
// max_c |fd_c - g_c| / max_c |g_c|.
double gradient_fd_error(const GridFunction& u, const VariationalModel& m) {
  const CellField g = energy_gradient(u, m);
  const double step = 1e-6 * u.max();
  double gmax = 0.0, err = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) gmax = std::max(gmax, std::abs(g[c]));
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u.domain().masked(c)) continue;
    const double ep = energy(with_cell(u, c, u[c] + step), m).E;
    const double em = energy(with_cell(u, c, u[c] - step), m).E;
    err = std::max(err, std::abs((ep - em) / (2 * step) - g[c]));
  }
  return err / gmax;
}

double pair(const CellField& a, const GridFunction& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < b.size(); ++c) {
    if (!b.domain().masked(c)) s += a[c] * b[c];
  }
  return s;
}

}  // namespace

TEST_CASE("cutoff") {
  CHECK(cutoff(0.5, 1.0) == 1.0);
  CHECK(cutoff(3.0, 1.0) == 0.0);
  CHECK(cutoff(-1.0, 1.0) == 1.0);
  CHECK(cutoff(-2.0, 1.0) == 0.0);
  CHECK(cutoff(1.5, 1.0) == doctest::Approx(0.5));
  CHECK(cutoff(5.0, 3.0) == cutoff(5.0 / 3.0, 1.0));
  CHECK_THROWS_AS(cutoff(0.0, 0.5), UsageError);
  double worst = 0.0;
  const double ds = 1e-5;
  for (double s = -2.5; s <= 2.5; s += 1e-4) {
    worst = std::max(worst, std::abs(cutoff(s + ds, 1.0) - cutoff(s - ds, 1.0)) / (2 * ds));
    CHECK(cutoff(s, 1.0) >= 0.0);
    CHECK(cutoff(s, 1.0) <= 1.0);
    CHECK(std::abs(cutoff_derivative(s, 1.0) - (cutoff(s + ds, 1.0) - cutoff(s - ds, 1.0)) / (2 * ds)) <= 1e-6);
  }
  CHECK(worst <= 2.0);
  CHECK(worst == doctest::Approx(15.0 / 8.0).epsilon(1e-4));
}

TEST_CASE("energy of zero and of a feasible start") {
  auto d = make_domain(2, Shape::Ball, 3.0, 3.0 / 32, 3.0);
  const VariationalModel m = preset("plaplace");
  const EnergyBreakdown z = energy(GridFunction(d), m);
  CHECK(z.J == 0.0);
  CHECK(z.Fterm == 0.0);
  CHECK(z.W == 0.0);
  CHECK(z.E == 0.0);
  const EnergyBreakdown e = energy(feasible_start(m, 0.5, d, {0.6, -0.4, 0.0}), m);
  CHECK(std::abs(e.W - 1.0) <= 1e-10);
  CHECK(e.E == e.J - e.Fterm);
}

TEST_CASE("p-homogeneity without a nonlinearity") {
  const VariationalModel m = preset("eigen3d");
  auto d = make_domain(3, Shape::Ball, 1.0, 1.0 / 8, 1.0);
  const GridFunction u = smooth_random(d, 3);
  CHECK(energy(u.scaled(2.0), m).E == doctest::Approx(4.0 * energy(u, m).E).epsilon(1e-13));

  VariationalModel pl = preset("plaplace");
  pl.f = preset("eigen3d").f;
  auto d2 = make_domain(2, Shape::Ball, 1.0, 1.0 / 16, 1.0);
  const GridFunction v = smooth_random(d2, 4);
  CHECK(energy(v.scaled(2.0), pl).E == doctest::Approx(std::pow(2.0, 1.5) * energy(v, pl).E).epsilon(1e-13));
}

TEST_CASE("gradient at zero vanishes") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.1, 1.0);
  for (const char* name : {"plaplace", "quasilinear"}) {
    const CellField g = energy_gradient(GridFunction(d), preset(name));
    for (std::size_t c = 0; c < g.size(); ++c) CHECK(g[c] == 0.0);
  }
}

TEST_CASE("energy gradient matches central differences") {
  for (const char* name : {"plaplace", "quasilinear"}) {
    for (double h : {1.0 / 8, 1.0 / 12}) {
      auto d = make_domain(2, Shape::Ball, 1.0, h, 1.0);
      const double err = gradient_fd_error(smooth_random(d, 7), preset(name));
      INFO(name, " h = ", h, " err = ", err);
      CHECK(err <= 1e-5);
    }
  }
  auto d3 = make_domain(3, Shape::Ball, 1.0, 1.0 / 4, 1.0);
  CHECK(gradient_fd_error(smooth_random(d3, 8), preset("eigen3d")) <= 1e-5);
}

TEST_CASE("constraint gradient is h^N g(u)") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.1, 1.0);
  const VariationalModel m = preset("plaplace");
  const GridFunction u = smooth_random(d, 9);
  const CellField gw = constraint_gradient(u, m);
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!d->masked(c)) CHECK(gw[c] == doctest::Approx(0.01 * m.g.g(u[c])).epsilon(1e-14));
  }
}

TEST_CASE("Euler-Lagrange residual") {
  auto d = make_domain(2, Shape::Ball, 1.0, 1.0 / 16, 1.0);
  VariationalModel m = preset("plaplace");

  SUBCASE("vanishes at u = 0 without a nonlinearity") {
    m.f = preset("eigen3d").f;
    const std::vector<TestFunction> tests{{bump(d, {0.2, 0.1, 0}, 0.4), 1.0}, {bump(d, {-0.3, 0, 0}, 0.3), 1.0}};
    const ELReport rep = el_residual(GridFunction(d), 0.0, m, tests);
    for (double r : rep.residual) CHECK(r == 0.0);
    CHECK(rep.normalized_max == 0.0);
  }

  SUBCASE("agrees with the discrete gradient pairing") {
    const GridFunction u = smooth_random(d, 12);
    const auto tests = make_test_bank(u, 10, 5);
    const double lambda = 0.37;
    const ELReport rep = el_residual(u, lambda, m, tests);
    const CellField gE = energy_gradient(u, m);
    const CellField gW = constraint_gradient(u, m);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      const GridFunction phi = tests[i].realize(u);
      const double direct = pair(gE, phi) - lambda * pair(gW, phi);
      CHECK(std::abs(rep.residual[i] - direct) <= 1e-10 * (std::abs(rep.A[i]) + std::abs(lambda * rep.B[i])));
    }
    // Linear in lambda.
    const ELReport rep2 = el_residual(u, 2 * lambda, m, tests);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      CHECK(rep2.residual[i] == doctest::Approx(rep.A[i] - 2 * lambda * rep.B[i]).epsilon(1e-12));
    }
    // Linear in phi: doubling the base doubles the residual.
    std::vector<TestFunction> doubled;
    for (const auto& t : tests) doubled.push_back({t.base.scaled(2.0), t.k});
    const ELReport rep3 = el_residual(u, lambda, m, doubled);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      CHECK(rep3.residual[i] == doctest::Approx(2 * rep.residual[i]).epsilon(1e-10));
    }
    CHECK_THROWS_AS(el_residual(u, lambda, m, {}), UsageError);
  }
}

TEST_CASE("test functions respect the cutoff") {
  auto d = make_domain(2, Shape::Ball, 1.0, 1.0 / 16, 1.0);
  const GridFunction u = smooth_random(d, 2).scaled(5.0);
  for (const auto& t : make_test_bank(u, 10, 1)) {
    CHECK(t.k >= 1.0);
    const GridFunction phi = t.realize(u);
    for (std::size_t c = 0; c < u.size(); ++c) {
      if (std::abs(u[c]) >= 2 * t.k) CHECK(phi[c] == 0.0);
    }
  }
}

TEST_CASE("lambda estimate") {
  auto d = make_domain(2, Shape::Ball, 1.0, 1.0 / 16, 1.0);
  const VariationalModel m = preset("plaplace");
  const GridFunction u = smooth_random(d, 21);
  const auto bank = make_test_bank(u, 10, 3);
  const std::vector<TestFunction> one{bank[0]};
  const LambdaEstimate single = estimate_lambda(u, m, one);
  CHECK(single.usable == 1);
  CHECK(single.lambda == doctest::Approx(single.A[0] / single.B[0]).epsilon(1e-15));

  const LambdaEstimate all = estimate_lambda(u, m, bank);
  double ab = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < bank.size(); ++i) {
    ab += all.A[i] * all.B[i];
    bb += all.B[i] * all.B[i];
  }
  CHECK(all.lambda == doctest::Approx(ab / bb).epsilon(1e-12));

  // g(u) = 0 everywhere: no usable denominator.
  const std::vector<TestFunction> tests{{bump(d, {0, 0, 0}, 0.5), 1.0}};
  CHECK_THROWS_AS(estimate_lambda(GridFunction(d), m, tests), InvariantError);
}

TEST_CASE("critical set measure") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.1, 1.0);
  const double h = 0.1;
  const auto order = radial_order(*d);
  // Strictly decreasing along the radial order, distinct values.
  std::vector<double> v(d->cell_count(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) v[order[k]] = 1.0 + (order.size() - k) * 1e-3;
  const GridFunction strict = schwarz_symmetrize(GridFunction(d, v));
  CHECK(critical_set_measure(strict, 0.5e-3 / h, 1e-9) == 0.0);

  // Radial profile with a flat shell at height 0.5 for 0.3 <= r <= 0.5.
  const GridFunction plateau = GridFunction::sample(d, [](const Point& x) {
    const double r = std::hypot(x[0], x[1]);
    if (r < 0.3) return 1.0 - r;
    if (r <= 0.5) return 0.5;
    return std::max(0.0, 0.5 - (r - 0.5));
  });
  // Oracle: cells in the shell whose forward neighbours are also in it.
  std::size_t k = 0;
  const CellField gm = gradient_magnitude(plateau);
  for (std::size_t c = 0; c < plateau.size(); ++c) {
    if (!d->masked(c) && plateau[c] == 0.5 && gm[c] == 0.0) ++k;
  }
  CHECK(k > 0);
  CHECK(critical_set_measure(plateau, 1e-9, 1e-9) == doctest::Approx(k * h * h));
}
