#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "radsym/error.hpp"
#include "radsym/grid.hpp"
#include "radsym/grid_io.hpp"

using namespace radsym;

namespace {

GridFunction random_function(const DomainPtr& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> v(d->cell_count());
  for (auto& x : v) x = U(rng);
  return GridFunction(d, std::move(v));
}

// Straight loop re-implementation of the forward-difference magnitude in 2D.
std::vector<double> forward_gradient_2d(const GridFunction& u) {
  const GridDomain& d = u.domain();
  const int n = d.cells_per_axis();
  const double h = d.spacing();
  const auto at = [&](int i, int j) -> double {
    if (i >= n || j >= n) return 0.0;
    return u[static_cast<std::size_t>(i) * n + j];
  };
  std::vector<double> out(u.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double di = (at(i + 1, j) - at(i, j)) / h;
      const double dj = (at(i, j + 1) - at(i, j)) / h;
      out[static_cast<std::size_t>(i) * n + j] = std::sqrt(di * di + dj * dj);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("box lattice centres") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.5);
  CHECK(d->cells_per_axis() == 4);
  CHECK(d->cell_count() == 16);
  const double expected[] = {-0.75, -0.25, 0.25, 0.75};
  for (int i = 0; i < 4; ++i) CHECK(d->coordinate(i) == expected[i]);
  CHECK(d->center(d->linear({3, 0, 0})) == Point{0.75, -0.75, 0.0});
}

TEST_CASE("ball mask") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.25, 1.0);
  CHECK(d->cells_per_axis() == 8);
  std::size_t unmasked = 0;
  for (std::size_t c = 0; c < d->cell_count(); ++c) {
    const Point x = d->center(c);
    const bool outside = std::hypot(x[0], x[1]) > 1.0;
    CHECK(d->masked(c) == outside);
    unmasked += outside ? 0 : 1;
  }
  CHECK(d->unmasked_count() == unmasked);
}

TEST_CASE("make_domain preconditions") {
  CHECK_THROWS_AS(make_domain(2, Shape::Box, 1.0, 0.3), UsageError);
  CHECK_THROWS_AS(make_domain(2, Shape::Ball, 1.0, 0.25, 1.5), UsageError);
  CHECK_THROWS_AS(make_domain(4, Shape::Box, 1.0, 0.25), UsageError);
  CHECK_THROWS_AS(make_domain(1, Shape::Box, 1.0, 0.25), UsageError);
  CHECK_THROWS_AS(make_domain(2, Shape::Box, 1.0, -0.25), UsageError);
}

TEST_CASE("construction rejects NaN and zeroes masked cells") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.25, 1.0);
  std::vector<double> v(d->cell_count(), 2.0);
  GridFunction u(d, v);
  for (std::size_t c = 0; c < u.size(); ++c) CHECK(u[c] == (d->masked(c) ? 0.0 : 2.0));
  v[5] = std::nan("");
  CHECK_THROWS(GridFunction(d, v));
}

TEST_CASE("integrate") {
  auto box = make_domain(2, Shape::Box, 1.0, 0.5);
  CHECK(integrate(GridFunction::sample(box, [](const Point&) { return 1.0; })) == doctest::Approx(4.0));
  CHECK(integrate(GridFunction(box)) == 0.0);

  auto ball = make_domain(2, Shape::Ball, 1.0, 0.05, 1.0);
  const double area = integrate(GridFunction::sample(ball, [](const Point&) { return 1.0; }));
  // Boundary cells: perimeter / h of them, each off by at most h^2.
  CHECK(std::abs(area - std::numbers::pi) <= 2 * std::numbers::pi * 1.0 * 0.05);
}

TEST_CASE("integrate is linear") {
  auto d = make_domain(2, Shape::Ball, 1.0, 1.0 / 16, 1.0);
  const GridFunction f = random_function(d, 1);
  const GridFunction g = random_function(d, 2);
  const double a = 1.7, b = -0.4;
  std::vector<double> combo(f.size());
  for (std::size_t c = 0; c < combo.size(); ++c) combo[c] = a * f[c] + b * g[c];
  const double lhs = integrate(GridFunction(d, combo));
  const double rhs = a * integrate(f) + b * integrate(g);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
}

TEST_CASE("gradient of a linear function") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.125);
  const int n = d->cells_per_axis();
  const GridFunction u = GridFunction::sample(d, [](const Point& x) { return x[0]; });
  const CellField g = gradient_magnitude(u);
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) CHECK(g[d->linear({i, j, 0})] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gradient of a constant counts boundary faces") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.25);
  const int n = d->cells_per_axis();
  const double c = 3.0, h = 0.25;
  const CellField g = gradient_magnitude(GridFunction::sample(d, [&](const Point&) { return c; }));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int faces = (i == n - 1) + (j == n - 1);
      CHECK(g[d->linear({i, j, 0})] == doctest::Approx(c / h * std::sqrt(faces)));
    }
  }
}

TEST_CASE("gradient matches an explicit loop") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.1);
  const GridFunction u = random_function(d, 9);
  const CellField g = gradient_magnitude(u);
  const auto ref = forward_gradient_2d(u);
  for (std::size_t c = 0; c < u.size(); ++c) CHECK(g[c] == doctest::Approx(ref[c]).epsilon(1e-14));
}

TEST_CASE("gradient sees zero on masked neighbours") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.1, 1.0);
  const GridFunction u = random_function(d, 4);
  const CellField g = gradient_magnitude(u);
  const int n = d->cells_per_axis();
  const double h = d->spacing();
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (d->masked(c)) continue;
    const Index ix = d->index(c);
    double s = 0.0;
    for (int a = 0; a < 2; ++a) {
      Index nb = ix;
      ++nb[a];
      const double next = (nb[a] < n && !d->masked(d->linear(nb))) ? u[d->linear(nb)] : 0.0;
      s += std::pow((next - u[c]) / h, 2);
    }
    CHECK(g[c] == doctest::Approx(std::sqrt(s)).epsilon(1e-14));
  }
}

TEST_CASE("lp norms") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.25);
  std::vector<double> ind(d->cell_count(), 0.0);
  for (int k = 0; k < 5; ++k) ind[static_cast<std::size_t>(3 * k + 1)] = 1.0;
  CHECK(lp_norm(GridFunction(d, ind), 1.0) == doctest::Approx(5 * 0.0625));

  const GridFunction u = random_function(d, 3);
  CHECK(lp_norm(u.scaled(2.5), 1.5) == doctest::Approx(2.5 * lp_norm(u, 1.5)).epsilon(1e-13));

  double brute = 0.0;
  for (std::size_t c = 0; c < u.size(); ++c) brute += std::pow(std::abs(u[c]), 1.5);
  CHECK(lp_norm(u, 1.5) == doctest::Approx(std::pow(brute * 0.0625, 1.0 / 1.5)).epsilon(1e-13));
  CHECK_THROWS_AS(lp_norm(u, 0.5), UsageError);
}

TEST_CASE("p = 2 corner energy is the edge-sum Dirichlet form") {
  auto d = make_domain(2, Shape::Ball, 1.0, 0.125, 1.0);
  const GridFunction u = random_function(d, 21);
  const int n = d->cells_per_axis();
  const auto at = [&](int i, int j) -> double {
    if (i < 0 || j < 0 || i >= n || j >= n) return 0.0;
    return u[d->linear({i, j, 0})];
  };
  // Each interior edge, including edges to the zero extension, once.
  double edges = 0.0;
  for (int i = -1; i < n; ++i) {
    for (int j = -1; j < n; ++j) {
      edges += std::pow(at(i + 1, j) - at(i, j), 2) + std::pow(at(i, j + 1) - at(i, j), 2);
    }
  }
  CHECK(dirichlet_energy(u, 2.0) == doctest::Approx(edges).epsilon(1e-12));
  CHECK(grad_lp_norm(u, 2.0) == doctest::Approx(std::sqrt(edges)).epsilon(1e-12));
}

TEST_CASE("results are bit-reproducible") {
  auto d = make_domain(3, Shape::Ball, 1.0, 0.125, 1.0);
  const GridFunction u = random_function(d, 5);
  CHECK(integrate(u) == integrate(GridFunction(d, std::vector<double>(u.values().begin(), u.values().end()))));
  CHECK(grad_lp_norm(u, 1.5) == grad_lp_norm(u, 1.5));
}

TEST_CASE("grid file round trip is bit-exact") {
  for (int dim : {2, 3}) {
    auto d = make_domain(dim, Shape::Ball, 1.0, 0.25, 0.9);
    const GridFunction u = random_function(d, 17);
    const auto bytes = encode_grid(u);
    CHECK(bytes.size() == 39 + 8 * u.size());
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "SYMF");
    const GridFunction back = decode_grid(bytes);
    CHECK(back.domain().same_lattice(u.domain()));
    CHECK(encode_grid(back) == bytes);
    for (std::size_t c = 0; c < u.size(); ++c) CHECK(back[c] == u[c]);
  }
}

TEST_CASE("corrupt grid files name the offset") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.5);
  auto bytes = encode_grid(GridFunction::sample(d, [](const Point& x) { return x[0] * x[0]; }));
  auto bad = bytes;
  bad[1] = 'X';
  try {
    decode_grid(bad);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("offset 0") != std::string::npos);
  }
  bad = bytes;
  bad.resize(bytes.size() - 3);
  CHECK_THROWS_AS(decode_grid(bad), IoError);
  bad = bytes;
  bad[4] = 9;
  CHECK_THROWS_AS(decode_grid(bad), IoError);
}

TEST_CASE("csv export") {
  auto d = make_domain(2, Shape::Box, 1.0, 0.5);
  std::ostringstream out;
  write_csv(GridFunction::sample(d, [](const Point& x) { return x[0] + 2 * x[1]; }), out);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
    ++rows;
  }
  CHECK(rows == 16);
  CHECK(out.str().find("3,0,0.75,-0.75,-0.75") != std::string::npos);
}
