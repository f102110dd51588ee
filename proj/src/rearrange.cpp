#include "radsym/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "radsym/energy.hpp"
#include "radsym/error.hpp"

namespace radsym {

Polarizer::Polarizer(int dim, const Point& normal, double offset) : dim_(dim), a_{0, 0, 0}, b_(offset) {
  if (dim != 2 && dim != 3) throw UsageError("polarizer dimension must be 2 or 3");
  double n2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    a_[k] = normal[k];
    n2 += normal[k] * normal[k];
  }
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-14) throw UsageError("polarizer normal must be a unit vector");
  if (!(offset > 0.0) || !std::isfinite(offset))
    throw UsageError("polarizer offset must be positive (origin strictly inside)");
}

double Polarizer::side(const Point& x) const {
  double s = 0.0;
  for (int k = 0; k < dim_; ++k) s += a_[k] * x[k];
  return s - b_;
}

Point Polarizer::reflect(const Point& x) const {
  const double s = side(x);
  Point y{0, 0, 0};
  for (int k = 0; k < dim_; ++k) y[k] = x[k] - 2.0 * s * a_[k];
  return y;
}

void GridExactPolarizer::validate(const GridDomain& d) const {
  std::ostringstream why;
  if (sign != 1 && sign != -1) why << "sign must be +1 or -1";
  else if (offset_cells < 1) why << "offset_cells must be >= 1";
  else if (kind == Kind::Axis && (direction < 0 || direction >= d.dim()))
    why << "axis " << direction << " out of range";
  else if (kind == Kind::Diag && d.dim() != 2) why << "diagonal polarizers exist only in 2D";
  else if (kind == Kind::Diag && (direction < 0 || direction > 1)) why << "diag must be 0 or 1";
  if (!why.str().empty()) throw UsageError("polarizer " + describe() + ": " + why.str());
}

Polarizer GridExactPolarizer::to_polarizer(const GridDomain& d) const {
  validate(d);
  Point a{0, 0, 0};
  if (kind == Kind::Axis) {
    a[direction] = sign;
    return Polarizer(d.dim(), a, offset_cells * d.spacing());
  }
  const double r = std::numbers::sqrt2 / 2.0;
  a[0] = sign * r;
  a[1] = sign * (direction == 0 ? r : -r);
  return Polarizer(d.dim(), a, offset_cells * d.spacing() / std::numbers::sqrt2);
}

std::string GridExactPolarizer::describe() const {
  std::ostringstream o;
  o << "{" << (kind == Kind::Axis ? "axis" : "diag") << "=" << direction << ", sign=" << sign
    << ", offset_cells=" << offset_cells << "}";
  return o.str();
}

std::optional<GridExactPolarizer> as_grid_exact(const Polarizer& p, const GridDomain& d) {
  if (p.dim() != d.dim()) return std::nullopt;
  const auto near_int = [](double v) -> std::optional<int> {
    const double r = std::round(v);
    if (r >= 1.0 && std::abs(v - r) <= 1e-9 * std::max(1.0, r)) return static_cast<int>(r);
    return std::nullopt;
  };
  const Point& a = p.normal();
  for (int axis = 0; axis < d.dim(); ++axis) {
    for (int sign : {1, -1}) {
      bool match = true;
      for (int k = 0; k < d.dim(); ++k) {
        if (std::abs(a[k] - (k == axis ? sign : 0)) > 1e-12) match = false;
      }
      if (match) {
        if (auto m = near_int(p.offset() / d.spacing())) {
          return GridExactPolarizer{GridExactPolarizer::Kind::Axis, axis, sign, *m};
        }
        return std::nullopt;
      }
    }
  }
  if (d.dim() == 2) {
    const double r = std::numbers::sqrt2 / 2.0;
    for (int diag : {0, 1}) {
      for (int sign : {1, -1}) {
        if (std::abs(a[0] - sign * r) <= 1e-12 &&
            std::abs(a[1] - sign * (diag == 0 ? r : -r)) <= 1e-12) {
          if (auto m = near_int(p.offset() * std::numbers::sqrt2 / d.spacing())) {
            return GridExactPolarizer{GridExactPolarizer::Kind::Diag, diag, sign, *m};
          }
          return std::nullopt;
        }
      }
    }
  }
  return std::nullopt;
}

nlohmann::json to_json(const PolarizerSequence& seq) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& p : seq.items) {
    nlohmann::json it;
    it[p.kind == GridExactPolarizer::Kind::Axis ? "axis" : "diag"] = p.direction;
    it["offset_cells"] = p.offset_cells;
    it["sign"] = p.sign;
    items.push_back(it);
  }
  return {{"seed", seq.seed}, {"items", items}};
}

PolarizerSequence sequence_from_json(const nlohmann::json& j) {
  try {
    PolarizerSequence seq;
    for (const auto& [key, _] : j.items()) {
      if (key != "seed" && key != "items") throw UsageError("polarizer sequence: unknown key '" + key + "'");
    }
    seq.seed = j.value("seed", std::uint64_t{0});
    for (const auto& it : j.at("items")) {
      GridExactPolarizer p;
      for (const auto& [key, _] : it.items()) {
        if (key != "axis" && key != "diag" && key != "offset_cells" && key != "sign")
          throw UsageError("polarizer item: unknown key '" + key + "'");
      }
      if (it.contains("axis") == it.contains("diag"))
        throw UsageError("polarizer item needs exactly one of 'axis' or 'diag'");
      p.kind = it.contains("axis") ? GridExactPolarizer::Kind::Axis : GridExactPolarizer::Kind::Diag;
      p.direction = it.contains("axis") ? it.at("axis").get<int>() : it.at("diag").get<int>();
      p.offset_cells = it.at("offset_cells").get<int>();
      p.sign = it.at("sign").get<int>();
      seq.items.push_back(p);
    }
    return seq;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("polarizer sequence: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

namespace {

void require_nonnegative(const GridFunction& u, const char* op) {
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (u[c] < 0.0) {
      std::ostringstream msg;
      msg << op << ": negative value " << u[c] << " at cell " << c;
      throw InvariantError(msg.str());
    }
  }
}

// Twice the cell-centre coordinate in units of h: 2i + 1 - n (always odd).
int doubled(int i, int n) { return 2 * i + 1 - n; }

}  // namespace

std::vector<std::size_t> radial_order(const GridDomain& d) {
  std::vector<std::size_t> cells;
  cells.reserve(d.unmasked_count());
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    if (!d.masked(c)) cells.push_back(c);
  }
  std::stable_sort(cells.begin(), cells.end(), [&](std::size_t x, std::size_t y) {
    return d.center_radius(x) < d.center_radius(y);
  });
  return cells;
}

GridFunction schwarz_symmetrize(const GridFunction& u) {
  require_nonnegative(u, "schwarz_symmetrize");
  const GridDomain& d = u.domain();
  const std::vector<std::size_t> order = radial_order(d);
  std::vector<double> vals;
  vals.reserve(order.size());
  for (std::size_t c : order) vals.push_back(u[c]);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  std::vector<double> out(u.size(), 0.0);
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = vals[k];
  return GridFunction(u.domain_ptr(), std::move(out));
}

GridFunction polarize(const GridFunction& u, const GridExactPolarizer& P) {
  require_nonnegative(u, "polarize");
  const GridDomain& d = u.domain();
  P.validate(d);
  const int n = d.cells_per_axis();
  const int m = P.offset_cells;
  std::vector<double> out(u.values().begin(), u.values().end());

  // Returns the signed distance to the plane in units that make D integer
  // (negative inside H) and writes the mirror index.
  const auto mirror = [&](const Index& idx, Index& mir) {
    mir = idx;
    if (P.kind == GridExactPolarizer::Kind::Axis) {
      const int X = doubled(idx[P.direction], n);
      mir[P.direction] = 2 * P.sign * m + n - 1 - idx[P.direction];
      return P.sign * X - 2 * m;  // never 0: X is odd
    }
    const int sigma = P.direction == 0 ? 1 : -1;
    const int D = P.sign * (doubled(idx[0], n) + sigma * doubled(idx[1], n)) / 2 - m;
    mir[0] = idx[0] - D * P.sign;
    mir[1] = idx[1] - D * P.sign * sigma;
    return D;
  };

  Index mir{};
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (d.masked(c)) continue;
    const int D = mirror(d.index(c), mir);
    if (D == 0) continue;
    const bool partner = d.in_box(mir) && !d.masked(d.linear(mir));
    if (D < 0) {
      if (partner) {
        const std::size_t cm = d.linear(mir);
        out[c] = std::max(u[c], u[cm]);
        out[cm] = std::min(u[c], u[cm]);
      }
    } else if (!partner) {
      out[c] = std::min(u[c], 0.0);
    }
  }
  return GridFunction(u.domain_ptr(), std::move(out));
}

GridFunction polarize_general(const GridFunction& u, const Polarizer& P) {
  require_nonnegative(u, "polarize_general");
  const GridDomain& d = u.domain();
  if (P.dim() != d.dim()) throw UsageError("polarizer dimension does not match the grid");
  const int n = d.cells_per_axis();
  const int N = d.dim();
  const double L = d.half_extent();
  const double h = d.spacing();

  const auto read = [&](const Index& idx) {
    if (!d.in_box(idx)) return 0.0;
    const std::size_t c = d.linear(idx);
    return d.masked(c) ? 0.0 : u[c];
  };
  const auto interpolate = [&](const Point& x) {
    Index base{0, 0, 0};
    double frac[3] = {0, 0, 0};
    bool split[3] = {false, false, false};
    for (int a = 0; a < N; ++a) {
      const double xi = (x[a] + L) / h - 0.5;
      const double r = std::round(xi);
      if (std::abs(xi - r) <= 1e-9) {
        base[a] = static_cast<int>(r);
      } else {
        const double f = std::floor(xi);
        base[a] = static_cast<int>(f);
        frac[a] = xi - f;
        split[a] = true;
      }
      if (base[a] < -2 || base[a] > n + 1) return 0.0;
    }
    double acc = 0.0;
    for (unsigned corner = 0; corner < (1u << N); ++corner) {
      double w = 1.0;
      Index idx = base;
      bool skip = false;
      for (int a = 0; a < N; ++a) {
        const bool up = (corner >> a) & 1u;
        if (!split[a]) {
          if (up) skip = true;
          continue;
        }
        w *= up ? frac[a] : 1.0 - frac[a];
        idx[a] += up ? 1 : 0;
      }
      if (!skip && w != 0.0) acc += w * read(idx);
    }
    return acc;
  };

  std::vector<double> out(u.size(), 0.0);
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (d.masked(c)) continue;
    const Point x = d.center(c);
    const double v = interpolate(P.reflect(x));
    out[c] = P.contains(x) ? std::max(u[c], v) : std::min(u[c], v);
  }
  return GridFunction(u.domain_ptr(), std::move(out));
}

double distribution_function(const GridFunction& u, double t) {
  const GridDomain& d = u.domain();
  std::size_t count = 0;
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!d.masked(c) && u[c] > t) ++count;
  }
  return d.cell_volume() * static_cast<double>(count);
}

PolarizerSequence sample_polarizers(const GridDomain& d, std::uint64_t seed, int count,
                                    int max_offset_cells) {
  if (count < 1) throw UsageError("polarizer count must be >= 1");
  const int n_half = d.cells_per_axis() / 2;
  const int limit = n_half - 1;  // plane must cross the box
  int cap = max_offset_cells > 0 ? max_offset_cells : std::max(1, n_half / 4);
  cap = std::min(cap, limit);
  if (cap < 1) throw UsageError("domain too small: no admissible polarizer offsets");

  std::vector<GridExactPolarizer> dirs;
  for (int a = 0; a < d.dim(); ++a) {
    for (int s : {1, -1}) dirs.push_back({GridExactPolarizer::Kind::Axis, a, s, 1});
  }
  if (d.dim() == 2) {
    for (int diag : {0, 1}) {
      for (int s : {1, -1}) dirs.push_back({GridExactPolarizer::Kind::Diag, diag, s, 1});
    }
  }
  std::mt19937_64 rng(seed);
  PolarizerSequence seq;
  seq.seed = seed;
  for (int k = 0; k < count; ++k) {
    GridExactPolarizer p = dirs[rng() % dirs.size()];
    p.offset_cells = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(cap));
    seq.items.push_back(p);
  }
  return seq;
}

PolarizationRun iterate_polarizations(const GridFunction& u, const PolarizerSequence& seq,
                                      int n_max, double target_tol, const VariationalModel* model,
                                      double p) {
  require_nonnegative(u, "iterate_polarizations");
  if (n_max > 0 && seq.items.empty()) throw UsageError("empty polarizer sequence");
  if (model) p = model->p();
  const GridFunction u_star = schwarz_symmetrize(u);
  const double norm_u = lp_norm(u, p);
  const auto row = [&](int step, const GridFunction& v) {
    std::vector<double> diff(v.size());
    for (std::size_t c = 0; c < v.size(); ++c) diff[c] = v[c] - u_star[c];
    PolarizationStep r;
    r.step = step;
    r.distance = lp_norm(GridFunction(v.domain_ptr(), std::move(diff)), p);
    r.W = model ? integrate_composite(v, [&](double, double s) { return model->g.G(s); })
                : std::pow(lp_norm(v, p), p);
    r.grad_p = dirichlet_energy(v, p);
    r.J = model ? gradient_energy(v, *model) : 0.0;
    return r;
  };
  PolarizationRun run{u, {}};
  run.history.push_back(row(0, run.u));
  for (int k = 1; k <= n_max; ++k) {
    if (run.history.back().distance <= target_tol * norm_u) break;
    run.u = polarize(run.u, seq.items[static_cast<std::size_t>(k - 1) % seq.items.size()]);
    run.history.push_back(row(k, run.u));
  }
  return run;
}

}  // namespace radsym
