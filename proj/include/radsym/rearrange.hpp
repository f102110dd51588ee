#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radsym/grid.hpp"
#include "radsym/model.hpp"

namespace radsym {

/// Closed half-space {x : a.x <= b} with |a| = 1 and b > 0, so the origin is
/// strictly inside. reflect() mirrors across the boundary hyperplane.
class Polarizer {
 public:
  Polarizer(int dim, const Point& normal, double offset);
  int dim() const { return dim_; }
  const Point& normal() const { return a_; }
  double offset() const { return b_; }
  double side(const Point& x) const;  // a.x - b
  bool contains(const Point& x) const { return side(x) <= 0.0; }
  Point reflect(const Point& x) const;

 private:
  int dim_;
  Point a_;
  double b_;
};

/// Lattice-preserving polarizer. Axis kind: a = sign e_axis, b = m h.
/// Diagonal kind (2D only): a = sign (1, +-1)/sqrt2 with the second component
/// +1 for diag 0 and -1 for diag 1, b = m h / sqrt2.
struct GridExactPolarizer {
  enum class Kind { Axis, Diag };
  Kind kind = Kind::Axis;
  int direction = 0;  // axis index, or diag index 0/1
  int sign = 1;
  int offset_cells = 1;

  Polarizer to_polarizer(const GridDomain& domain) const;
  /// Throws UsageError if this polarizer is not valid on the domain.
  void validate(const GridDomain& domain) const;
  std::string describe() const;
  bool operator==(const GridExactPolarizer&) const = default;
};

/// Recognizes a general polarizer that happens to be lattice-preserving.
std::optional<GridExactPolarizer> as_grid_exact(const Polarizer& p, const GridDomain& domain);

struct PolarizerSequence {
  std::uint64_t seed = 0;
  std::vector<GridExactPolarizer> items;
};

nlohmann::json to_json(const PolarizerSequence& seq);
PolarizerSequence sequence_from_json(const nlohmann::json& j);

/// Sort-and-assign rearrangement: values in descending order go to unmasked
/// cells ordered by center radius, ties by linear index. Throws
/// InvariantError on negative values.
GridFunction schwarz_symmetrize(const GridFunction& u);

/// Unmasked cells in the order used by schwarz_symmetrize.
std::vector<std::size_t> radial_order(const GridDomain& domain);

/// Two-point rearrangement: max on H, min on the complement, pairing a cell
/// whose mirror leaves the box (or ball) with the zero extension.
GridFunction polarize(const GridFunction& u, const GridExactPolarizer& P);

/// Same rule for any polarizer, reading u at the mirror point by multilinear
/// interpolation (zero outside). Mirror points within 1e-9 h of a cell centre
/// snap to it, so grid-exact inputs reproduce polarize() exactly.
GridFunction polarize_general(const GridFunction& u, const Polarizer& P);

/// hN * #{unmasked cells : u > t}.
double distribution_function(const GridFunction& u, double t);

/// Directions drawn uniformly from the 2N axis directions (plus 4 diagonal
/// ones in 2D), offsets uniformly from 1..max_offset_cells. A cap of 0 picks
/// max(1, (L/h)/4), clipped so that the plane crosses the box.
PolarizerSequence sample_polarizers(const GridDomain& domain, std::uint64_t seed, int count,
                                    int max_offset_cells = 0);

struct PolarizationStep {
  int step = 0;
  double distance = 0.0;  // ||u_n - u*||_p
  double W = 0.0;
  double grad_p = 0.0;    // grad_lp_norm(u_n, p)^p
  double J = 0.0;         // only with a model
};

struct PolarizationRun {
  GridFunction u;
  std::vector<PolarizationStep> history;
};

/// Applies seq.items cyclically for up to n_max steps, stopping early once
/// ||u_n - u*||_p <= target_tol ||u||_p. Without a model, W = int |u|^p.
PolarizationRun iterate_polarizations(const GridFunction& u, const PolarizerSequence& seq,
                                      int n_max, double target_tol,
                                      const VariationalModel* model = nullptr, double p = 2.0);

}  // namespace radsym
