#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace radsym {

enum class Shape : std::uint8_t { Box = 0, Ball = 1 };

using Index = std::array<int, 3>;
using Point = std::array<double, 3>;

/// Uniform cell-centred lattice on [-L, L]^N, optionally masked to the ball
/// B_R(0). Cell centres sit at -L + (i + 1/2) h, so the lattice is symmetric
/// about the origin and no cell is centred at 0.
///
/// The domain also carries a padded copy of the lattice (two ghost layers per
/// side) used by the corner stencils in the energy code. Ghost cells and
/// masked cells always read 0.
class GridDomain {
 public:
  GridDomain(int dim, Shape shape, double half_extent, double spacing, double radius);

  int dim() const { return dim_; }
  Shape shape() const { return shape_; }
  double spacing() const { return h_; }
  double half_extent() const { return L_; }
  /// Ball radius; equals the half extent for boxes.
  double radius() const { return R_; }
  int cells_per_axis() const { return n_; }
  std::size_t cell_count() const { return cell_count_; }
  std::size_t unmasked_count() const { return unmasked_count_; }
  double cell_volume() const { return cell_volume_; }

  bool masked(std::size_t cell) const { return mask_[cell] != 0; }
  Index index(std::size_t cell) const;
  std::size_t linear(const Index& idx) const;
  bool in_box(const Index& idx) const;
  double center(std::size_t cell, int axis) const;
  Point center(std::size_t cell) const;
  double center_radius(std::size_t cell) const { return radius_[cell]; }
  /// Coordinate of the lattice index i along any axis.
  double coordinate(int i) const { return 0.5 * h_ * (2 * i + 1 - n_); }
  std::size_t stride(int axis) const { return stride_[axis]; }

  // Padded lattice: every axis extended by two ghost cells on both sides.
  int padded_per_axis() const { return n_ + 4; }
  std::size_t padded_count() const { return padded_count_; }
  std::size_t padded_stride(int axis) const { return pstride_[axis]; }
  std::size_t padded_of(std::size_t cell) const { return padded_of_[cell]; }
  /// Padded cells whose one-sided stencils can touch an unmasked cell: the
  /// box plus one ghost layer. Energies are summed over these.
  std::span<const std::size_t> stencil_cells() const { return stencil_cells_; }
  /// Inverse of padded_of; -1 for ghost and masked cells.
  std::ptrdiff_t unknown_of_padded(std::size_t padded) const { return padded_to_cell_[padded]; }
  bool same_lattice(const GridDomain& other) const;

 private:
  int dim_;
  Shape shape_;
  double L_;
  double h_;
  double R_;
  int n_;
  std::size_t cell_count_ = 0;
  std::size_t unmasked_count_ = 0;
  double cell_volume_ = 0;
  std::array<std::size_t, 3> stride_{};
  std::vector<std::uint8_t> mask_;
  std::vector<double> radius_;
  std::size_t padded_count_ = 0;
  std::array<std::size_t, 3> pstride_{};
  std::vector<std::size_t> padded_of_;
  std::vector<std::ptrdiff_t> padded_to_cell_;
  std::vector<std::size_t> stencil_cells_;
};

using DomainPtr = std::shared_ptr<const GridDomain>;

/// Builds a validated domain. Ball domains need 0 < R <= L; L/h must be a
/// positive integer (to 1e-9 relative).
DomainPtr make_domain(int dim, Shape shape, double half_extent, double spacing,
                      double radius = 0.0);

/// Cell-centred scalar on a domain. Values are finite and masked cells hold
/// exactly 0. Immutable once constructed.
class GridFunction {
 public:
  explicit GridFunction(DomainPtr domain);
  GridFunction(DomainPtr domain, std::vector<double> values);

  template <class Fn>
  static GridFunction sample(DomainPtr domain, Fn&& fn) {
    std::vector<double> v(domain->cell_count(), 0.0);
    for (std::size_t c = 0; c < v.size(); ++c) {
      if (!domain->masked(c)) v[c] = fn(domain->center(c));
    }
    return GridFunction(std::move(domain), std::move(v));
  }

  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t cell) const { return values_[cell]; }
  std::span<const double> values() const { return values_; }
  double max() const;
  bool nonnegative() const;
  GridFunction scaled(double factor) const;

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

/// Derived per-cell quantity on the same lattice as its source function.
/// Unlike GridFunction, masked cells may hold values (e.g. a one-sided
/// difference reaching into the support); integrate() ignores them.
class CellField {
 public:
  CellField(DomainPtr domain, std::vector<double> values);
  const GridDomain& domain() const { return *domain_; }
  const DomainPtr& domain_ptr() const { return domain_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t cell) const { return values_[cell]; }
  std::span<const double> values() const { return values_; }

 private:
  DomainPtr domain_;
  std::vector<double> values_;
};

/// Order-fixed Neumaier-compensated sum.
double compensated_sum(std::span<const double> values);

/// Midpoint rule: h^N times the sum over unmasked cells.
double integrate(const CellField& field);
double integrate(const GridFunction& u);

/// Integral of fn(|x|, u(x)) over unmasked cells.
double integrate_composite(const GridFunction& u,
                           const std::function<double(double r, double s)>& fn);

/// Forward-difference gradient magnitude, zero extension outside the support.
CellField gradient_magnitude(const GridFunction& u);

/// One-sided gradient magnitude for the stencil orientation encoded by bits
/// of `orientation` (bit d set = backward difference along axis d).
CellField gradient_magnitude(const GridFunction& u, unsigned orientation);

double lp_norm(const GridFunction& u, double p);

/// Discrete L^p norm of Du. The p-th power is the average over all 2^N
/// one-sided corner stencils of h^N sum |D^s u|^p, summed over the box plus a
/// ghost layer so that boundary jumps into the zero extension are counted.
double grad_lp_norm(const GridFunction& u, double p);

/// grad_lp_norm(u, p)^p without the final root.
double dirichlet_energy(const GridFunction& u, double p);

}  // namespace radsym
