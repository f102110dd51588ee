#include "radsym/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "radsym/error.hpp"
#include "stencil.hpp"

namespace radsym {

GridDomain::GridDomain(int dim, Shape shape, double half_extent, double spacing, double radius)
    : dim_(dim), shape_(shape), L_(half_extent), h_(spacing), R_(radius) {
  if (dim != 2 && dim != 3) throw UsageError("dimension must be 2 or 3");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw UsageError("spacing h must be positive");
  if (!(half_extent > 0.0) || !std::isfinite(half_extent))
    throw UsageError("half extent L must be positive");
  const double ratio = half_extent / spacing;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    std::ostringstream msg;
    msg << "L/h = " << ratio << " is not a positive integer";
    throw UsageError(msg.str());
  }
  if (shape == Shape::Ball) {
    if (!(radius > 0.0)) throw UsageError("ball radius must be positive");
    if (radius > half_extent * (1.0 + 1e-12)) throw UsageError("ball radius exceeds half extent");
  } else {
    R_ = half_extent;
  }

  n_ = 2 * static_cast<int>(rounded);
  cell_count_ = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = cell_count_;
    cell_count_ *= static_cast<std::size_t>(n_);
  }
  cell_volume_ = std::pow(h_, dim_);

  mask_.assign(cell_count_, 0);
  radius_.assign(cell_count_, 0.0);
  for (std::size_t c = 0; c < cell_count_; ++c) {
    // Integer doubled coordinates keep equal radii bit-identical.
    const Index idx = index(c);
    long long s2 = 0;
    for (int a = 0; a < dim_; ++a) {
      const long long X = 2LL * idx[a] + 1 - n_;
      s2 += X * X;
    }
    radius_[c] = 0.5 * h_ * std::sqrt(static_cast<double>(s2));
    if (shape_ == Shape::Ball && radius_[c] > R_) mask_[c] = 1;
  }
  unmasked_count_ = static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 0));

  const int P = n_ + 4;
  padded_count_ = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    pstride_[a] = padded_count_;
    padded_count_ *= static_cast<std::size_t>(P);
  }
  padded_of_.resize(cell_count_);
  padded_to_cell_.assign(padded_count_, -1);
  for (std::size_t c = 0; c < cell_count_; ++c) {
    const Index idx = index(c);
    std::size_t pc = 0;
    for (int a = 0; a < dim_; ++a) pc += static_cast<std::size_t>(idx[a] + 2) * pstride_[a];
    padded_of_[c] = pc;
    if (!mask_[c]) padded_to_cell_[pc] = static_cast<std::ptrdiff_t>(c);
  }

  // Stencil cells: padded coordinates in [1, n+2] that are unmasked box cells
  // or face-adjacent to one.
  std::vector<std::uint8_t> keep(padded_count_, 0);
  for (std::size_t c = 0; c < cell_count_; ++c) {
    if (mask_[c]) continue;
    const std::size_t pc = padded_of_[c];
    keep[pc] = 1;
    for (int a = 0; a < dim_; ++a) {
      keep[pc + pstride_[a]] = 1;
      keep[pc - pstride_[a]] = 1;
    }
  }
  for (std::size_t pc = 0; pc < padded_count_; ++pc) {
    if (keep[pc]) stencil_cells_.push_back(pc);
  }
}

Index GridDomain::index(std::size_t cell) const {
  Index idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>((cell / stride_[a]) % static_cast<std::size_t>(n_));
  }
  return idx;
}

std::size_t GridDomain::linear(const Index& idx) const {
  std::size_t c = 0;
  for (int a = 0; a < dim_; ++a) c += static_cast<std::size_t>(idx[a]) * stride_[a];
  return c;
}

bool GridDomain::in_box(const Index& idx) const {
  for (int a = 0; a < dim_; ++a) {
    if (idx[a] < 0 || idx[a] >= n_) return false;
  }
  return true;
}

double GridDomain::center(std::size_t cell, int axis) const {
  const int i = static_cast<int>((cell / stride_[axis]) % static_cast<std::size_t>(n_));
  return coordinate(i);
}

Point GridDomain::center(std::size_t cell) const {
  Point x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[a] = center(cell, a);
  return x;
}

bool GridDomain::same_lattice(const GridDomain& o) const {
  return dim_ == o.dim_ && shape_ == o.shape_ && n_ == o.n_ && h_ == o.h_ && L_ == o.L_ &&
         R_ == o.R_;
}

DomainPtr make_domain(int dim, Shape shape, double half_extent, double spacing, double radius) {
  return std::make_shared<const GridDomain>(dim, shape, half_extent, spacing, radius);
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(DomainPtr domain)
    : domain_(std::move(domain)), values_(domain_->cell_count(), 0.0) {}

GridFunction::GridFunction(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (!domain_) throw UsageError("grid function needs a domain");
  if (values_.size() != domain_->cell_count()) {
    std::ostringstream msg;
    msg << "grid function has " << values_.size() << " values, domain has "
        << domain_->cell_count() << " cells";
    throw UsageError(msg.str());
  }
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (!std::isfinite(values_[c])) {
      std::ostringstream msg;
      msg << "non-finite value at cell " << c;
      throw UsageError(msg.str());
    }
    if (domain_->masked(c)) values_[c] = 0.0;
  }
}

double GridFunction::max() const {
  double m = 0.0;
  bool first = true;
  for (std::size_t c = 0; c < values_.size(); ++c) {
    if (domain_->masked(c)) continue;
    if (first || values_[c] > m) m = values_[c];
    first = false;
  }
  return m;
}

bool GridFunction::nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return v >= 0.0; });
}

GridFunction GridFunction::scaled(double factor) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= factor;
  return GridFunction(domain_, std::move(v));
}

CellField::CellField(DomainPtr domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
  if (values_.size() != domain_->cell_count()) throw UsageError("cell field size mismatch");
}

// ---------------------------------------------------------------------------

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

namespace {

double masked_integral(const GridDomain& d, std::span<const double> values) {
  std::vector<double> terms;
  terms.reserve(d.unmasked_count());
  for (std::size_t c = 0; c < values.size(); ++c) {
    if (!d.masked(c)) terms.push_back(values[c]);
  }
  return d.cell_volume() * compensated_sum(terms);
}

}  // namespace

double integrate(const CellField& field) { return masked_integral(field.domain(), field.values()); }

double integrate(const GridFunction& u) { return masked_integral(u.domain(), u.values()); }

double integrate_composite(const GridFunction& u,
                           const std::function<double(double, double)>& fn) {
  const GridDomain& d = u.domain();
  std::vector<double> terms;
  terms.reserve(d.unmasked_count());
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!d.masked(c)) terms.push_back(fn(d.center_radius(c), u[c]));
  }
  return d.cell_volume() * compensated_sum(terms);
}

CellField gradient_magnitude(const GridFunction& u, unsigned orientation) {
  const GridDomain& d = u.domain();
  if (orientation >= detail::orientation_count(d.dim()))
    throw UsageError("stencil orientation out of range");
  const std::vector<double> U = detail::padded_values(u);
  std::vector<double> out(d.cell_count(), 0.0);
  const double inv_h = 1.0 / d.spacing();
  for (std::size_t c = 0; c < d.cell_count(); ++c) {
    const std::size_t pc = d.padded_of(c);
    double t2 = 0.0;
    for (int a = 0; a < d.dim(); ++a) {
      const double diff = (U[detail::corner_neighbor(d, pc, orientation, a)] - U[pc]) * inv_h;
      t2 += diff * diff;
    }
    out[c] = std::sqrt(t2);
  }
  return CellField(u.domain_ptr(), std::move(out));
}

CellField gradient_magnitude(const GridFunction& u) { return gradient_magnitude(u, 0u); }

double lp_norm(const GridFunction& u, double p) {
  if (!(p >= 1.0)) throw UsageError("lp_norm requires p >= 1");
  const GridDomain& d = u.domain();
  std::vector<double> terms;
  terms.reserve(d.unmasked_count());
  for (std::size_t c = 0; c < u.size(); ++c) {
    if (!d.masked(c)) terms.push_back(std::pow(std::abs(u[c]), p));
  }
  return std::pow(d.cell_volume() * compensated_sum(terms), 1.0 / p);
}

double dirichlet_energy(const GridFunction& u, double p) {
  if (!(p >= 1.0)) throw UsageError("grad_lp_norm requires p >= 1");
  const GridDomain& d = u.domain();
  const std::vector<double> U = detail::padded_values(u);
  std::vector<double> terms;
  terms.reserve(d.stencil_cells().size() * detail::orientation_count(d.dim()));
  detail::for_each_corner(d, U, [&](std::size_t, unsigned, const double*, double t) {
    terms.push_back(std::pow(t, p));
  });
  return d.cell_volume() / detail::orientation_count(d.dim()) * compensated_sum(terms);
}

double grad_lp_norm(const GridFunction& u, double p) {
  return std::pow(dirichlet_energy(u, p), 1.0 / p);
}

}  // namespace radsym
