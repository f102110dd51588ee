#pragma once

// Corner-stencil helpers shared by grid.cpp, energy.cpp and optimize.cpp.
// A "corner" is a base cell plus one neighbour per axis, on the side given by
// the orientation bits. Averaging over all 2^N orientations keeps the discrete
// energies invariant under every lattice reflection.

#include <cmath>
#include <vector>

#include "radsym/grid.hpp"

namespace radsym::detail {

inline std::vector<double> padded_values(const GridFunction& u) {
  const GridDomain& d = u.domain();
  std::vector<double> out(d.padded_count(), 0.0);
  for (std::size_t c = 0; c < u.size(); ++c) out[d.padded_of(c)] = u[c];
  return out;
}

inline int orientation_sign(unsigned orientation, int axis) {
  return ((orientation >> axis) & 1u) ? -1 : 1;
}

inline unsigned orientation_count(int dim) { return 1u << dim; }

/// Calls fn(padded_cell, orientation, D, t) for every corner of every stencil
/// cell, where D[d] is the signed one-sided difference quotient along axis d
/// and t = |D|.
template <class Fn>
void for_each_corner(const GridDomain& dom, const std::vector<double>& U, Fn&& fn) {
  const int N = dom.dim();
  const double inv_h = 1.0 / dom.spacing();
  const unsigned orients = orientation_count(N);
  double D[3] = {0.0, 0.0, 0.0};
  for (std::size_t pc : dom.stencil_cells()) {
    const double base = U[pc];
    for (unsigned s = 0; s < orients; ++s) {
      double t2 = 0.0;
      for (int a = 0; a < N; ++a) {
        const int sign = orientation_sign(s, a);
        const std::size_t nb = sign > 0 ? pc + dom.padded_stride(a) : pc - dom.padded_stride(a);
        D[a] = sign * (U[nb] - base) * inv_h;
        t2 += D[a] * D[a];
      }
      fn(pc, s, D, std::sqrt(t2));
    }
  }
}

inline std::size_t corner_neighbor(const GridDomain& dom, std::size_t pc, unsigned s, int axis) {
  return orientation_sign(s, axis) > 0 ? pc + dom.padded_stride(axis)
                                        : pc - dom.padded_stride(axis);
}

}  // namespace radsym::detail
