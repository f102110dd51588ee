#pragma once

#include <cstdint>
#include <vector>

#include "radsym/grid.hpp"
#include "radsym/model.hpp"

namespace radsym {

/// H(s/k): 1 on |s| <= k, 0 on |s| >= 2k, smootherstep in between
/// (max slope 15/8 per unit of s/k). Requires k >= 1.
double cutoff(double s, double k);
double cutoff_derivative(double s, double k);

struct EnergyBreakdown {
  double J = 0.0;
  double Fterm = 0.0;
  double E = 0.0;
  double W = 0.0;
};

/// J is the corner-averaged discrete integral
///   h^N 2^-N sum_corners j(u(c), |D^s u(c)|),
/// Fterm and W are midpoint sums over unmasked cells.
EnergyBreakdown energy(const GridFunction& u, const VariationalModel& model);

/// The J part alone (used by audits that do not need F or G).
double gradient_energy(const GridFunction& u, const VariationalModel& model);

/// Exact partial derivatives dE/du_c of the discrete energy (so they carry
/// the h^N factor); 0 on masked cells. Corners with |D^s u| = 0 contribute no
/// j_t term.
CellField energy_gradient(const GridFunction& u, const VariationalModel& model);

/// dW/du_c = h^N g(u_c).
CellField constraint_gradient(const GridFunction& u, const VariationalModel& model);

/// Euclidean pairing sum_c a_c b_c over unmasked cells.
double pairing(std::span<const double> a, std::span<const double> b, const GridDomain& domain);

/// phi = H(u/k) v with v a compactly supported bump.
struct TestFunction {
  GridFunction base;
  double k = 1.0;
  GridFunction realize(const GridFunction& u) const;
};

/// Bumps (1 - d^2/rho^2)^3_+ centred at random cells where u > 5% of max(u),
/// radii proportional to the support radius, cutoff level max(1, max u).
std::vector<TestFunction> make_test_bank(const GridFunction& u, int count, std::uint64_t seed);

/// (||phi||_p^p + ||D phi||_p^p)^(1/p) with the same corner stencil as J.
double w1p_norm(const GridFunction& phi, double p);

struct LambdaEstimate {
  double lambda = 0.0;
  std::vector<double> A;
  std::vector<double> B;
  /// A/B for each usable test; NaN where |B| <= eps_den.
  std::vector<double> per_test;
  double spread_cv = 0.0;
  int usable = 0;
  double eps_den = 0.0;
};

/// Least-squares multiplier sum A B / sum B^2 over tests with |B| > eps_den,
/// eps_den = 1e-8 ||g(u)||_1 ||phi||_inf. Throws InvariantError if none qualify.
LambdaEstimate estimate_lambda(const GridFunction& u, const VariationalModel& model,
                               const std::vector<TestFunction>& tests);

struct ELReport {
  double lambda = 0.0;
  std::vector<double> A;
  std::vector<double> B;
  std::vector<double> residual;
  std::vector<double> phi_norm;
  std::vector<double> normalized;
  double normalized_max = 0.0;
};

/// r(phi) = A(phi) - lambda B(phi) with A(phi) = <dE/du, phi> and
/// B(phi) = <dW/du, phi>.
ELReport el_residual(const GridFunction& u, double lambda, const VariationalModel& model,
                     const std::vector<TestFunction>& tests);

/// Measure of cells with forward |Du*| < eps_grad and eps_val < u* < max - eps_val.
double critical_set_measure(const GridFunction& u_star, double eps_grad, double eps_val);

}  // namespace radsym
