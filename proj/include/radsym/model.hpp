#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "radsym/grid.hpp"

namespace radsym {

using Fn1 = std::function<double(double)>;
using Fn2 = std::function<double(double, double)>;

/// Gradient integrand j(s, t), t = |Du| >= 0, with its partials and the
/// envelopes of the growth conditions:
///   alpha0 t^p <= j(s,t) <= alpha(|s|) t^p,  |j_s| <= beta(|s|) t^p,
///   |j_t| <= gamma(|s|) t^(p-1).
struct IntegrandJ {
  Fn2 j, j_s, j_t, j_st;
  double p = 2.0;
  double alpha0 = 1.0;
  Fn1 alpha, beta, gamma;
};

/// Nonlinearity f(r, s) with s-antiderivative F(r, s), F(r, 0) = 0, and the
/// envelope |f(r,s)| <= a(r) + C |s|^(p*-1).
struct NonlinearityF {
  Fn2 f, F;
  Fn1 a;
  double C = 0.0;
};

/// Constraint density G with derivative g, G(0) = 0 and
/// |g(s)| <= C (|s|^(p-1) + |s|^(p*-1)).
struct ConstraintG {
  Fn1 g, G;
  double C = 0.0;
  /// Set when G(s) = |s|^q exactly; enables the closed-form projection.
  std::optional<double> power;
};

struct VariationalModel {
  std::string name;
  int dim = 2;
  IntegrandJ j;
  NonlinearityF f;
  ConstraintG g;
  double p() const { return j.p; }
};

/// Optional overrides applied on top of a preset.
struct ModelParams {
  std::optional<double> p;
  std::optional<double> sigma;
  std::optional<int> dim;
};

/// "plaplace", "quasilinear" or "eigen3d". Throws UsageError for other names.
VariationalModel preset(const std::string& name, const ModelParams& params = {});
std::vector<std::string> preset_names();

/// Np/(N-p); requires 1 < p < N.
double sobolev_exponent(double p, int dim);

/// Admissible range (p, p + p^2/N) for the power of F in pure power models.
std::pair<double, double> sigma_window(double p, int dim);

struct AuditCheck {
  std::string name;
  bool pass = true;
  /// Worst-case slack over the samples; negative means violated.
  double margin = 0.0;
  /// Variant conditions are reported but do not affect all_pass().
  bool required = true;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool all_pass() const;
  int failures() const;
  const AuditCheck* find(const std::string& name) const;
};

/// Checks the structural and growth conditions on sample points. s samples
/// are used with both signs; r samples default to a range inside [0, 10].
AuditReport validate_growth(const VariationalModel& model, std::span<const double> s_samples,
                            std::span<const double> t_samples,
                            std::span<const double> r_samples = {});

/// validate_growth with the sample sets used by the CLI and tests.
AuditReport validate_growth(const VariationalModel& model);

/// Plateau of height s0 around `center`, linear skirt down to 0, plateau
/// radius bisected until the discrete integral of G is 1 (to 1e-10).
GridFunction feasible_start(const VariationalModel& model, double s0, const DomainPtr& domain,
                            const Point& center = {0.0, 0.0, 0.0});

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
double adaptive_simpson(const Fn1& fn, double a, double b, double tol);

}  // namespace radsym
