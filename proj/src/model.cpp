#include "radsym/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "radsym/error.hpp"

namespace radsym {

double sobolev_exponent(double p, int dim) {
  if (!(p > 1.0) || !(p < dim)) {
    std::ostringstream msg;
    msg << "need 1 < p < N, got p = " << p << ", N = " << dim;
    throw UsageError(msg.str());
  }
  return dim * p / (dim - p);
}

std::pair<double, double> sigma_window(double p, int dim) {
  sobolev_exponent(p, dim);
  return {p, p + p * p / dim};
}

namespace {

double pos_pow(double s, double q) { return s > 0.0 ? std::pow(s, q) : 0.0; }

double abs_pow(double s, double q) { return std::pow(std::abs(s), q); }

IntegrandJ power_integrand(double p) {
  IntegrandJ j;
  j.p = p;
  j.j = [p](double, double t) { return std::pow(t, p); };
  j.j_s = [](double, double) { return 0.0; };
  j.j_t = [p](double, double t) { return t > 0.0 ? p * std::pow(t, p - 1.0) : 0.0; };
  j.j_st = [](double, double) { return 0.0; };
  j.alpha0 = 1.0;
  j.alpha = [](double) { return 1.0; };
  j.beta = [](double) { return 0.0; };
  j.gamma = [p](double) { return p; };
  return j;
}

// (1 + s^2/(1+s^2)) t^p: the coefficient lies in [1, 2) and its s-derivative
// 2s/(1+s^2)^2 peaks at 3*sqrt(3)/8 ~ 0.6495.
IntegrandJ quasilinear_integrand(double p) {
  IntegrandJ j;
  j.p = p;
  const auto coef = [](double s) { return 1.0 + s * s / (1.0 + s * s); };
  const auto dcoef = [](double s) {
    const double q = 1.0 + s * s;
    return 2.0 * s / (q * q);
  };
  j.j = [p, coef](double s, double t) { return coef(s) * std::pow(t, p); };
  j.j_s = [p, dcoef](double s, double t) { return dcoef(s) * std::pow(t, p); };
  j.j_t = [p, coef](double s, double t) {
    return t > 0.0 ? p * coef(s) * std::pow(t, p - 1.0) : 0.0;
  };
  j.j_st = [p, dcoef](double s, double t) {
    return t > 0.0 ? p * dcoef(s) * std::pow(t, p - 1.0) : 0.0;
  };
  j.alpha0 = 1.0;
  j.alpha = [](double) { return 2.0; };
  j.beta = [](double) { return 0.65; };
  j.gamma = [p](double) { return 2.0 * p; };
  return j;
}

// F(r, s) = e^{-r} s_+^sigma. For s <= 1, f <= sigma e^{-r}; beyond, s^(sigma-1)
// is dominated by s^(p*-1) because sigma < p*.
NonlinearityF decaying_power(double sigma) {
  NonlinearityF f;
  f.F = [sigma](double r, double s) { return std::exp(-r) * pos_pow(s, sigma); };
  f.f = [sigma](double r, double s) { return sigma * std::exp(-r) * pos_pow(s, sigma - 1.0); };
  f.a = [sigma](double r) { return sigma * std::exp(-r); };
  f.C = sigma;
  return f;
}

NonlinearityF zero_nonlinearity() {
  NonlinearityF f;
  f.F = [](double, double) { return 0.0; };
  f.f = [](double, double) { return 0.0; };
  f.a = [](double) { return 0.0; };
  f.C = 0.0;
  return f;
}

ConstraintG power_constraint(double p) {
  ConstraintG g;
  g.G = [p](double s) { return abs_pow(s, p); };
  g.g = [p](double s) {
    if (s == 0.0) return 0.0;
    return p * abs_pow(s, p - 1.0) * (s > 0.0 ? 1.0 : -1.0);
  };
  g.C = p;
  g.power = p;
  return g;
}

}  // namespace

std::vector<std::string> preset_names() { return {"plaplace", "quasilinear", "eigen3d"}; }

VariationalModel preset(const std::string& name, const ModelParams& params) {
  VariationalModel m;
  m.name = name;
  if (name == "plaplace" || name == "quasilinear") {
    m.dim = params.dim.value_or(2);
    const double p = params.p.value_or(1.5);
    const double sigma = params.sigma.value_or(2.0);
    sobolev_exponent(p, m.dim);
    if (!(sigma > 1.0)) throw UsageError("sigma must exceed 1");
    m.j = name == "plaplace" ? power_integrand(p) : quasilinear_integrand(p);
    m.f = decaying_power(sigma);
    m.g = power_constraint(p);
  } else if (name == "eigen3d") {
    if (params.sigma) throw UsageError("eigen3d has no nonlinearity; sigma not accepted");
    m.dim = params.dim.value_or(3);
    const double p = params.p.value_or(2.0);
    sobolev_exponent(p, m.dim);
    m.j = power_integrand(p);
    m.f = zero_nonlinearity();
    m.g = power_constraint(p);
  } else {
    throw UsageError("unknown preset '" + name + "' (expected plaplace, quasilinear or eigen3d)");
  }
  return m;
}

// ---------------------------------------------------------------------------

bool AuditReport::all_pass() const { return failures() == 0; }

int AuditReport::failures() const {
  return static_cast<int>(
      std::count_if(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.required && !c.pass; }));
}

const AuditCheck* AuditReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

double simpson_step(const Fn1& fn, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = fn(lm);
  const double frm = fn(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double diff = left + right - whole;
  if (depth <= 0 || std::abs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
  return simpson_step(fn, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(fn, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Tracks the worst slack of an inequality `bound >= value` over many samples.
class Slack {
 public:
  Slack(std::string name, bool required = true) { check_.name = std::move(name); check_.required = required; }

  void add(double bound, double value, const std::string& where) {
    const double slack = bound - value;
    const double tol = 1e-12 * std::max(1.0, std::abs(bound));
    if (first_ || slack < check_.margin) {
      check_.margin = slack;
      worst_ = where;
    }
    first_ = false;
    if (!std::isfinite(slack) || slack < -tol) check_.pass = false;
  }

  /// Strict conditions: fails without moving the margin.
  void require(bool ok, const std::string& where) {
    if (!ok && check_.pass) {
      check_.pass = false;
      worst_ = where;
    }
  }

  AuditCheck done() {
    if (!worst_.empty()) check_.detail = "worst at " + worst_;
    return check_;
  }

 private:
  AuditCheck check_;
  std::string worst_;
  bool first_ = true;
};

std::string at(double a, double b) {
  std::ostringstream o;
  o << "(" << a << ", " << b << ")";
  return o.str();
}

std::vector<double> sorted_unique(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double adaptive_simpson(const Fn1& fn, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = fn(a);
  const double fb = fn(b);
  const double fm = fn(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(fn, a, b, fa, fm, fb, whole, tol, 50);
}

AuditReport validate_growth(const VariationalModel& m, std::span<const double> s_in,
                            std::span<const double> t_in, std::span<const double> r_in) {
  if (s_in.empty() || t_in.empty()) throw UsageError("validate_growth needs s and t samples");
  AuditReport rep;
  const double p = m.p();
  const int N = m.dim;

  AuditCheck range{"1<p<N", p > 1.0 && p < N, std::min(p - 1.0, N - p), true, ""};
  rep.checks.push_back(range);
  if (!range.pass) return rep;
  const double ps = sobolev_exponent(p, N);

  std::vector<double> s_abs;
  for (double s : s_in) s_abs.push_back(std::abs(s));
  s_abs = sorted_unique(s_abs);
  std::vector<double> s_all;
  for (double s : s_abs) {
    s_all.push_back(s);
    if (s > 0.0) s_all.push_back(-s);
  }
  std::vector<double> t_all;
  for (double t : t_in) t_all.push_back(std::abs(t));
  t_all = sorted_unique(t_all);
  std::vector<double> r_all;
  if (r_in.empty()) {
    for (int k = 0; k <= 20; ++k) r_all.push_back(0.5 * k);
  } else {
    r_all.assign(r_in.begin(), r_in.end());
  }
  r_all = sorted_unique(r_all);

  const auto& J = m.j;
  {
    Slack c("j(s,0)=0");
    for (double s : s_all) c.add(0.0, std::abs(J.j(s, 0.0)), at(s, 0.0));
    rep.checks.push_back(c.done());
  }
  {
    // Strict convexity via second divided differences, monotonicity via
    // consecutive differences and j_t > 0.
    Slack conv("1.3 strictly convex in t");
    Slack incr("1.3 increasing in t");
    for (double s : s_all) {
      for (std::size_t k = 0; k + 2 < t_all.size(); ++k) {
        const double t0 = t_all[k], t1 = t_all[k + 1], t2 = t_all[k + 2];
        const double d01 = (J.j(s, t1) - J.j(s, t0)) / (t1 - t0);
        const double d12 = (J.j(s, t2) - J.j(s, t1)) / (t2 - t1);
        const double dd = (d12 - d01) / (t2 - t0);
        conv.add(dd, 0.0, at(s, t1));
        conv.require(dd > 0.0, at(s, t1));
      }
      for (std::size_t k = 0; k + 1 < t_all.size(); ++k) {
        const double d = J.j(s, t_all[k + 1]) - J.j(s, t_all[k]);
        incr.add(d, 0.0, at(s, t_all[k]));
        incr.require(d > 0.0, at(s, t_all[k]));
      }
      for (double t : t_all) {
        if (t > 0.0) incr.require(J.j_t(s, t) > 0.0, "j_t " + at(s, t));
      }
    }
    rep.checks.push_back(conv.done());
    rep.checks.push_back(incr.done());
  }
  {
    Slack lo("1.4 lower envelope"), hi("1.4 upper envelope"), js("1.5 j_s envelope"),
        jt("1.6 j_t envelope");
    for (double s : s_all) {
      for (double t : t_all) {
        const double tp = std::pow(t, p);
        const double v = J.j(s, t);
        lo.add(v, J.alpha0 * tp, at(s, t));
        hi.add(J.alpha(std::abs(s)) * tp, v, at(s, t));
        js.add(J.beta(std::abs(s)) * tp, std::abs(J.j_s(s, t)), at(s, t));
        jt.add(J.gamma(std::abs(s)) * std::pow(t, p - 1.0), std::abs(J.j_t(s, t)), at(s, t));
      }
    }
    lo.require(J.alpha0 > 0.0, "alpha0 must be positive");
    rep.checks.push_back(lo.done());
    rep.checks.push_back(hi.done());
    rep.checks.push_back(js.done());
    rep.checks.push_back(jt.done());
  }
  const auto& F = m.f;
  {
    Slack g17("1.7 f growth"), g15("1.15 f growth (variant)", false), g13("1.13 F growth"),
        g16("1.16 F growth (variant)", false), f0("F(r,0)=0");
    for (double r : r_all) {
      f0.add(0.0, std::abs(F.F(r, 0.0)), at(r, 0.0));
      for (double s : s_all) {
        const double as = std::abs(s);
        const double fv = std::abs(F.f(r, s));
        const double Fv = std::abs(F.F(r, s));
        g17.add(F.a(r) + F.C * std::pow(as, ps - 1.0), fv, at(r, s));
        g15.add(F.C * (std::pow(as, p - 1.0) + std::pow(as, ps - 1.0)), fv, at(r, s));
        g13.add(F.a(r) * as + F.C * std::pow(as, ps), Fv, at(r, s));
        g16.add(F.C * (std::pow(as, p) + std::pow(as, ps)), Fv, at(r, s));
      }
    }
    rep.checks.push_back(g17.done());
    rep.checks.push_back(g15.done());
    rep.checks.push_back(g13.done());
    rep.checks.push_back(g16.done());
    rep.checks.push_back(f0.done());
  }
  {
    Slack mono("1.8 f nonincreasing in r");
    for (double s : s_abs) {
      for (std::size_t k = 0; k + 1 < r_all.size(); ++k) {
        mono.add(F.f(r_all[k], s), F.f(r_all[k + 1], s), at(r_all[k], s));
      }
    }
    rep.checks.push_back(mono.done());
  }
  const auto& G = m.g;
  {
    Slack g9("1.9 g growth"), g14("1.14 G growth"), g0("G(0)=0"), g10("1.10 g nondegenerate");
    g0.add(0.0, std::abs(G.G(0.0)), "s = 0");
    for (double s : s_all) {
      const double as = std::abs(s);
      g9.add(G.C * (std::pow(as, p - 1.0) + std::pow(as, ps - 1.0)), std::abs(G.g(s)), at(s, 0.0));
      g14.add(G.C * (std::pow(as, p) + std::pow(as, ps)), std::abs(G.G(s)), at(s, 0.0));
      if (s > 0.0) g10.add(std::abs(G.g(s)), 0.0, at(s, 0.0));
      if (s > 0.0) g10.require(G.g(s) != 0.0, at(s, 0.0));
    }
    rep.checks.push_back(g9.done());
    rep.checks.push_back(g14.done());
    rep.checks.push_back(g0.done());
    rep.checks.push_back(g10.done());
  }
  {
    // Antiderivatives by adaptive quadrature, 1e-8 absolute.
    Slack fa("F antiderivative of f"), ga("G antiderivative of g");
    const std::vector<double> r_few = {r_all.front(), r_all[r_all.size() / 2], r_all.back()};
    for (double s : s_all) {
      const double a = std::min(0.0, s), b = std::max(0.0, s), sign = s < 0 ? -1.0 : 1.0;
      for (double r : r_few) {
        const double q = sign * adaptive_simpson([&](double x) { return F.f(r, x); }, a, b, 1e-11);
        fa.add(1e-8, std::abs(F.F(r, s) - q), at(r, s));
      }
      const double q = sign * adaptive_simpson(G.g, a, b, 1e-11);
      ga.add(1e-8, std::abs(G.G(s) - q), at(s, 0.0));
    }
    rep.checks.push_back(fa.done());
    rep.checks.push_back(ga.done());
  }
  {
    // Partials against central differences, away from the t = 0 kink.
    Slack der("j partials consistent");
    for (double s : s_all) {
      for (double t : t_all) {
        if (t < 0.05) continue;
        const double ds = 1e-5 * std::max(1.0, std::abs(s));
        const double dt = 1e-5 * std::max(1.0, t);
        const double fs = (J.j(s + ds, t) - J.j(s - ds, t)) / (2 * ds);
        const double ft = (J.j(s, t + dt) - J.j(s, t - dt)) / (2 * dt);
        const double fst = (J.j_t(s + ds, t) - J.j_t(s - ds, t)) / (2 * ds);
        const auto tol = [](double v) { return 1e-5 * (1.0 + std::abs(v)); };
        der.add(tol(fs), std::abs(J.j_s(s, t) - fs), "j_s " + at(s, t));
        der.add(tol(ft), std::abs(J.j_t(s, t) - ft), "j_t " + at(s, t));
        der.add(tol(fst), std::abs(J.j_st(s, t) - fst), "j_st " + at(s, t));
      }
    }
    rep.checks.push_back(der.done());
  }
  return rep;
}

AuditReport validate_growth(const VariationalModel& model) {
  std::vector<double> s, t;
  for (int k = 0; k <= 40; ++k) s.push_back(0.25 * k);
  for (double extra : {0.01, 0.05, 0.1, 0.5773502691896258}) s.push_back(extra);
  for (int k = 0; k <= 40; ++k) t.push_back(0.25 * k);
  for (double extra : {0.01, 0.05, 0.1}) t.push_back(extra);
  return validate_growth(model, s, t);
}

// ---------------------------------------------------------------------------

GridFunction feasible_start(const VariationalModel& model, double s0, const DomainPtr& domain,
                            const Point& center) {
  if (!(model.g.G(s0) > 0.0)) {
    std::ostringstream msg;
    msg << "G(s0) must be positive, got G(" << s0 << ") = " << model.g.G(s0);
    throw UsageError(msg.str());
  }
  const GridDomain& d = *domain;
  if (d.dim() != model.dim) throw UsageError("domain dimension does not match the model");
  double cnorm = 0.0;
  for (int a = 0; a < d.dim(); ++a) cnorm += center[a] * center[a];
  cnorm = std::sqrt(cnorm);
  const double width = std::max(0.2 * d.radius(), 2.0 * d.spacing());
  const double rho_max = d.radius() - width - cnorm;
  if (!(rho_max > 0.0)) throw UsageError("domain too small for a feasible start at this center");

  // For rho < 0 the plateau vanishes and the peak drops below s0, which keeps
  // the map rho -> W monotone and continuous down to W = 0 at rho = -width.
  const auto build = [&](double rho) {
    return GridFunction::sample(domain, [&](const Point& x) {
      double r2 = 0.0;
      for (int a = 0; a < d.dim(); ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
      const double excess = std::sqrt(r2) - rho;
      if (excess <= 0.0) return s0;
      return excess < width ? s0 * (1.0 - excess / width) : 0.0;
    });
  };
  const auto W = [&](double rho) {
    const GridFunction u = build(rho);
    return integrate_composite(u, [&](double, double s) { return model.g.G(s); });
  };

  double lo = -width;
  double hi = rho_max;
  if (W(hi) < 1.0) {
    std::ostringstream msg;
    msg << "domain too small: largest plateau reaches only W = " << W(hi) << " < 1";
    throw UsageError(msg.str());
  }
  double best = hi;
  double best_err = std::abs(W(hi) - 1.0);
  for (int it = 0; it < 200 && best_err > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double w = W(mid);
    if (std::abs(w - 1.0) < best_err) {
      best_err = std::abs(w - 1.0);
      best = mid;
    }
    (w < 1.0 ? lo : hi) = mid;
  }
  if (best_err > 1e-10) {
    std::ostringstream msg;
    msg << "feasible_start bisection stalled at |W - 1| = " << best_err;
    throw InvariantError(msg.str());
  }
  return build(best);
}

}  // namespace radsym
