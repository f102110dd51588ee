#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "radsym/error.hpp"
#include "radsym/grid_io.hpp"
#include "radsym/json_out.hpp"

namespace radsym::cli {

namespace {

using nlohmann::json;

constexpr int kReportVersion = 1;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output_dir);
  return (std::filesystem::path(cfg.output_dir) / name).string();
}

void write_report(const RunConfig& cfg, const std::string& name, json report) {
  if (!cfg.emit.json) return;
  report["version"] = kReportVersion;
  report["command"] = cfg.command;
  write_text(out_path(cfg, name), dump_json(report) + "\n");
}

VariationalModel build_model(const RunConfig& cfg) {
  if (cfg.preset.empty()) throw UsageError("config: missing 'preset'");
  return preset(cfg.preset, cfg.model);
}

DomainPtr build_domain(const RunConfig& cfg, int model_dim) {
  if (!cfg.domain) throw UsageError("config: missing 'domain'");
  const DomainConfig& d = *cfg.domain;
  return make_domain(d.dim == 0 ? model_dim : d.dim, d.shape, d.L, d.h, d.R);
}

GridFunction initial_guess(const RunConfig& cfg, const VariationalModel& model) {
  if (!cfg.input.empty()) return load_grid(cfg.input);
  return feasible_start(model, cfg.start.s0, build_domain(cfg, model.dim), cfg.start.center);
}

GridFunction require_input(const RunConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("config: missing 'input' grid file");
  return load_grid(cfg.input);
}

json index_json(const Index& idx, int dim) {
  json a = json::array();
  for (int k = 0; k < dim; ++k) a.push_back(idx[k]);
  return a;
}

json energy_json(const EnergyBreakdown& e) {
  return {{"J", e.J}, {"Fterm", e.Fterm}, {"E", e.E}, {"W", e.W}};
}

json lambda_json(const LambdaEstimate& l) {
  json per = json::array();
  for (double v : l.per_test) per.push_back(v);
  return {{"lambda", l.lambda},   {"per_test", per}, {"spread_cv", l.spread_cv},
          {"usable", l.usable},   {"eps_den", l.eps_den}};
}

json el_json(const ELReport& r) {
  return {{"lambda", r.lambda},   {"A", r.A},         {"B", r.B},
          {"residual", r.residual}, {"phi_norm", r.phi_norm}, {"normalized", r.normalized},
          {"normalized_max", r.normalized_max}};
}

json symmetry_json(const SymmetryReport& r, int dim) {
  return {{"rel_lp_distance", r.rel_lp_distance},
          {"energy_gap", r.energy_gap},
          {"grad_norm_gap", r.grad_norm_gap},
          {"j_gap", r.j_gap},
          {"cstar_measure", r.cstar_measure},
          {"support_measure", r.support_measure},
          {"shift", index_json(r.shift, dim)},
          {"verdict", r.verdict},
          {"energy_chain_ok", r.energy_chain_ok},
          {"energy_scale", r.energy_scale},
          {"energy_u", energy_json(r.e_u)},
          {"energy_u_star", energy_json(r.e_star)},
          {"thresholds",
           {{"rel_lp", r.thresholds.rel_lp},
            {"cstar_fraction", r.thresholds.cstar_fraction},
            {"cstar_eps_rel", r.thresholds.cstar_eps_rel}}},
          {"lambda", lambda_json(r.lambda)},
          {"el", el_json(r.el)},
          {"optimizer",
           {{"iterations", r.iterations},
            {"converged", r.converged},
            {"stop_reason", r.stop_reason},
            {"proj_grad_norm", r.proj_grad_norm}}}};
}

json minimize_json(const MinimizeResult& r) {
  return {{"iterations", r.iterations},       {"converged", r.converged},
          {"stop_reason", to_string(r.stop)}, {"lambda", r.lambda},
          {"proj_grad_norm", r.proj_grad_norm}, {"energy", energy_json(r.energy)}};
}

void write_history(const RunConfig& cfg, const std::vector<HistoryRow>& rows) {
  if (!cfg.emit.csv) return;
  std::ostringstream csv;
  write_history_csv(rows, csv);
  write_text(out_path(cfg, "history.csv"), csv.str());
}

std::vector<double> thresholds_for(const GridFunction& u) {
  std::vector<double> ts;
  const double mx = u.max();
  for (int k = 0; k < 16; ++k) ts.push_back(mx * k / 16.0);
  return ts;
}

PolarizerSequence sequence_for(const RunConfig& cfg, const GridDomain& d) {
  if (!cfg.polarizers.items.empty()) return PolarizerSequence{cfg.polarizers.seed, cfg.polarizers.items};
  return sample_polarizers(d, cfg.polarizers.seed, cfg.polarizers.count, cfg.polarizers.max_offset_cells);
}

}  // namespace

int cmd_symmetrize(const RunConfig& cfg) {
  const GridFunction u = require_input(cfg);
  const GridFunction us = schwarz_symmetrize(u);
  save_grid(us, out_path(cfg, "u_star.symf"));
  json samples = json::array();
  bool equal = true;
  for (double t : thresholds_for(u)) {
    const double a = distribution_function(u, t);
    const double b = distribution_function(us, t);
    equal = equal && a == b;
    samples.push_back({{"t", t}, {"before", a}, {"after", b}});
  }
  write_report(cfg, "symmetrize_report.json", {{"distribution", samples}, {"equimeasurable", equal}});
  if (cfg.emit.pgm) write_pgm(us.values(), us.domain(), out_path(cfg, "u_star.pgm"));
  return equal ? kExitOk : kExitInvariant;
}

int cmd_minimize(const RunConfig& cfg) {
  const VariationalModel model = build_model(cfg);
  const GridFunction u0 = initial_guess(cfg, model);
  const MinimizeResult res = minimize(model, u0, cfg.optimizer);
  save_grid(res.u_final, out_path(cfg, "u_final.symf"));
  write_history(cfg, res.history);
  write_report(cfg, "minimize_report.json", {{"preset", model.name}, {"result", minimize_json(res)}});
  if (cfg.emit.pgm) write_pgm(res.u_final.values(), res.u_final.domain(), out_path(cfg, "u_final.pgm"));
  return res.converged ? kExitOk : kExitVerdictFalse;
}

int cmd_verify(const RunConfig& cfg) {
  const VariationalModel model = build_model(cfg);
  const GridFunction u0 = initial_guess(cfg, model);
  const VerifyOutcome out = verify_theorem(model, u0, cfg.optimizer, cfg.thresholds);
  const GridFunction& u = out.minimize.u_final;
  save_grid(u, out_path(cfg, "u_final.symf"));
  save_grid(out.u_star, out_path(cfg, "u_star.symf"));
  write_history(cfg, out.minimize.history);
  write_report(cfg, "verify_report.json",
               {{"preset", model.name}, {"report", symmetry_json(out.report, u.domain().dim())}});
  if (cfg.emit.pgm) {
    std::vector<double> diff(u.size());
    for (std::size_t c = 0; c < u.size(); ++c) diff[c] = std::abs(u[c] - out.aligned_star[c]);
    write_pgm(u.values(), u.domain(), out_path(cfg, "u.pgm"));
    write_pgm(out.u_star.values(), u.domain(), out_path(cfg, "u_star.pgm"));
    write_pgm(diff, u.domain(), out_path(cfg, "u_minus_aligned_star.pgm"));
  }
  return out.report.verdict ? kExitOk : kExitVerdictFalse;
}

int cmd_audit(const RunConfig& cfg) {
  const VariationalModel model = build_model(cfg);
  GridFunction u = cfg.input.empty() ? minimize(model, initial_guess(cfg, model), cfg.optimizer).u_final
                                     : project_constraint(load_grid(cfg.input), model);
  const PolarizerSequence seq = sequence_for(cfg, u.domain());
  const PolarizationAudit audit = polarization_audit(u, model, seq, cfg.audit_steps, cfg.thresholds.test_count,
                                                     cfg.thresholds.test_seed);
  if (cfg.emit.csv) {
    std::ostringstream csv;
    csv << "n,distance,W,grad_p,J,Fterm,E,lambda\n";
    for (const auto& r : audit.rows) {
      csv << r.n << ',' << format_double(r.distance) << ',' << format_double(r.W) << ',' << format_double(r.grad_p)
          << ',' << format_double(r.J) << ',' << format_double(r.Fterm) << ',' << format_double(r.E) << ','
          << format_double(r.lambda) << '\n';
    }
    write_text(out_path(cfg, "audit.csv"), csv.str());
  }
  write_report(cfg, "audit_report.json",
               {{"preset", model.name},
                {"steps", static_cast<int>(audit.rows.size()) - 1},
                {"flags", audit.flags},
                {"lambda_cv", audit.lambda_cv},
                {"ok", audit.ok()},
                {"polarizers", to_json(seq)}});
  return audit.ok() ? kExitOk : kExitVerdictFalse;
}

int cmd_polarize(const RunConfig& cfg) {
  GridFunction u = require_input(cfg);
  const GridDomain& d = u.domain();
  const double W0 = std::pow(lp_norm(u, 2.0), 2.0);
  bool approximate = false;
  std::vector<GridExactPolarizer> exact = cfg.polarizers.items;
  std::vector<Polarizer> general;
  for (const auto& g : cfg.polarizers.general) {
    const Polarizer p(d.dim(), g.normal, g.offset);
    if (auto e = as_grid_exact(p, d)) {
      exact.push_back(*e);
    } else if (cfg.polarizers.mode == "exact") {
      std::ostringstream msg;
      msg << "polarizer with normal (" << g.normal[0] << ", " << g.normal[1];
      if (d.dim() == 3) msg << ", " << g.normal[2];
      msg << ") and offset " << g.offset << " is not grid-exact; use mode \"general\"";
      throw UsageError(msg.str());
    } else {
      general.push_back(p);
    }
  }
  if (exact.empty() && general.empty()) exact = sequence_for(cfg, d).items;
  for (const auto& p : exact) u = polarize(u, p);
  for (const auto& p : general) {
    u = polarize_general(u, p);
    approximate = true;
  }
  save_grid(u, out_path(cfg, "polarized.symf"));
  write_report(cfg, "polarize_report.json",
               {{"exact_count", exact.size()},
                {"general_count", general.size()},
                {"approximate", approximate},
                {"l2_squared_before", W0},
                {"l2_squared_after", std::pow(lp_norm(u, 2.0), 2.0)},
                {"polarizers", to_json(PolarizerSequence{cfg.polarizers.seed, exact})}});
  return kExitOk;
}

int cmd_lint_model(const RunConfig& cfg) {
  const VariationalModel model = build_model(cfg);
  const AuditReport rep = validate_growth(model);
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name}, {"pass", c.pass}, {"margin", c.margin}, {"required", c.required},
                      {"detail", c.detail}});
  }
  const auto window = sigma_window(model.p(), model.dim);
  write_report(cfg, "lint_report.json",
               {{"preset", model.name},
                {"p", model.p()},
                {"N", model.dim},
                {"sobolev_exponent", sobolev_exponent(model.p(), model.dim)},
                {"sigma_window", {window.first, window.second}},
                {"checks", checks},
                {"failures", rep.failures()},
                {"all_pass", rep.all_pass()}});
  return rep.all_pass() ? kExitOk : kExitVerdictFalse;
}

int cmd_refine(const RunConfig& cfg) {
  const VariationalModel model = build_model(cfg);
  if (cfg.h_list.empty()) throw UsageError("config: refine.h_list is required");
  RefinementProtocol pr = cfg.refine;
  pr.opts = cfg.optimizer;
  pr.s0 = cfg.start.s0;
  pr.start_center = cfg.start.center;
  const auto rows = refinement_study(model, cfg.h_list, pr);
  bool monotone = true;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    monotone = monotone && rows[k].ps_gap <= rows[k - 1].ps_gap && rows[k].pol_gap <= rows[k - 1].pol_gap;
    if (pr.run_verify) monotone = monotone && rows[k].rel_lp <= rows[k - 1].rel_lp;
  }
  json table = json::array();
  std::ostringstream csv;
  csv << "h,ps_gap,ps_gap_max,pol_gap,rel_lp\n";
  for (const auto& r : rows) {
    table.push_back({{"h", r.h}, {"ps_gap", r.ps_gap}, {"ps_gap_max", r.ps_gap_max}, {"pol_gap", r.pol_gap},
                     {"rel_lp", r.rel_lp}});
    csv << format_double(r.h) << ',' << format_double(r.ps_gap) << ',' << format_double(r.ps_gap_max) << ','
        << format_double(r.pol_gap) << ',' << format_double(r.rel_lp) << '\n';
  }
  if (cfg.emit.csv) write_text(out_path(cfg, "refine.csv"), csv.str());
  write_report(cfg, "refine_report.json", {{"preset", model.name}, {"rows", table}, {"monotone", monotone}});
  return monotone ? kExitOk : kExitVerdictFalse;
}

int run_command(const RunConfig& cfg) {
  const std::string& c = cfg.command;
  if (c == "symmetrize") return cmd_symmetrize(cfg);
  if (c == "verify") return cmd_verify(cfg);
  if (c == "audit") return cmd_audit(cfg);
  if (c == "minimize") return cmd_minimize(cfg);
  if (c == "polarize") return cmd_polarize(cfg);
  if (c == "lint-model") return cmd_lint_model(cfg);
  if (c == "refine") return cmd_refine(cfg);
  throw UsageError(c.empty() ? "no command given" : "unknown command '" + c + "'");
}

int run_guarded(const RunConfig& cfg) {
  try {
    return run_command(cfg);
  } catch (const InvariantError& e) {
    std::cerr << "radsym: invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const UsageError& e) {
    std::cerr << "radsym: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "radsym: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "radsym: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace radsym::cli
