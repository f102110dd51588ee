#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>

#include "radsym/error.hpp"

namespace radsym::cli {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw UsageError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw UsageError(where + ": unknown key '" + key + "'");
    }
  }
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

Point read_point(const json& arr, const std::string& where) {
  if (!arr.is_array() || arr.size() < 1 || arr.size() > 3) throw UsageError(where + ": expected 1 to 3 numbers");
  Point p{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < arr.size(); ++k) p[k] = arr[k].get<double>();
  return p;
}

DomainConfig parse_domain(const json& j) {
  only_keys(j, "domain", {"N", "shape", "R", "L", "h"});
  DomainConfig d;
  read(j, "N", d.dim);
  const std::string shape = j.value("shape", std::string("ball"));
  if (shape == "ball") {
    d.shape = Shape::Ball;
  } else if (shape == "box") {
    d.shape = Shape::Box;
  } else {
    throw UsageError("domain.shape must be 'ball' or 'box'");
  }
  read(j, "R", d.R);
  read(j, "L", d.L);
  read(j, "h", d.h);
  if (d.L == 0.0) d.L = d.R;
  return d;
}

MinimizeOptions parse_optimizer(const json& j) {
  only_keys(j, "optimizer",
            {"max_iters", "grad_tol", "energy_tol", "armijo_c", "backtrack_factor", "max_backtracks",
             "symmetrize_every", "seed", "preconditioner", "irls_floor", "energy_floor"});
  MinimizeOptions o;
  read(j, "max_iters", o.max_iters);
  read(j, "grad_tol", o.grad_tol);
  read(j, "energy_tol", o.energy_tol);
  read(j, "armijo_c", o.armijo_c);
  read(j, "backtrack_factor", o.backtrack_factor);
  read(j, "max_backtracks", o.max_backtracks);
  read(j, "symmetrize_every", o.symmetrize_every);
  read(j, "seed", o.seed);
  if (j.contains("preconditioner")) o.preconditioner = parse_preconditioner(j.at("preconditioner").get<std::string>());
  read(j, "irls_floor", o.irls_floor);
  read(j, "energy_floor", o.energy_floor);
  o.validate();
  return o;
}

PolarizerConfig parse_polarizers(const json& j) {
  only_keys(j, "polarizers", {"mode", "seed", "count", "max_offset_cells", "items", "general"});
  PolarizerConfig p;
  read(j, "mode", p.mode);
  if (p.mode != "exact" && p.mode != "general") throw UsageError("polarizers.mode must be 'exact' or 'general'");
  read(j, "seed", p.seed);
  read(j, "count", p.count);
  read(j, "max_offset_cells", p.max_offset_cells);
  if (j.contains("items")) p.items = sequence_from_json(json{{"items", j.at("items")}}).items;
  if (j.contains("general")) {
    for (const auto& g : j.at("general")) {
      only_keys(g, "polarizers.general[]", {"normal", "offset"});
      p.general.push_back({read_point(g.at("normal"), "polarizers.general[].normal"), g.at("offset").get<double>()});
    }
  }
  return p;
}

VerifyThresholds parse_thresholds(const json& j) {
  only_keys(j, "thresholds", {"rel_lp", "cstar_fraction", "cstar_eps_rel", "test_count", "test_seed"});
  VerifyThresholds t;
  read(j, "rel_lp", t.rel_lp);
  read(j, "cstar_fraction", t.cstar_fraction);
  read(j, "cstar_eps_rel", t.cstar_eps_rel);
  read(j, "test_count", t.test_count);
  read(j, "test_seed", t.test_seed);
  return t;
}

void parse_refine(const json& j, RunConfig& cfg) {
  only_keys(j, "refine",
            {"h_list", "family_size", "family_seed", "family_L", "family_width", "family_shift", "family_aniso",
             "polarizer_offset", "ball_R", "run_verify"});
  read(j, "h_list", cfg.h_list);
  RefinementProtocol& r = cfg.refine;
  read(j, "family_size", r.family_size);
  read(j, "family_seed", r.family_seed);
  read(j, "family_L", r.family_L);
  read(j, "family_width", r.family_width);
  read(j, "family_shift", r.family_shift);
  read(j, "family_aniso", r.family_aniso);
  read(j, "polarizer_offset", r.polarizer_offset);
  read(j, "ball_R", r.ball_R);
  read(j, "run_verify", r.run_verify);
}

}  // namespace

RunConfig parse_config(const json& doc) {
  try {
    only_keys(doc, "config",
              {"command", "preset", "model", "domain", "start", "input", "output_dir", "optimizer", "polarizers",
               "thresholds", "audit", "refine", "emit"});
    RunConfig cfg;
    read(doc, "command", cfg.command);
    read(doc, "preset", cfg.preset);
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      only_keys(m, "model", {"p", "sigma", "N"});
      if (m.contains("p")) cfg.model.p = m.at("p").get<double>();
      if (m.contains("sigma")) cfg.model.sigma = m.at("sigma").get<double>();
      if (m.contains("N")) cfg.model.dim = m.at("N").get<int>();
    }
    if (doc.contains("domain")) cfg.domain = parse_domain(doc.at("domain"));
    if (doc.contains("start")) {
      const json& s = doc.at("start");
      only_keys(s, "start", {"s0", "center"});
      read(s, "s0", cfg.start.s0);
      if (s.contains("center")) cfg.start.center = read_point(s.at("center"), "start.center");
    }
    read(doc, "input", cfg.input);
    read(doc, "output_dir", cfg.output_dir);
    if (doc.contains("optimizer")) cfg.optimizer = parse_optimizer(doc.at("optimizer"));
    if (doc.contains("polarizers")) cfg.polarizers = parse_polarizers(doc.at("polarizers"));
    if (doc.contains("thresholds")) cfg.thresholds = parse_thresholds(doc.at("thresholds"));
    if (doc.contains("audit")) {
      only_keys(doc.at("audit"), "audit", {"steps"});
      read(doc.at("audit"), "steps", cfg.audit_steps);
    }
    if (doc.contains("refine")) parse_refine(doc.at("refine"), cfg);
    cfg.refine.opts = cfg.optimizer;
    if (doc.contains("emit")) {
      const json& e = doc.at("emit");
      only_keys(e, "emit", {"json", "csv", "pgm"});
      read(e, "json", cfg.emit.json);
      read(e, "csv", cfg.emit.csv);
      read(e, "pgm", cfg.emit.pgm);
    }
    if (!cfg.command.empty() &&
        std::find(command_names().begin(), command_names().end(), cfg.command) == command_names().end()) {
      throw UsageError("unknown command '" + cfg.command + "'");
    }
    return cfg;
  } catch (const json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  return parse_config(doc);
}

}  // namespace radsym::cli
