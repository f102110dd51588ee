#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "radsym/harness.hpp"

namespace radsym::cli {

struct DomainConfig {
  /// 0 means "take N from the model".
  int dim = 0;
  Shape shape = Shape::Ball;
  double R = 0.0;
  double L = 0.0;
  double h = 0.0;
};

struct StartConfig {
  double s0 = 0.5;
  Point center{0.0, 0.0, 0.0};
};

struct GeneralPolarizerConfig {
  Point normal{0.0, 0.0, 0.0};
  double offset = 0.0;
};

struct PolarizerConfig {
  /// "exact" rejects polarizers that do not preserve the lattice.
  std::string mode = "exact";
  std::uint64_t seed = 1;
  int count = 200;
  int max_offset_cells = 0;
  std::vector<GridExactPolarizer> items;
  std::vector<GeneralPolarizerConfig> general;
};

struct EmitConfig {
  bool json = true;
  bool csv = true;
  bool pgm = false;
};

struct RunConfig {
  std::string command;
  std::string preset;
  ModelParams model;
  std::optional<DomainConfig> domain;
  StartConfig start;
  std::string input;
  std::string output_dir = ".";
  MinimizeOptions optimizer;
  PolarizerConfig polarizers;
  VerifyThresholds thresholds;
  int audit_steps = 100;
  std::vector<double> h_list;
  RefinementProtocol refine;
  EmitConfig emit;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"symmetrize", "verify", "audit", "minimize",
                                                 "polarize", "lint-model", "refine"};
  return names;
}

/// Parses one JSON document; unknown keys anywhere raise UsageError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace radsym::cli
