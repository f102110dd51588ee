#pragma once

#include <string>

#include "config.hpp"

namespace radsym::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitVerdictFalse = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvariant = 3;

int cmd_symmetrize(const RunConfig& cfg);
int cmd_verify(const RunConfig& cfg);
int cmd_audit(const RunConfig& cfg);
int cmd_minimize(const RunConfig& cfg);
int cmd_polarize(const RunConfig& cfg);
int cmd_lint_model(const RunConfig& cfg);
int cmd_refine(const RunConfig& cfg);

/// Dispatches on cfg.command. Library exceptions propagate.
int run_command(const RunConfig& cfg);

/// run_command with exceptions mapped to exit codes and reported on stderr.
int run_guarded(const RunConfig& cfg);

}  // namespace radsym::cli
