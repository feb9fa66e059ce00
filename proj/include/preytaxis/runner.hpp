#pragma once

// Command dispatch: executes a RunConfig's command and writes its output
// files (17-significant-digit CSV plus two-column plot data) under the
// configured output directory. Library errors propagate as preytaxis::Error;
// the CLI translates them into exit codes.

#include <string>

#include "preytaxis/config.hpp"

namespace preytaxis {

// Runs cfg.command with outputs under cfg.out_dir; workers bounds the thread
// pool used by sweep and the figure commands. Returns a one-line summary.
std::string run_command(const RunConfig& cfg, int workers = 1);

} // namespace preytaxis
