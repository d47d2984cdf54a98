#pragma once

// Subcommand dispatch for pca-debias. Failures are reported as one JSON
// object per line on the error stream, e.g.
//   {"error":"config","message":"...","key":"taus","line":4,"exit_code":2}

#include "pcadb_cli/config.hpp"
#include "pcadb_cli/output.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace pcadb::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitIo = 4,
};

// Writes {"error": kind, "message": ..., [key, line,] "exit_code": code}.
void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                const std::string& key = {}, int line = 0);

// Runs every scenario in order. A failing scenario is recorded as an error
// row and the remaining scenarios still run; the result is kExitRuntime if
// any scenario failed. `replicates` (optional) receives per-replicate CSV.
int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream* replicates, std::ostream& log);

struct SelfTestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Quick invariant suite on small fixed instances.
std::vector<SelfTestCheck> run_selftest();

// Full command line entry point; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcadb::cli
