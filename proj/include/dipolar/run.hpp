#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "dipolar/config.hpp"

namespace dipolar {

/// Process exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

struct RunResult {
  std::vector<std::filesystem::path> files;  // in write order
  std::string summary;                       // one line, no newline
  std::vector<std::string> warnings;         // design-rule advisories
};

/// Runs the task and writes its artifacts into out_dir. Each file is written atomically;
/// on an exception the files already written by this call are removed.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir,
              Execution execution = Execution::parallel);

/// run() with the error-to-exit-code mapping: summary to out, diagnostics to err.
int run_and_report(const RunConfig& config, const std::filesystem::path& out_dir, std::ostream& out,
                   std::ostream& err, Execution execution = Execution::parallel);

/// printf("%.9g"): the number format of every CSV.
std::string format_number(double v);

}  // namespace dipolar
