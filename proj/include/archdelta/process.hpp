#pragma once

#include <string>
#include <vector>

namespace archdelta {

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs argv[0] (looked up on PATH) with the given stdin, capturing stdout and
// stderr. Throws Error(kIo) only when the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input = {},
                          const std::string& working_dir = {});

}  // namespace archdelta
