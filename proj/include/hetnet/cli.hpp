#pragma once

#include <iosfwd>

namespace hetnet::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kUsageError = 2,
  kInfeasible = 3,
};

/// Entry point of the hetnet tool. Messages go to `out` and `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace hetnet::cli
