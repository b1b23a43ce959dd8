#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowsctl {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kSolved = 0, kUnsolved = 1, kUsage = 2, kEnvironment = 3 };

struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

/// Entry point of flowsctl. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, Io io);

}  // namespace flowsctl
