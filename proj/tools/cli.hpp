#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bundletrade::cli {

/// Entry point of trading-bench. args excludes the program name. Returns the
/// process exit status: 0 success, 1 verification failures, 2 usage or I/O
/// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bundletrade::cli
