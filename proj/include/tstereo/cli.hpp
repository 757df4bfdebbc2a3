#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tstereo {

/// Runs the command-line tool. args excludes the program name. Returns the
/// process exit code: 0 success, 1 internal error, 2 invalid input. Output
/// files are only written once every result has been computed.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tstereo
