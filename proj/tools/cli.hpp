#pragma once

#include <iosfwd>

namespace maskslic {

/// Runs the command-line tool. Returns 0 on success, 2 on usage errors and
/// 1 on data errors; errors are reported on `err` as one line starting with
/// "error[<Code>]: ".
int cli_run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace maskslic
