#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracmem {

/// Batch front-end: simulate | gramian | steer | verify. Returns the
/// process exit code (0 ok, 2 schema/IO, 3 numerical failure, 4 tolerance
/// missed, 5 singular Gramian or rank failure). Streams are injected so
/// tests can capture stdout/stderr.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace fracmem
