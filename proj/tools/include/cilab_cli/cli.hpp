#pragma once

namespace cilab::cli {

/// Parses and dispatches one invocation. Exit codes: 0 success, 1 usage
/// error, 2 runtime error. Successful subcommands print one summary line
/// starting with `status=ok`.
int run(int argc, const char* const* argv);

} // namespace cilab::cli
