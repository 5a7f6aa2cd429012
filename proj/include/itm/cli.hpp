#pragma once

namespace itm {

/// Entry point of the command-line tool. Returns the process exit code:
/// 0 iff the command ran and every internal assertion passed.
int run_cli(int argc, char** argv);

}  // namespace itm
