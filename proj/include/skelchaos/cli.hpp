#pragma once

namespace skelchaos {

/// Entry point of the `skelchaos` tool. Returns the process exit code:
/// 0 success, 2 input error, 3 numeric error, 4 search bracket error.
int run_cli(int argc, char** argv);

}  // namespace skelchaos
