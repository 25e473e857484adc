#pragma once

namespace sqlab {

// Exit status: 0 success or all suites pass, 1 suite failure or runtime error,
// 2 usage or configuration error.
int run_cli(int argc, char** argv);

}  // namespace sqlab
