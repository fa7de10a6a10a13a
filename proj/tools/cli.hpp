#pragma once

namespace qttlab {

// 0 success, 1 domain error, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace qttlab
