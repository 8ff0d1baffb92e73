#pragma once

#include <iosfwd>

namespace sfem {

/// Exit codes: 0 success, 1 numerical failure, 2 configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfem
