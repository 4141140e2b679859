#pragma once

#include <iostream>

namespace lmrank {

// Entry point behind the lmrank binary. Returns 0 on success, 1 on
// runtime/data errors, 2 on usage errors. Streams are injectable so the
// whole surface is testable in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace lmrank
