#pragma once

#include <iosfwd>

namespace slicedmi {

/// Entry point of the `smi` tool. Returns 0 on success, 1 on a usage or
/// configuration error, 2 on a numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slicedmi
