#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vidpipe {

// Exit codes: 0 success, 1 configuration error, 2 I/O or stream-format error.
int cli_main(int argc, char **argv);
int cli_main(const std::vector<std::string> &args, std::ostream &diagnostics);

}  // namespace vidpipe
