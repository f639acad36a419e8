#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fgd::cli {

// Exit codes: 0 success, 1 I/O or schema failure, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fgd::cli
