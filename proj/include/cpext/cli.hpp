#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpext {

/// Entry point behind the cpext binary. Exit codes: 0 pass / positive
/// verdict, 1 domain-negative, 2 parse or usage error, 3 numerically
/// inconclusive.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpext
