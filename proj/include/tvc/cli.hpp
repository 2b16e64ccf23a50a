#ifndef TVC_CLI_HPP
#define TVC_CLI_HPP

#include <string>
#include <vector>

namespace tvc {

// Exit codes: 0 success, 1 validation/usage, 2 numerical failure, 3 I/O.
int run_cli(const std::vector<std::string>& args);

}  // namespace tvc

#endif
