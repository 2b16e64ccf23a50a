#ifndef TVC_ERRORS_HPP
#define TVC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tvc {

// Error categories map onto CLI exit codes: validation -> 1, numeric -> 2, io -> 3.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tvc

#endif
