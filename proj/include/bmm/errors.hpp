#pragma once

#include <stdexcept>
#include <string>

namespace bmm {

// Bad parameters supplied by the caller (sample size, ratio, flags). The CLI
// maps this to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Bad data: non-finite values, empty vectors, malformed payloads or files.
// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bmm
