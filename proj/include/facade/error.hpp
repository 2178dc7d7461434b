#pragma once

#include <stdexcept>
#include <string>

namespace facade {

// Raised when a file cannot be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when input data is well-formed on disk but violates a contract
// (malformed PNG/JSON, out-of-range class index, mismatched dimensions).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace facade
