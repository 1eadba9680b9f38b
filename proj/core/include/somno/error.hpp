#pragma once

#include <stdexcept>
#include <string>

namespace somno {

// Raised for malformed input data or violated preconditions. Messages carry
// enough context (field, line, label) to locate the problem in a file.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace somno
