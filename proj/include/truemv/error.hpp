#pragma once

#include <stdexcept>
#include <string>

namespace truemv {

// Single exception type for format, validation and configuration failures.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace truemv
