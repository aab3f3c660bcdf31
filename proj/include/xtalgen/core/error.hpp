#pragma once

#include <stdexcept>
#include <string>

namespace xtalgen {

// All library failures surface as this exception type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xtalgen
