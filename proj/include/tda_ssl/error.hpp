#pragma once

#include <stdexcept>
#include <string>

namespace tda_ssl {

// Raised when input data violates a contract (malformed CSV, too few
// labelled points per class, ...). Argument errors use std::invalid_argument.
class data_error : public std::runtime_error {
 public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tda_ssl
