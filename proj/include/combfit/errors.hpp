#pragma once

#include <stdexcept>
#include <string>

namespace combfit {

// Violated physics or numerical preconditions (CLI exit code 1).
class domain_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files, flags, or schema violations (CLI exit code 2).
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class overflow_error : public domain_error {
 public:
  using domain_error::domain_error;
};

}  // namespace combfit
