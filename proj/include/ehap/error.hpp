#pragma once

#include <stdexcept>
#include <string>

namespace ehap {

// Bad input: malformed files, out-of-range parameters, violated
// preconditions. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical or runtime failure inside an otherwise valid run
// (blow-up, singular system, unreachable target). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ehap
