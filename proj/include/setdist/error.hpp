#pragma once

#include <stdexcept>
#include <string>

namespace setdist {

// Bad arguments or malformed input data (CLI exit code 2).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A pipeline stage could not produce its result (CLI exit code 3).
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace setdist
