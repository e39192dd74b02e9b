#pragma once

#include <stdexcept>
#include <string>

namespace pgss {

// Caller-supplied data is invalid: bad parameter values, malformed files,
// inconsistent run configuration.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic left the range where results are exact or representable
// (overflow, non-finite latent state, counts beyond the exact-sampling cap).
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal invariant failed. Indicates a bug in this library, not bad
// input.
class internal_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace pgss
