#pragma once

#include <stdexcept>
#include <string>

namespace costlens {

// Input data violates a documented invariant (bad shapes, bad values,
// matrices outside the value space).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing a file failed.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed command line or conflicting options.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace costlens
