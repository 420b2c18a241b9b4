#pragma once

#include <stdexcept>
#include <string>

namespace randlod {

// Failure categories. The numeric values are mirrored by the C API error codes.
enum class ErrorKind {
  Config = 1,       // inconsistent mesh/campaign parameters
  Data = 2,         // invalid coefficient or vector data
  Solver = 3,       // factorization breakdown or residual stagnation
  Numeric = 4,      // non-definite matrices in dense kernels
  Capability = 5,   // requested data was not retained
  Unsupported = 6,  // unsupported option combination
  Io = 7,
  Format = 8,
  Version = 9,
  Checksum = 10,
  Truncated = 11,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace randlod
