#pragma once

#include <stdexcept>
#include <string>

namespace lodae {

enum class ErrorCode {
  kInvalidArgument = 1,
  kOutOfRange = 2,
  kNumerical = 3,
  kInfeasible = 4,
  kIo = 5,
  kConfig = 6,
};

/// Exception type thrown by every module; the C API maps `code()` onto its
/// status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace lodae
