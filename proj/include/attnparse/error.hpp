#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace attnparse {

/// Coarse error classes; the CLI maps them onto exit codes 2, 3 and 4.
enum class ErrorCategory { usage, data, io };

inline const char* to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return "usage";
    case ErrorCategory::data: return "data";
    case ErrorCategory::io: return "io";
  }
  return "unknown";
}

/// Base exception for everything the library throws. `code()` is a stable
/// machine-readable identifier such as "bad_magic" or "length_mismatch".
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& message)
      : std::runtime_error(message), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

inline Error data_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::data, std::move(code), message);
}

inline Error usage_error(std::string code, const std::string& message) {
  return Error(ErrorCategory::usage, std::move(code), message);
}

inline Error io_error(const std::string& message) {
  return Error(ErrorCategory::io, "io", message);
}

}  // namespace attnparse
