#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace priming {

enum class ErrorKind {
  domain,
  unsupported_sample_size,
  out_of_regime,
  numerical_domain,
  infeasible_decomposition,
  degenerate_input,
  insufficient_data,
  parse,
  linkage,
  usage,
  simulation,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  // Errors caused by malformed input or invocation rather than by the data.
  bool is_input_error() const noexcept {
    return kind_ == ErrorKind::parse || kind_ == ErrorKind::linkage ||
           kind_ == ErrorKind::usage;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace priming
