#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace risa {

enum class ErrorKind {
  Parse,
  Integrity,
  Decode,
  Shape,
  Dimension,
  Domain,
  Config,
  InsufficientData,
  Sampling,
  Numeric,
  Io,
  IncompatibleVersion,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the toolkit carries a kind so callers (the CLI in
/// particular) can map it to an exit code without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace risa
