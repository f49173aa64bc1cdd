#include "risa/core/error.hpp"

namespace risa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse error";
    case ErrorKind::Integrity: return "integrity error";
    case ErrorKind::Decode: return "decode error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Domain: return "domain error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::Sampling: return "sampling error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::IncompatibleVersion: return "incompatible version";
  }
  return "error";
}

void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, std::string(to_string(kind)) + ": " + message);
}

}  // namespace risa
