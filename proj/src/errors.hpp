#ifndef TRACKFUSE_ERRORS_HPP
#define TRACKFUSE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace trackfuse {

// Error taxonomy mirrored by the C API status codes: invalid input/config,
// filesystem trouble, and numerical failures at runtime.
enum class ErrorCode {
  InvalidArgument,
  Io,
  Runtime,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline Error invalid_argument(const std::string& what) {
  return Error(ErrorCode::InvalidArgument, what);
}
inline Error io_error(const std::string& what) {
  return Error(ErrorCode::Io, what);
}
inline Error runtime_error(const std::string& what) {
  return Error(ErrorCode::Runtime, what);
}

}  // namespace trackfuse

#endif
