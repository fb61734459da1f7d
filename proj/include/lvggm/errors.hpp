#pragma once

#include <stdexcept>
#include <string>

namespace lvggm {

enum class ErrorCode {
  InvalidArgument,
  DataError,
  NotPositiveDefinite,
  ModelConstruction,
  Unidentifiable,
  Io,
  Internal,
};

/// Library error carrying a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_invalid(const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, what);
}

[[noreturn]] inline void throw_not_pd(const std::string& what) {
  throw Error(ErrorCode::NotPositiveDefinite, what);
}

[[noreturn]] inline void throw_data(const std::string& what) {
  throw Error(ErrorCode::DataError, what);
}

}  // namespace lvggm
