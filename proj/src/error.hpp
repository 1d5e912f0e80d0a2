#pragma once

#include <stdexcept>
#include <string>

namespace cmest {

enum class ErrorKind {
  invalid,      // bad argument or violated precondition
  parse,        // malformed input file or config
  io,           // filesystem failure
  unsupported,  // requested combination not offered
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace cmest
