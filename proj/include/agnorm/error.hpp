#pragma once

#include <stdexcept>
#include <string>

namespace agnorm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad spec strings, out-of-range parameters, mismatched groups.
class UsageError : public Error {
 public:
  using Error::Error;
};

// A hypothesis or conclusion check inside a construction did not hold.
class AuditError : public Error {
 public:
  AuditError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Reached a state that the underlying theory rules out.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace agnorm
